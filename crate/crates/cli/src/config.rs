//! `key = value` run configuration with Fourier mode rows.
//!
//! ```text
//! # comment
//! n = 2
//! N = 16
//! k = 2
//! l = 1
//! a = 2
//! toy = true
//! psi = manufactured
//! ustar 1 -1 0 0 0.025 cos
//! ```
//!
//! Mode rows are `<table> <2n integer frequencies> <amplitude> [cos|sin]`
//! with tables `rho`, `psi_mode`, `ubar` and `ustar`.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qflow_core::field::{FourierMode, ModeKind, TrigPoly};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    Constant(f64),
    /// `ψ ≡ c`.
    Invariant,
    /// Quotient density of `χ + ∂∂̄u*` with `u*` from the `ustar` rows.
    Manufactured,
    /// `base + Σ psi_mode`.
    Fourier(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsolutionSpec {
    None,
    Zero,
    Modes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub points: usize,
    pub k: usize,
    pub l: usize,
    pub toy: bool,
    pub a: f64,
    pub rho: Vec<FourierMode>,
    pub psi: PsiSpec,
    /// `ψ` is multiplied by `e^{psi_shift}`.
    pub psi_shift: f64,
    pub psi_modes: Vec<FourierMode>,
    pub ustar: Vec<FourierMode>,
    pub subsolution: SubsolutionSpec,
    pub ubar: Vec<FourierMode>,
    pub cfl: f64,
    pub stop_osc: f64,
    pub t_max: f64,
    pub max_steps: usize,
    pub snapshot_every: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub samples: usize,
    pub max_n: usize,
    pub inject_fault: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            points: 16,
            k: 2,
            l: 1,
            toy: false,
            a: 2.0,
            rho: Vec::new(),
            psi: PsiSpec::Invariant,
            psi_shift: 0.0,
            psi_modes: Vec::new(),
            ustar: Vec::new(),
            subsolution: SubsolutionSpec::None,
            ubar: Vec::new(),
            cfl: 0.2,
            stop_osc: 1e-8,
            t_max: 50.0,
            max_steps: 1_000_000,
            snapshot_every: 1,
            out: None,
            seed: 0,
            samples: 2000,
            max_n: 6,
            inject_fault: false,
        }
    }
}

impl RunConfig {
    pub fn rho_poly(&self) -> TrigPoly {
        TrigPoly::new(self.rho.clone())
    }

    pub fn ustar_poly(&self) -> TrigPoly {
        TrigPoly::new(self.ustar.clone())
    }

    pub fn ubar_poly(&self) -> TrigPoly {
        TrigPoly::new(self.ubar.clone())
    }

    pub fn psi_poly(&self) -> TrigPoly {
        TrigPoly::new(self.psi_modes.clone())
    }
}

/// Keys that a flow or subsolution check cannot do without.
const GEOMETRY_KEYS: [&str; 6] = ["n", "N", "k", "l", "a", "psi"];

const SCALAR_KEYS: [&str; 19] = [
    "n",
    "N",
    "k",
    "l",
    "a",
    "toy",
    "psi",
    "psi_shift",
    "subsolution",
    "cfl",
    "stop_osc",
    "t_max",
    "max_steps",
    "snapshot_every",
    "out",
    "seed",
    "samples",
    "max_n",
    "inject_fault",
];

const TABLES: [&str; 4] = ["rho", "psi_mode", "ubar", "ustar"];

struct RawRow {
    line: usize,
    table: String,
    tokens: Vec<String>,
}

/// Parsed text before cross-field validation.
#[derive(Debug)]
pub struct Parsed {
    config: RunConfig,
    seen: HashMap<String, usize>,
}

impl Parsed {
    #[cfg(test)]
    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Errors unless every geometry key was given explicitly.
    pub fn require_geometry(&self) -> Result<&RunConfig, ConfigError> {
        for key in GEOMETRY_KEYS {
            if !self.seen.contains_key(key) {
                return Err(ConfigError::global(format!("missing required key `{key}`")));
            }
        }
        Ok(&self.config)
    }

    pub fn into_config(self) -> RunConfig {
        self.config
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::at(line, format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError::at(line, format!("invalid boolean `{value}` for `{key}`"))),
    }
}

fn parse_psi(line: usize, value: &str) -> Result<PsiSpec, ConfigError> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    match parts.as_slice() {
        ["constant", v] => Ok(PsiSpec::Constant(parse_value(line, "psi", v)?)),
        ["invariant"] => Ok(PsiSpec::Invariant),
        ["manufactured"] => Ok(PsiSpec::Manufactured),
        ["fourier", base] => Ok(PsiSpec::Fourier(parse_value(line, "psi", base)?)),
        _ => Err(ConfigError::at(
            line,
            format!("`psi` must be `constant <v>`, `invariant`, `manufactured` or `fourier <base>`, got `{value}`"),
        )),
    }
}

/// Parses the text without checking that required keys are present.
pub fn parse_str(text: &str) -> Result<Parsed, ConfigError> {
    let mut config = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some((key, value)) = content.split_once('=') {
            let (key, value) = (key.trim(), value.trim());
            if !SCALAR_KEYS.contains(&key) {
                return Err(ConfigError::at(line, format!("unknown key `{key}`")));
            }
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(ConfigError::at(line, format!("duplicate key `{key}` (first set on line {first})")));
            }
            match key {
                "n" => config.n = parse_value(line, key, value)?,
                "N" => config.points = parse_value(line, key, value)?,
                "k" => config.k = parse_value(line, key, value)?,
                "l" => config.l = parse_value(line, key, value)?,
                "a" => config.a = parse_value(line, key, value)?,
                "toy" => config.toy = parse_bool(line, key, value)?,
                "psi" => config.psi = parse_psi(line, value)?,
                "psi_shift" => config.psi_shift = parse_value(line, key, value)?,
                "subsolution" => {
                    config.subsolution = match value {
                        "none" => SubsolutionSpec::None,
                        "zero" => SubsolutionSpec::Zero,
                        "modes" => SubsolutionSpec::Modes,
                        _ => return Err(ConfigError::at(line, format!("`subsolution` must be none, zero or modes, got `{value}`"))),
                    }
                }
                "cfl" => config.cfl = parse_value(line, key, value)?,
                "stop_osc" => config.stop_osc = parse_value(line, key, value)?,
                "t_max" => config.t_max = parse_value(line, key, value)?,
                "max_steps" => config.max_steps = parse_value(line, key, value)?,
                "snapshot_every" => config.snapshot_every = parse_value(line, key, value)?,
                "out" => config.out = Some(PathBuf::from(value)),
                "seed" => config.seed = parse_value(line, key, value)?,
                "samples" => config.samples = parse_value(line, key, value)?,
                "max_n" => config.max_n = parse_value(line, key, value)?,
                "inject_fault" => config.inject_fault = parse_bool(line, key, value)?,
                _ => unreachable!("key list and match arms agree"),
            }
            continue;
        }
        let mut tokens = content.split_whitespace();
        let table = tokens.next().unwrap_or_default();
        if !TABLES.contains(&table) {
            return Err(ConfigError::at(line, format!("expected `key = value` or a mode row, got `{content}`")));
        }
        rows.push(RawRow { line, table: table.to_string(), tokens: tokens.map(str::to_string).collect() });
    }
    for row in rows {
        let mode = parse_mode(&row, config.n)?;
        match row.table.as_str() {
            "rho" => config.rho.push(mode),
            "psi_mode" => config.psi_modes.push(mode),
            "ubar" => config.ubar.push(mode),
            _ => config.ustar.push(mode),
        }
    }
    let parsed = Parsed { config, seen };
    validate(&parsed)?;
    Ok(parsed)
}

fn parse_mode(row: &RawRow, n: usize) -> Result<FourierMode, ConfigError> {
    let dims = 2 * n;
    let t = &row.tokens;
    if t.len() != dims + 1 && t.len() != dims + 2 {
        return Err(ConfigError::at(
            row.line,
            format!("`{}` row needs {dims} frequencies, an amplitude and optionally cos|sin", row.table),
        ));
    }
    let freq = t[..dims]
        .iter()
        .map(|v| parse_value::<i32>(row.line, &row.table, v))
        .collect::<Result<Vec<_>, _>>()?;
    let amplitude: f64 = parse_value(row.line, &row.table, &t[dims])?;
    if !amplitude.is_finite() {
        return Err(ConfigError::at(row.line, "amplitude must be finite"));
    }
    let kind = match t.get(dims + 1).map(String::as_str) {
        None | Some("cos") => ModeKind::Cos,
        Some("sin") => ModeKind::Sin,
        Some(other) => return Err(ConfigError::at(row.line, format!("mode kind must be cos or sin, got `{other}`"))),
    };
    Ok(FourierMode::new(freq, amplitude, kind))
}

fn line_of(parsed: &Parsed, key: &str) -> Option<usize> {
    parsed.seen.get(key).copied()
}

fn invalid(parsed: &Parsed, key: &str, message: String) -> ConfigError {
    ConfigError { line: line_of(parsed, key), message: format!("`{key}`: {message}") }
}

/// Cross-field checks; nothing grid-sized has been allocated yet.
fn validate(parsed: &Parsed) -> Result<(), ConfigError> {
    let c = &parsed.config;
    if !(2..=3).contains(&c.n) {
        return Err(invalid(parsed, "n", format!("grid dimension must be 2 or 3, got {}", c.n)));
    }
    if c.points < 8 || c.points % 2 != 0 {
        return Err(invalid(parsed, "N", format!("points per axis must be even and at least 8, got {}", c.points)));
    }
    let dims = if c.toy { 2 } else { 2 * c.n };
    let too_big = (c.points as u128).checked_pow(dims as u32).map_or(true, |len| len > 1 << 28);
    if too_big {
        return Err(invalid(parsed, "N", format!("{}^{dims} grid points exceed the 2^28 limit", c.points)));
    }
    if c.k == 0 || c.k > c.n {
        return Err(invalid(parsed, "k", format!("need 1 <= k <= n = {}, got {}", c.n, c.k)));
    }
    if c.l >= c.k {
        return Err(invalid(parsed, "l", format!("need l < k = {}, got {}", c.k, c.l)));
    }
    if !(c.a > 0.0 && c.a.is_finite()) {
        return Err(invalid(parsed, "a", format!("chi scale must be positive, got {}", c.a)));
    }
    if !(c.cfl > 0.0 && c.cfl <= 1.0) {
        return Err(invalid(parsed, "cfl", format!("must lie in (0, 1], got {}", c.cfl)));
    }
    if !(c.stop_osc > 0.0) {
        return Err(invalid(parsed, "stop_osc", format!("must be positive, got {}", c.stop_osc)));
    }
    if !(c.t_max > 0.0) {
        return Err(invalid(parsed, "t_max", format!("must be positive, got {}", c.t_max)));
    }
    if c.snapshot_every == 0 {
        return Err(invalid(parsed, "snapshot_every", "must be at least 1".into()));
    }
    if !c.psi_shift.is_finite() {
        return Err(invalid(parsed, "psi_shift", "must be finite".into()));
    }
    match c.psi {
        PsiSpec::Constant(v) if !(v > 0.0 && v.is_finite()) => {
            return Err(invalid(parsed, "psi", format!("constant must be positive, got {v}")));
        }
        PsiSpec::Fourier(base) => {
            let worst = base - c.psi_modes.iter().map(|m| m.amplitude.abs()).sum::<f64>();
            if !(worst > 0.0) {
                return Err(invalid(parsed, "psi", format!("base {base} does not keep psi positive against the psi_mode rows")));
            }
        }
        _ => {}
    }
    if c.psi != PsiSpec::Manufactured && !c.ustar.is_empty() {
        return Err(invalid(parsed, "psi", "ustar rows are only used with `psi = manufactured`".into()));
    }
    if !matches!(c.psi, PsiSpec::Fourier(_)) && !c.psi_modes.is_empty() {
        return Err(invalid(parsed, "psi", "psi_mode rows are only used with `psi = fourier <base>`".into()));
    }
    match c.subsolution {
        SubsolutionSpec::Modes if c.ubar.is_empty() => {
            return Err(invalid(parsed, "subsolution", "`modes` needs at least one ubar row".into()));
        }
        SubsolutionSpec::None | SubsolutionSpec::Zero if !c.ubar.is_empty() => {
            return Err(invalid(parsed, "subsolution", "ubar rows need `subsolution = modes`".into()));
        }
        _ => {}
    }
    if c.toy {
        for (table, modes) in [("rho", &c.rho), ("psi_mode", &c.psi_modes), ("ubar", &c.ubar), ("ustar", &c.ustar)] {
            if modes.iter().any(|m| m.freq[2..].iter().any(|&f| f != 0)) {
                return Err(invalid(parsed, "toy", format!("{table} rows may only vary along x1 and y1 in toy mode")));
            }
        }
    }
    if !(2..=qflow_core::selftest::MAX_SELFTEST_DIM).contains(&c.max_n) {
        return Err(invalid(
            parsed,
            "max_n",
            format!("oracles support 2..={} dimensions, got {}", qflow_core::selftest::MAX_SELFTEST_DIM, c.max_n),
        ));
    }
    if c.samples == 0 {
        return Err(invalid(parsed, "samples", "must be positive".into()));
    }
    Ok(())
}

pub fn parse_config(path: &Path) -> Result<Parsed, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::global(format!("{}: {e}", path.display())))?;
    parse_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "n = 2\nN = 16\nk = 2\nl = 1\na = 2\npsi = constant 2\n";

    #[test]
    fn minimal_round_trip() {
        let parsed = parse_str(MINIMAL).unwrap();
        let c = parsed.require_geometry().unwrap();
        assert_eq!((c.n, c.points, c.k, c.l, c.a), (2, 16, 2, 1, 2.0));
        assert_eq!(c.psi, PsiSpec::Constant(2.0));
        assert_eq!(c.cfl, 0.2);
    }

    #[test]
    fn k_too_large_names_k() {
        let err = parse_str(&MINIMAL.replace("k = 2", "k = 3")).unwrap_err();
        assert!(err.message.contains("`k`"), "{err}");
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn duplicate_key_has_line() {
        let err = parse_str(&format!("{MINIMAL}a = 3\n")).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert!(err.to_string().starts_with("line 7: duplicate key `a`"));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_str(&format!("{MINIMAL}stop_os = 1e-9\n")).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert!(err.message.contains("unknown key"));
    }

    #[test]
    fn mode_rows() {
        let text = format!("{MINIMAL}# wiggle\nrho 1 0 0 1 0.05 sin\nrho 2 0 0 0 0.01\n");
        let parsed = parse_str(&text).unwrap();
        let rho = &parsed.config().rho;
        assert_eq!(rho.len(), 2);
        assert_eq!(rho[0].freq, vec![1, 0, 0, 1]);
        assert_eq!(rho[0].kind, ModeKind::Sin);
        assert_eq!(rho[1].kind, ModeKind::Cos);
        let err = parse_str(&format!("{MINIMAL}rho 1 0 0.05\n")).unwrap_err();
        assert_eq!(err.line, Some(7));
        let err = parse_str(&format!("{MINIMAL}rho 1 0 0 0 0.05 tan\n")).unwrap_err();
        assert!(err.message.contains("cos or sin"));
    }

    #[test]
    fn mode_rows_before_n() {
        let text = "rho 1 0 0 0 0 0 0.01\nn = 3\nN = 8\nk = 2\nl = 0\na = 1\npsi = invariant\ntoy = true\n";
        assert_eq!(parse_str(text).unwrap().config().rho[0].freq.len(), 6);
    }

    #[test]
    fn missing_geometry_keys() {
        let parsed = parse_str("samples = 10\n").unwrap();
        assert!(parsed.require_geometry().unwrap_err().message.contains("missing required key `n`"));
    }

    #[test]
    fn cross_field_checks() {
        assert!(parse_str("max_n = 7\n").unwrap_err().message.contains("max_n"));
        assert!(parse_str(&MINIMAL.replace("constant 2", "constant -1")).is_err());
        assert!(parse_str(&(MINIMAL.replace("constant 2", "fourier 1") + "psi_mode 1 0 0 0 1.5\n")).is_err());
        assert!(parse_str(&format!("{MINIMAL}ustar 1 0 0 0 0.1\n")).is_err());
        assert!(parse_str(&format!("{MINIMAL}subsolution = modes\n")).is_err());
        assert!(parse_str(&format!("{MINIMAL}toy = true\nrho 0 0 1 0 0.01\n")).unwrap_err().message.contains("toy"));
        assert!(parse_str(&MINIMAL.replace("N = 16", "N = 15")).is_err());
        assert!(parse_str(&MINIMAL.replace("N = 16", "N = 256")).is_err());
        assert!(parse_str(&format!("{MINIMAL}cfl = 0\n")).is_err());
        assert!(parse_str(&format!("{MINIMAL}toy = maybe\n")).is_err());
    }
}
