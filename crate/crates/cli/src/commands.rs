use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use qflow_core::field::{write_snapshot, ChiSpec, Grid, ScalarField, TorusGeometry};
use qflow_core::flow::{self, write_series_csv, FlowConfig, FlowReport, RunStatus};
use qflow_core::selftest::{run_battery, SelftestConfig};
use qflow_core::{functionals, subsolution, QuotientLevels};

use crate::config::{PsiSpec, RunConfig, SubsolutionSpec};

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The command ran but a monitored property failed.
    Failed,
}

pub type CmdResult = Result<Outcome, String>;

fn core_err(e: qflow_core::Error) -> String {
    e.to_string()
}

pub struct Setup {
    pub geometry: TorusGeometry,
    pub levels: QuotientLevels,
    pub psi: ScalarField,
    pub c: f64,
}

pub fn build(config: &RunConfig) -> Result<Setup, String> {
    let grid = Grid::new(config.n, config.points, config.toy).map_err(core_err)?;
    let levels = QuotientLevels::new(config.k, config.l).map_err(core_err)?;
    let chi = ChiSpec { scale: config.a, rho: config.rho_poly() };
    let geometry = TorusGeometry::new(grid, chi, config.k).map_err(|e| format!("chi is not admissible: {e}"))?;
    let c = functionals::constant_c(&geometry, levels).map_err(core_err)?;
    let base = match &config.psi {
        PsiSpec::Constant(v) => ScalarField::constant(grid, *v),
        PsiSpec::Invariant => ScalarField::constant(grid, c),
        PsiSpec::Manufactured => flow::manufactured_psi(&geometry, &config.ustar_poly(), levels).map_err(core_err)?,
        PsiSpec::Fourier(b) => {
            let poly = config.psi_poly();
            poly.check_grid(&grid).map_err(core_err)?;
            ScalarField::from_fn(grid, |x| b + poly.value(x))
        }
    };
    let scale = config.psi_shift.exp();
    Ok(Setup { geometry, levels, psi: base.map(|v| v * scale), c })
}

fn subsolution_field(config: &RunConfig, grid: Grid) -> Result<Option<ScalarField>, String> {
    Ok(match config.subsolution {
        SubsolutionSpec::None => None,
        SubsolutionSpec::Zero => Some(ScalarField::zeros(grid)),
        SubsolutionSpec::Modes => {
            let poly = config.ubar_poly();
            poly.check_grid(&grid).map_err(core_err)?;
            Some(ScalarField::from_fn(grid, |x| poly.value(x)))
        }
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:e}"))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "held"
    } else {
        "violated"
    }
}

/// `key = value` lines describing a finished run; the second value says
/// whether every monitored property held.
pub fn summary(config: &RunConfig, setup: &Setup, report: &FlowReport) -> (String, bool) {
    let mp = report.max_principle_violations();
    let psi_dominates = setup.psi.min() >= setup.c;
    let jv = report.j_monotonicity_violations(1e-8);
    let j_ok = !psi_dominates || jv == 0;
    let theta_ok = report.theta_min().is_none_or(|t| t > 0.0);
    let converged = report.status == RunStatus::Converged;
    let ok = converged && mp == 0 && j_ok && report.b_consistent && theta_ok;

    let mut s = String::new();
    let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a string");
    kv("status", report.status.to_string());
    kv("steps", report.steps().to_string());
    kv("t", format!("{:e}", report.final_time()));
    kv("b", format!("{:e}", report.final_b));
    kv("b_integral", format!("{:e}", report.b_integral));
    kv("b_consistent", report.b_consistent.to_string());
    kv("c", format!("{:e}", setup.c));
    kv("decay_rate", opt(report.decay_rate));
    kv("decay_r_squared", opt(report.decay_r_squared));
    kv("residual_inf", format!("{:e}", report.residual_inf));
    kv("max_principle", verdict(mp == 0).to_string());
    kv("max_principle_violations", mp.to_string());
    kv("j_monotonicity", if psi_dominates { verdict(jv == 0) } else { "not_applicable" }.to_string());
    kv("j_monotonicity_violations", jv.to_string());
    kv("cone_retries", report.cone_retries.to_string());
    kv("theta_min", opt(report.theta_min()));
    kv("seed", config.seed.to_string());
    if let Some(f) = &report.failure {
        kv("failure", f.clone());
    }
    kv("invariants", verdict(ok).to_string());
    (s, ok)
}

pub fn cmd_flow(config: &RunConfig, out: &Path) -> CmdResult {
    let setup = build(config)?;
    let mut flow_config = FlowConfig::new(setup.levels, setup.psi.clone()).map_err(core_err)?;
    flow_config.cfl = config.cfl;
    flow_config.stop_osc = config.stop_osc;
    flow_config.t_max = config.t_max;
    flow_config.max_steps = config.max_steps;
    flow_config.snapshot_every = config.snapshot_every;
    if let Some(u_bar) = subsolution_field(config, setup.geometry.grid())? {
        flow_config = flow_config.with_subsolution(u_bar).map_err(core_err)?;
    }
    let report = flow::run(&flow_config, &setup.geometry).map_err(core_err)?;

    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    let io = |e: std::io::Error| e.to_string();
    let csv = File::create(out.join("series.csv")).map_err(io)?;
    write_series_csv(BufWriter::new(csv), &report.series, config.snapshot_every).map_err(core_err)?;
    let snap = File::create(out.join("u_hat.qf1")).map_err(io)?;
    let mut snap = BufWriter::new(snap);
    write_snapshot(&mut snap, "u_hat", &report.final_u_hat).map_err(core_err)?;
    snap.flush().map_err(io)?;
    let (text, ok) = summary(config, &setup, &report);
    fs::write(out.join("summary.txt"), &text).map_err(io)?;
    print!("{text}");
    Ok(if ok { Outcome::Success } else { Outcome::Failed })
}

pub fn cmd_check_sub(config: &RunConfig) -> CmdResult {
    let setup = build(config)?;
    let u_bar = match subsolution_field(config, setup.geometry.grid())? {
        Some(u) => u,
        None if config.l == 0 => ScalarField::zeros(setup.geometry.grid()),
        None => return Err("`subsolution` is required when l >= 1 (use `zero` or `modes`)".into()),
    };
    let report = subsolution::check_subsolution(&u_bar, &setup.geometry, setup.levels, &setup.psi).map_err(core_err)?;
    println!("{{");
    println!("  \"min_margin\": {:e},", report.min_margin);
    println!("  \"theta_min\": {:e},", report.theta_min);
    println!("  \"lambda_gap\": {:e},", report.lambda_gap);
    println!("  \"failures\": {},", report.failures);
    println!("  \"points\": {}", report.pointwise_ok.len());
    println!("}}");
    Ok(if report.ok() { Outcome::Success } else { Outcome::Failed })
}

pub fn cmd_selftest(config: &RunConfig) -> CmdResult {
    let st = SelftestConfig { seed: config.seed, samples: config.samples, max_n: config.max_n, inject_fault: config.inject_fault };
    let results = run_battery(&st).map_err(core_err)?;
    let mut ok = true;
    for r in &results {
        println!(
            "{:<22} samples {:>6}  max deviation {:>10.3e}  bound {:>9.1e}  {}",
            r.name,
            r.samples,
            r.max_deviation,
            r.bound,
            if r.passed() { "ok" } else { "FAIL" }
        );
        ok &= r.passed();
    }
    Ok(if ok { Outcome::Success } else { Outcome::Failed })
}
