//! Explicit time integration of
//! `∂u/∂t = log(χ_u^k ∧ ω^{n-k} / χ_u^l ∧ ω^{n-l}) - log ψ`, written locally as
//! `∂u/∂t = log(S_k/S_l) - log Ψ` with `Ψ = C(n,k)/C(n,l)·ψ`.

mod report;

pub use report::{decay_fit, estimate_decay_rate, write_series_csv, DecayFit, FlowReport, RunStatus, SeriesRecord, ThetaSample, CSV_HEADER};

use crate::error::{Error, Result};
use crate::field::{self, chi_u, map_points, oscillation, FormField, ScalarField, TorusGeometry, TrigPoly};
use crate::functionals;
use crate::hermitian;
use crate::subsolution;
use crate::symfun::{self, QuotientLevels};

/// Retries with a halved step before a cone exit becomes fatal.
pub const MAX_HALVINGS: usize = 20;

#[derive(Clone, Debug)]
pub struct FlowConfig {
    levels: QuotientLevels,
    psi: ScalarField,
    log_psi_cap: ScalarField,
    pub cfl: f64,
    pub stop_osc: f64,
    pub t_max: f64,
    pub max_steps: usize,
    /// Sampling period (in steps) for the dichotomy diagnostic and CSV rows.
    pub snapshot_every: usize,
    subsolution: Option<ScalarField>,
}

impl FlowConfig {
    pub fn new(levels: QuotientLevels, psi: ScalarField) -> Result<Self> {
        let n = psi.grid().n();
        levels.check_dim(n)?;
        if let Some(bad) = psi.values().iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!("psi must be positive and finite, found {bad}")));
        }
        let shift = (symfun::binomial(n, levels.k()) / symfun::binomial(n, levels.l())).ln();
        let log_psi_cap = psi.map(|v| v.ln() + shift);
        Ok(FlowConfig {
            levels,
            psi,
            log_psi_cap,
            cfl: 0.2,
            stop_osc: 1e-8,
            t_max: 50.0,
            max_steps: 1_000_000,
            snapshot_every: 1,
            subsolution: None,
        })
    }

    pub fn with_subsolution(mut self, u_bar: ScalarField) -> Result<Self> {
        if u_bar.grid() != self.psi.grid() {
            return Err(Error::GeometryMismatch("subsolution and psi grids differ".into()));
        }
        self.subsolution = Some(u_bar);
        Ok(self)
    }

    pub fn levels(&self) -> QuotientLevels {
        self.levels
    }

    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    /// `log Ψ = log ψ + log(C(n,k)/C(n,l))`.
    pub fn log_psi_cap(&self) -> &ScalarField {
        &self.log_psi_cap
    }

    pub fn subsolution(&self) -> Option<&ScalarField> {
        self.subsolution.as_ref()
    }

    pub fn validate(&self, geometry: &TorusGeometry) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::domain(format!("cfl={} must lie in (0, 1]", self.cfl)));
        }
        if !(self.stop_osc > 0.0) {
            return Err(Error::domain("stop_osc must be positive"));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::domain("t_max must be positive"));
        }
        if self.snapshot_every == 0 {
            return Err(Error::domain("snapshot_every must be at least 1"));
        }
        if self.psi.grid() != geometry.grid() {
            return Err(Error::GeometryMismatch("psi and geometry grids differ".into()));
        }
        Ok(())
    }
}

/// Pointwise data from one sweep over `χ_u`.
#[derive(Clone, Debug)]
pub(crate) struct Evaluation {
    pub rhs: ScalarField,
    pub max_gradient_trace: f64,
    pub density_k: ScalarField,
    pub density_l: ScalarField,
}

pub(crate) fn evaluate(geometry: &TorusGeometry, config: &FlowConfig, u: &ScalarField) -> Result<Evaluation> {
    let form = chi_u(geometry, u)?;
    evaluate_form(geometry, config, &form)
}

fn evaluate_form(geometry: &TorusGeometry, config: &FlowConfig, form: &FormField) -> Result<Evaluation> {
    let grid = geometry.grid();
    let n = grid.n();
    let levels = config.levels;
    let metric = *geometry.metric();
    let norm_k = symfun::binomial(n, levels.k());
    let norm_l = symfun::binomial(n, levels.l());
    let log_cap = config.log_psi_cap.values();
    let points: Result<Vec<[f64; 4]>> = map_points(grid.len(), |i| {
        let lambda = hermitian::eigen_wrt_metric(&form.at(i), &metric)?;
        let t = symfun::quotient_terms(&lambda, levels).map_err(|e| e.at_point(grid.coords(i)))?;
        Ok([t.f - log_cap[i], t.gradient_trace, t.s_k / norm_k, t.s_l / norm_l])
    })
    .into_iter()
    .collect();
    let points = points?;
    let column = |c: usize| ScalarField::from_raw(grid, points.iter().map(|p| p[c]).collect());
    let max_gradient_trace = points.iter().map(|p| p[1]).fold(0.0, f64::max);
    Ok(Evaluation { rhs: column(0), max_gradient_trace, density_k: column(2), density_l: column(3) })
}

/// `F(λ(χ_u)) - log Ψ` at every grid point.
pub fn rhs(geometry: &TorusGeometry, config: &FlowConfig, u: &ScalarField) -> Result<ScalarField> {
    Ok(evaluate(geometry, config, u)?.rhs)
}

/// State of the flow after `step_index` accepted steps.
#[derive(Clone, Debug)]
pub struct FlowState {
    pub u: ScalarField,
    pub t: f64,
    /// Right-hand side at `u`, i.e. `∂_t u`.
    pub dtu: ScalarField,
    pub step_index: usize,
    /// Step size of the step that produced this state (0 initially).
    pub last_dt: f64,
    /// Halvings needed by that step.
    pub halvings: usize,
    max_gradient_trace: f64,
    density_k: ScalarField,
    density_l: ScalarField,
}

impl FlowState {
    /// `u ≡ 0` at `t = 0`.
    pub fn initial(geometry: &TorusGeometry, config: &FlowConfig) -> Result<Self> {
        let u = ScalarField::zeros(geometry.grid());
        let eval = evaluate(geometry, config, &u)?;
        Ok(Self::from_eval(u, 0.0, 0, 0.0, 0, eval))
    }

    fn from_eval(u: ScalarField, t: f64, step_index: usize, last_dt: f64, halvings: usize, eval: Evaluation) -> Self {
        FlowState {
            u,
            t,
            dtu: eval.rhs,
            step_index,
            last_dt,
            halvings,
            max_gradient_trace: eval.max_gradient_trace,
            density_k: eval.density_k,
            density_l: eval.density_l,
        }
    }

    pub fn max_gradient_trace(&self) -> f64 {
        self.max_gradient_trace
    }

    /// `max |χ_u^k∧ω^{n-k} - e^b ψ χ_u^l∧ω^{n-l}| / ωⁿ` over the grid.
    pub fn residual_inf(&self, psi: &ScalarField, b: f64) -> f64 {
        let scale = b.exp();
        self.density_k
            .values()
            .iter()
            .zip(self.density_l.values())
            .zip(psi.values())
            .map(|((dk, dl), p)| (dk - scale * p * dl).abs())
            .fold(0.0, f64::max)
    }
}

/// `cfl·h² / (4·max_grid Σ_i F^{iī})`, the explicit stability bound for the
/// frozen-coefficient linearization `∂_t v = Σ F^{iī} v_{iī}`.
pub fn stable_dt(geometry: &TorusGeometry, state: &FlowState, config: &FlowConfig) -> f64 {
    let h = geometry.grid().spacing();
    config.cfl * h * h / (4.0 * state.max_gradient_trace)
}

/// One Heun (explicit trapezoid) step. A stage leaving `Γ^k` halves `dt`
/// and retries, up to [`MAX_HALVINGS`] times.
pub fn step(geometry: &TorusGeometry, state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let mut dt = stable_dt(geometry, state, config);
    let mut last_violation = None;
    for halvings in 0..=MAX_HALVINGS {
        let stage = state.u.add_scaled(&state.dtu, dt)?;
        if !stage.is_finite() {
            return Err(Error::NumericalBlowUp { step: state.step_index + 1 });
        }
        let predictor = match evaluate(geometry, config, &stage) {
            Ok(e) => e,
            Err(e @ Error::ConeViolation { .. }) => {
                last_violation = Some(e);
                dt *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        let slope = state.dtu.add_scaled(&predictor.rhs, 1.0)?;
        let u = state.u.add_scaled(&slope, 0.5 * dt)?;
        if !u.is_finite() {
            return Err(Error::NumericalBlowUp { step: state.step_index + 1 });
        }
        match evaluate(geometry, config, &u) {
            Ok(eval) => {
                if !eval.rhs.is_finite() {
                    return Err(Error::NumericalBlowUp { step: state.step_index + 1 });
                }
                return Ok(FlowState::from_eval(u, state.t + dt, state.step_index + 1, dt, halvings, eval));
            }
            Err(e @ Error::ConeViolation { .. }) => {
                last_violation = Some(e);
                dt *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_violation.unwrap_or(Error::ConeViolation { level: config.levels.k(), point: None }))
}

fn record(geometry: &TorusGeometry, config: &FlowConfig, state: &FlowState) -> Result<SeriesRecord> {
    let b = state.dtu.mean();
    let j = functionals::j_functional(&state.u, geometry, config.levels.l())?;
    Ok(SeriesRecord {
        step: state.step_index,
        t: state.t,
        dt: state.last_dt,
        min_dtu: state.dtu.min(),
        max_dtu: state.dtu.max(),
        osc_dtu: oscillation(&state.dtu),
        j_l: j.value,
        residual_inf: state.residual_inf(&config.psi, b),
        b_estimate: b,
    })
}

/// Integrates from `u ≡ 0` until `osc(∂_t u) < stop_osc`, the time or step
/// budget runs out, or a step fails. Monitors are recorded after every step.
pub fn run(config: &FlowConfig, geometry: &TorusGeometry) -> Result<FlowReport> {
    config.validate(geometry)?;
    let chi_sub = match config.subsolution() {
        Some(u_bar) => Some(chi_u(geometry, u_bar)?),
        None => None,
    };
    let mut state = FlowState::initial(geometry, config)?;
    let mut series = vec![record(geometry, config, &state)?];
    let mut theta_samples = Vec::new();
    let mut cone_retries = 0;
    let mut failure = None;
    let status = loop {
        if let Some(sub) = &chi_sub {
            if state.step_index % config.snapshot_every == 0 {
                let theta = subsolution::theta_min_over_grid(geometry, config.levels, &state.u, &state.dtu, sub)?;
                theta_samples.push(ThetaSample { step: state.step_index, t: state.t, theta_min: theta });
            }
        }
        if oscillation(&state.dtu) < config.stop_osc {
            break RunStatus::Converged;
        }
        if state.step_index >= config.max_steps || state.t >= config.t_max {
            break RunStatus::MaxSteps;
        }
        match step(geometry, &state, config) {
            Ok(next) => {
                cone_retries += next.halvings;
                state = next;
                series.push(record(geometry, config, &state)?);
            }
            Err(e @ Error::ConeViolation { .. }) => {
                failure = Some(e.to_string());
                break RunStatus::ConeExit;
            }
            Err(e @ Error::NumericalBlowUp { .. }) => {
                failure = Some(e.to_string());
                break RunStatus::BlowUp;
            }
            Err(e) => return Err(e),
        }
    };

    let l = config.levels.l();
    let final_u_hat = functionals::normalize(&state.u, geometry, l)?;
    let b = functionals::b_estimates(&final_u_hat, geometry, config)?;
    let fit = decay_fit(&series).ok();
    let residual_inf = state.residual_inf(&config.psi, b.pointwise);
    Ok(FlowReport {
        series,
        status,
        failure,
        final_u: state.u,
        final_u_hat,
        final_b: b.pointwise,
        b_integral: b.integral,
        b_consistent: b.consistent(),
        residual_inf,
        decay_rate: fit.map(|f| f.rate),
        decay_r_squared: fit.map(|f| f.r_squared),
        cone_retries,
        theta_samples,
        spacing: geometry.grid().spacing(),
    })
}

/// `ψ* = (χ_{u*}^k ∧ ω^{n-k}) / (χ_{u*}^l ∧ ω^{n-l})` with `∂∂̄u*` evaluated
/// analytically, so that `u*` solves the elliptic problem with `b = 0` up to
/// discretization error.
pub fn manufactured_psi(geometry: &TorusGeometry, u_star: &TrigPoly, levels: QuotientLevels) -> Result<ScalarField> {
    let grid = geometry.grid();
    u_star.check_grid(&grid)?;
    levels.check_dim(grid.n())?;
    let n = grid.n();
    let metric = *geometry.metric();
    let values: Result<Vec<f64>> = map_points(grid.len(), |i| {
        let x = grid.position(i);
        let form = geometry.chi().at(i).add_scaled(&u_star.complex_hessian(n, &x), 1.0);
        let lambda = hermitian::eigen_wrt_metric(&form, &metric)?;
        symfun::require_cone(&lambda, levels.k()).map_err(|e| e.at_point(grid.coords(i)))?;
        let dk = symfun::elementary_sym(&lambda, levels.k())? / symfun::binomial(n, levels.k());
        let dl = symfun::elementary_sym(&lambda, levels.l())? / symfun::binomial(n, levels.l());
        Ok(dk / dl)
    })
    .into_iter()
    .collect();
    ScalarField::from_values(grid, values?)
}

/// Samples `u*` on the grid.
pub fn sample(grid: field::Grid, poly: &TrigPoly) -> ScalarField {
    ScalarField::from_fn(grid, |x| poly.value(x))
}
