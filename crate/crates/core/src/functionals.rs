//! The invariant `c`, the `J_l` functional, the normalization `û` and the
//! limit constant `b`.

use crate::error::{Error, Result};
use crate::field::{self, chi_u, integrate, oscillation, ScalarField, TorusGeometry};
use crate::flow::{self, FlowConfig};
use crate::symfun::QuotientLevels;

/// `J_l(u)` together with the volume `∫ χ^l ∧ ω^{n-l}` used to normalize by it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalValue {
    pub value: f64,
    pub l: usize,
    pub normalization_volume: f64,
}

/// `∫ χ^m ∧ ω^{n-m}`.
pub fn class_volume(geometry: &TorusGeometry, m: usize) -> Result<f64> {
    let density = geometry.wedge_density(geometry.chi(), m)?;
    integrate(&geometry.ones(), &density)
}

/// `c = ∫ χ^k ∧ ω^{n-k} / ∫ χ^l ∧ ω^{n-l}`.
pub fn constant_c(geometry: &TorusGeometry, levels: QuotientLevels) -> Result<f64> {
    Ok(class_volume(geometry, levels.k())? / class_volume(geometry, levels.l())?)
}

/// `J_l(u) = 1/(l+1) Σ_{i=0}^{l} ∫ u χ_u^i ∧ χ^{l-i} ∧ ω^{n-l}`, the value of
/// the defining path integral along the straight line `s ↦ s·u`.
pub fn j_functional(u: &ScalarField, geometry: &TorusGeometry, l: usize) -> Result<FunctionalValue> {
    let n = geometry.grid().n();
    if l > n {
        return Err(Error::domain(format!("l={l} exceeds n={n}")));
    }
    let normalization_volume = class_volume(geometry, l)?;
    if l == 0 {
        let value = integrate(u, &geometry.ones())?;
        return Ok(FunctionalValue { value, l, normalization_volume });
    }
    let deformed = chi_u(geometry, u)?;
    let mut total = 0.0;
    for i in 0..=l {
        let density = geometry.mixed_density_field(&deformed, geometry.chi(), i, l - i)?;
        total += integrate(u, &density)?;
    }
    Ok(FunctionalValue { value: total / (l + 1) as f64, l, normalization_volume })
}

/// `û = u - J_l(u) / ∫ χ^l ∧ ω^{n-l}`.
pub fn normalize(u: &ScalarField, geometry: &TorusGeometry, l: usize) -> Result<ScalarField> {
    let j = j_functional(u, geometry, l)?;
    Ok(u.shifted(-j.value / j.normalization_volume))
}

/// Both estimates of `b` for a near-stationary `û`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BEstimates {
    /// Grid mean of `F(χ_û) - log Ψ`.
    pub pointwise: f64,
    /// `log(∫ χ_û^k ∧ ω^{n-k} / ∫ ψ χ_û^l ∧ ω^{n-l})`.
    pub integral: f64,
    /// Oscillation of `F(χ_û) - log Ψ`.
    pub rhs_oscillation: f64,
    /// Agreement bound `5·osc + h²`.
    pub tolerance: f64,
}

impl BEstimates {
    pub fn consistent(&self) -> bool {
        (self.pointwise - self.integral).abs() <= self.tolerance
    }
}

pub fn b_estimates(u_hat: &ScalarField, geometry: &TorusGeometry, config: &FlowConfig) -> Result<BEstimates> {
    let rhs = flow::rhs(geometry, config, u_hat)?;
    let form = chi_u(geometry, u_hat)?;
    let levels = config.levels();
    let top = integrate(&geometry.ones(), &geometry.wedge_density(&form, levels.k())?)?;
    let bottom = integrate(config.psi(), &geometry.wedge_density(&form, levels.l())?)?;
    let osc = oscillation(&rhs);
    let h = geometry.grid().spacing();
    Ok(BEstimates { pointwise: rhs.mean(), integral: (top / bottom).ln(), rhs_oscillation: osc, tolerance: 5.0 * osc + h * h })
}

/// The constant `b` with `χ_û^k ∧ ω^{n-k} = e^b ψ χ_û^l ∧ ω^{n-l}`, from the
/// pointwise mean, cross-checked against the integral form.
pub fn estimate_b(u_hat: &ScalarField, geometry: &TorusGeometry, config: &FlowConfig) -> Result<f64> {
    let est = b_estimates(u_hat, geometry, config)?;
    if est.rhs_oscillation >= 1e-4 {
        return Err(Error::Estimation(format!(
            "state is not near-stationary: rhs oscillation {:e}",
            est.rhs_oscillation
        )));
    }
    if !est.consistent() {
        return Err(Error::Consistency { pointwise: est.pointwise, integral: est.integral, tolerance: est.tolerance });
    }
    Ok(est.pointwise)
}

/// Whether `ψ >= c` holds at every grid point.
pub fn psi_dominates_c(geometry: &TorusGeometry, config: &FlowConfig) -> Result<bool> {
    let c = constant_c(geometry, config.levels())?;
    Ok(config.psi().min() >= c)
}

/// `max |∫ χ_u^i ∧ χ^{l-i} ∧ ω^{n-l} - ∫ χ^l ∧ ω^{n-l}|` over `i`.
pub fn class_volume_drift(u: &ScalarField, geometry: &TorusGeometry, l: usize) -> Result<f64> {
    let base = class_volume(geometry, l)?;
    let deformed = field::chi_u(geometry, u)?;
    let mut worst: f64 = 0.0;
    for i in 0..=l {
        let d = geometry.mixed_density_field(&deformed, geometry.chi(), i, l - i)?;
        worst = worst.max((integrate(&geometry.ones(), &d)? - base).abs());
    }
    Ok(worst)
}
