//! Pointwise check of the subsolution inequality
//! `k·χ_u̲^{k-1} ∧ ω^{n-k} > l·ψ·χ_u̲^{l-1} ∧ ω^{n-l}` and the dichotomy
//! diagnostic `θ` along a flow.
//!
//! Both sides are compared as densities, `k·S_{k-1}/C(n,k-1)` against
//! `l·ψ·S_{l-1}/C(n,l-1)`.

use crate::error::{Error, Result};
use crate::field::{chi_u, map_points, FormField, ScalarField, TorusGeometry};
use crate::hermitian::{self, HermitianPoint};
use crate::symfun::{self, EigenTuple, QuotientLevels};

/// Search depth of the geometric grids `2^{-j}`.
pub const GRID_DEPTH: i32 = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct SubsolutionReport {
    pub pointwise_ok: Vec<bool>,
    /// Minimum of LHS - RHS; points outside the cone contribute at most 0.
    pub min_margin: f64,
    pub failures: usize,
    /// Dichotomy `θ` minimized over the grid, evaluated at `u ≡ 0`.
    pub theta_min: f64,
    /// Largest `λ = 2^{-j}` for which `u̲` stays a strict subsolution after
    /// `χ_u̲ ↦ χ_u̲ - λω`; 0 if none.
    pub lambda_gap: f64,
}

impl SubsolutionReport {
    pub fn ok(&self) -> bool {
        self.min_margin > 0.0
    }
}

fn margin_at(x: &HermitianPoint, g: &HermitianPoint, levels: QuotientLevels, psi: f64) -> Result<Option<f64>> {
    let lambda = hermitian::eigen_wrt_metric(x, g)?;
    let (k, l) = (levels.k(), levels.l());
    let inside = symfun::in_gamma_k(&lambda, k)?;
    let n = lambda.dim();
    let density = |m: usize| -> Result<f64> {
        Ok(symfun::elementary_sym(&lambda, m)? / symfun::binomial(n, m))
    };
    let lhs = k as f64 * density(k - 1)?;
    let rhs = if l == 0 { 0.0 } else { l as f64 * psi * density(l - 1)? };
    let margin = lhs - rhs;
    Ok(if inside { Some(margin) } else { None })
}

pub fn check_subsolution(
    u_bar: &ScalarField,
    geometry: &TorusGeometry,
    levels: QuotientLevels,
    psi: &ScalarField,
) -> Result<SubsolutionReport> {
    let grid = geometry.grid();
    levels.check_dim(grid.n())?;
    if psi.grid() != grid {
        return Err(Error::GeometryMismatch("psi and geometry grids differ".into()));
    }
    let form = chi_u(geometry, u_bar)?;
    let g = *geometry.metric();
    let psi_v = psi.values();

    let margins: Result<Vec<Option<f64>>> =
        map_points(grid.len(), |i| margin_at(&form.at(i), &g, levels, psi_v[i])).into_iter().collect();
    let margins = margins?;
    let pointwise_ok: Vec<bool> = margins.iter().map(|m| matches!(m, Some(v) if *v > 0.0)).collect();
    let min_margin = margins.iter().map(|m| m.map_or(0.0, |v| v)).fold(f64::INFINITY, f64::min);
    let min_margin = if margins.iter().any(Option::is_none) { min_margin.min(0.0) } else { min_margin };
    let failures = pointwise_ok.iter().filter(|ok| !**ok).count();

    let lambda_gap = (0..=GRID_DEPTH)
        .map(|j| 2f64.powi(-j))
        .find(|&gap| {
            (0..grid.len()).all(|i| {
                let shifted = form.at(i).add_scaled(&g, -gap);
                matches!(margin_at(&shifted, &g, levels, psi_v[i]), Ok(Some(v)) if v > 0.0)
            })
        })
        .unwrap_or(0.0);

    let theta_min = theta_at_rest(geometry, levels, psi, &form)?;
    Ok(SubsolutionReport { pointwise_ok, min_margin, failures, theta_min, lambda_gap })
}

fn theta_at_rest(geometry: &TorusGeometry, levels: QuotientLevels, psi: &ScalarField, sub: &FormField) -> Result<f64> {
    let n = geometry.grid().n();
    let shift = (symfun::binomial(n, levels.k()) / symfun::binomial(n, levels.l())).ln();
    let u = ScalarField::zeros(geometry.grid());
    let g = *geometry.metric();
    let chi = geometry.chi();
    let dtu: Result<Vec<f64>> = map_points(geometry.grid().len(), |i| {
        Ok(hermitian::quotient_log(&chi.at(i), &g, levels)? - psi.values()[i].ln() - shift)
    })
    .into_iter()
    .collect();
    let dtu = ScalarField::from_values(geometry.grid(), dtu?)?;
    theta_min_over_grid(geometry, levels, &u, &dtu, sub)
}

/// The largest `θ ∈ {2^{-j}}` for which, at one point,
/// `Σ F^{iī}(u_{iī} - u̲_{iī}) - ∂_t u <= -θ(1 + Σ F^{iī})` or
/// `F^{11̄} X_{11̄} >= θ(1 + Σ F^{iī})`; 0 when neither holds at `2^{-40}`.
///
/// `lambda_x` are the eigenvalues of `X = χ_u` (descending) and `sub_diag`
/// the diagonal of `χ_u̲` in the same frame, so `u_{iī} - u̲_{iī}` is
/// `lambda_x[i] - sub_diag[i]`.
pub fn dichotomy_theta(lambda_x: &EigenTuple, sub_diag: &[f64], dt_u: f64, levels: QuotientLevels) -> Result<f64> {
    if !lambda_x.is_sorted_descending() {
        return Err(Error::domain("eigenvalues must be sorted in descending order"));
    }
    if sub_diag.len() != lambda_x.dim() {
        return Err(Error::domain(format!("{} diagonal entries for n = {}", sub_diag.len(), lambda_x.dim())));
    }
    let grad = symfun::f_gradient_diag(lambda_x, levels)?;
    let lam = lambda_x.values();
    let scale = 1.0 + grad.iter().sum::<f64>();
    let linear: f64 = grad.iter().zip(lam).zip(sub_diag).map(|((f, l), s)| f * (l - s)).sum::<f64>() - dt_u;
    let leading = grad[0] * lam[0];
    Ok((0..=GRID_DEPTH)
        .map(|j| 2f64.powi(-j))
        .find(|&theta| linear <= -theta * scale || leading >= theta * scale)
        .unwrap_or(0.0))
}

/// `min_x dichotomy_theta` for the state `(u, ∂_t u)` against `χ_u̲ = sub`.
pub fn theta_min_over_grid(
    geometry: &TorusGeometry,
    levels: QuotientLevels,
    u: &ScalarField,
    dtu: &ScalarField,
    sub: &FormField,
) -> Result<f64> {
    let form = chi_u(geometry, u)?;
    let g = *geometry.metric();
    let thetas: Result<Vec<f64>> = map_points(geometry.grid().len(), |i| {
        let (lambda, diag) = hermitian::eigen_frame_diagonal(&form.at(i), &sub.at(i), &g)?;
        dichotomy_theta(&lambda, &diag, dtu.values()[i], levels)
    })
    .into_iter()
    .collect();
    Ok(thetas?.into_iter().fold(f64::INFINITY, f64::min))
}
