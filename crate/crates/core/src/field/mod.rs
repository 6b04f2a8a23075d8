//! The discrete flat torus `ℂⁿ/(ℤ+iℤ)ⁿ`: periodic grids, scalar and form
//! fields, the discrete complex Hessian and quadrature of wedge densities.
//!
//! Real coordinates are ordered `(x¹, y¹, …, xⁿ, yⁿ)` with `zʲ = xʲ + i yʲ`,
//! the last coordinate varying fastest. The background form is
//! `ω = Σ dxʲ∧dyʲ`, so `g = I` and `ωⁿ = n!·dx¹dy¹⋯dxⁿdyⁿ`.
//!
//! In toy mode every field depends on `(x¹, y¹)` alone: only those two axes
//! are stored, matrices keep their full `n × n` shape.

mod snapshot;
mod trig;

pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use trig::{FourierMode, ModeKind, TrigPoly};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermitian::{self, HermitianPoint};
use crate::symfun::{self, QuotientLevels};

/// Pointwise maps switch to rayon above this many grid points.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Shape of a periodic grid: complex dimension, points per real axis, toy flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    points: usize,
    toy: bool,
}

impl Grid {
    pub fn new(n: usize, points: usize, toy: bool) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::domain(format!("grid dimension n={n} must be 2 or 3")));
        }
        if points < 8 || points % 2 != 0 {
            return Err(Error::domain(format!("N={points} must be even and at least 8")));
        }
        let grid = Grid { n, points, toy };
        if grid.len_checked().is_none() {
            return Err(Error::domain(format!("grid with N={points}, n={n} is too large")));
        }
        Ok(grid)
    }

    fn len_checked(&self) -> Option<usize> {
        let len = (self.points as u64).checked_pow(self.dims() as u32)?;
        (len <= 1 << 28).then_some(len as usize)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn is_toy(&self) -> bool {
        self.toy
    }

    /// Number of stored real axes.
    pub fn dims(&self) -> usize {
        if self.toy {
            2
        } else {
            2 * self.n
        }
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dims() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.points as f64
    }

    /// Quadrature weight of one stored point, including the `n!` of `ωⁿ`.
    /// Toy fields are constant along the unstored axes, which integrate to 1.
    pub fn cell_volume(&self) -> f64 {
        let factorial: f64 = (1..=self.n).map(|i| i as f64).product();
        factorial * self.spacing().powi(self.dims() as i32)
    }

    fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dims() - 1 - axis) as u32)
    }

    /// Integer coordinates of a stored point, one per stored axis.
    pub fn coords(&self, idx: usize) -> Vec<usize> {
        (0..self.dims()).map(|a| (idx / self.stride(a)) % self.points).collect()
    }

    /// Real coordinates `(x¹, y¹, …, xⁿ, yⁿ)`; unstored toy axes read 0.
    pub fn position(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        let mut x = vec![0.0; 2 * self.n];
        for a in 0..self.dims() {
            x[a] = ((idx / self.stride(a)) % self.points) as f64 * h;
        }
        x
    }

    /// Index of the point displaced by `delta` along `axis`, wrapping periodically.
    #[inline]
    pub fn shift(&self, idx: usize, axis: usize, delta: isize) -> usize {
        let stride = self.stride(axis);
        let c = (idx / stride) % self.points;
        let target = (c as isize + delta).rem_euclid(self.points as isize) as usize;
        idx - c * stride + target * stride
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GeometryMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

pub(crate) fn map_points<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if len >= PARALLEL_THRESHOLD {
        (0..len).into_par_iter().map(f).collect()
    } else {
        (0..len).map(f).collect()
    }
}

/// Pairwise summation with a fixed split order.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// A real function on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField { grid, values: vec![value; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GeometryMismatch(format!("{} values for a grid of {}", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("scalar field has non-finite values"));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at the real coordinates of every stored point.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64 + Sync + Send) -> Self {
        let values = map_points(grid.len(), |i| f(&grid.position(i)));
        ScalarField { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &ScalarField, t: f64) -> Result<ScalarField> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + t * b).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn shifted(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }
}

/// One Hermitian matrix per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl FormField {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn at(&self, idx: usize) -> HermitianPoint {
        let m = self.grid.n * self.grid.n;
        HermitianPoint::from_slice_unchecked(self.grid.n, &self.data[idx * m..(idx + 1) * m])
    }

    pub fn from_points(grid: Grid, points: Vec<HermitianPoint>) -> Result<Self> {
        if points.len() != grid.len() || points.iter().any(|p| p.dim() != grid.n) {
            return Err(Error::GeometryMismatch("form field does not match grid".into()));
        }
        let data = points.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
        Ok(FormField { grid, data })
    }

    /// `self + other`, pointwise.
    pub fn add(&self, other: &FormField) -> Result<FormField> {
        self.grid.check_same(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(FormField { grid: self.grid, data })
    }

    /// `self + t·other`, pointwise.
    pub fn add_scaled(&self, other: &FormField, t: f64) -> Result<FormField> {
        self.grid.check_same(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b * t).collect();
        Ok(FormField { grid: self.grid, data })
    }

    pub fn max_abs_diff(&self, other: &FormField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// The Kähler class representative `χ = a·ω + ∂∂̄ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiSpec {
    pub scale: f64,
    pub rho: TrigPoly,
}

impl ChiSpec {
    pub fn flat(scale: f64) -> Self {
        ChiSpec { scale, rho: TrigPoly::zero() }
    }

    /// `χ` at real coordinates `x`, with `∂∂̄ρ` evaluated analytically.
    pub fn form_at(&self, n: usize, x: &[f64]) -> HermitianPoint {
        let mut m = self.rho.complex_hessian(n, x);
        for i in 0..n {
            let d = m.get(i, i).re + self.scale;
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }
}

/// The flat torus with its grid and background form `χ`.
#[derive(Clone, Debug)]
pub struct TorusGeometry {
    grid: Grid,
    chi_spec: ChiSpec,
    chi: FormField,
    metric: HermitianPoint,
}

impl TorusGeometry {
    /// Builds the geometry and checks that `χ` lies in `Γ^k` at every point.
    pub fn new(grid: Grid, chi_spec: ChiSpec, k: usize) -> Result<Self> {
        if !(chi_spec.scale > 0.0) || !chi_spec.scale.is_finite() {
            return Err(Error::domain(format!("chi scale a={} must be positive", chi_spec.scale)));
        }
        chi_spec.rho.check_grid(&grid)?;
        let points = map_points(grid.len(), |i| chi_spec.form_at(grid.n, &grid.position(i)));
        let chi = FormField::from_points(grid, points)?;
        let metric = HermitianPoint::identity(grid.n);
        for idx in 0..grid.len() {
            let lambda = hermitian::eigen_wrt_metric(&chi.at(idx), &metric)?;
            symfun::require_cone(&lambda, k).map_err(|e| e.at_point(grid.coords(idx)))?;
        }
        Ok(TorusGeometry { grid, chi_spec, chi, metric })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn chi_spec(&self) -> &ChiSpec {
        &self.chi_spec
    }

    pub fn chi(&self) -> &FormField {
        &self.chi
    }

    pub fn metric(&self) -> &HermitianPoint {
        &self.metric
    }

    /// The constant function 1 on this grid.
    pub fn ones(&self) -> ScalarField {
        ScalarField::constant(self.grid, 1.0)
    }

    /// Pointwise density `S_m(λ(X)) / C(n, m)` of `X^m ∧ ω^{n-m}`.
    pub fn wedge_density(&self, form: &FormField, m: usize) -> Result<ScalarField> {
        self.grid.check_same(&form.grid)?;
        let metric = self.metric;
        let values: Result<Vec<f64>> =
            map_points(self.grid.len(), |i| hermitian::wedge_ratio(&form.at(i), &metric, m)).into_iter().collect();
        Ok(ScalarField::from_raw(self.grid, values?))
    }

    /// Pointwise density of `A^i ∧ B^j ∧ ω^{n-i-j}`.
    pub fn mixed_density_field(&self, a: &FormField, b: &FormField, i: usize, j: usize) -> Result<ScalarField> {
        self.grid.check_same(&a.grid)?;
        self.grid.check_same(&b.grid)?;
        let metric = self.metric;
        let values: Result<Vec<f64>> =
            map_points(self.grid.len(), |p| mixed_density(&a.at(p), &b.at(p), &metric, i, j)).into_iter().collect();
        Ok(ScalarField::from_raw(self.grid, values?))
    }
}

/// Second-order finite difference approximation of `u_{ij̄} = ∂_i ∂_j̄ u`.
///
/// `u_{ij̄} = ¼[(∂_{xⁱ}∂_{xʲ} + ∂_{yⁱ}∂_{yʲ}) + i(∂_{xⁱ}∂_{yʲ} − ∂_{yⁱ}∂_{xʲ})] u`,
/// pure second derivatives by the 3-point stencil, mixed ones by the
/// 4-point cross stencil.
pub fn complex_hessian(u: &ScalarField) -> FormField {
    let grid = u.grid;
    let n = grid.n;
    let dims = grid.dims();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let vals = &u.values;
    let second = |idx: usize, a: usize, b: usize| -> f64 {
        if a == b {
            (vals[grid.shift(idx, a, 1)] - 2.0 * vals[idx] + vals[grid.shift(idx, a, -1)]) * inv_h2
        } else {
            let pp = vals[grid.shift(grid.shift(idx, a, 1), b, 1)];
            let pm = vals[grid.shift(grid.shift(idx, a, 1), b, -1)];
            let mp = vals[grid.shift(grid.shift(idx, a, -1), b, 1)];
            let mm = vals[grid.shift(grid.shift(idx, a, -1), b, -1)];
            (pp - pm - mp + mm) * 0.25 * inv_h2
        }
    };
    let points = map_points(grid.len(), |idx| {
        let mut m = HermitianPoint::zeros(n);
        let mut d = [[0.0; 6]; 6];
        for a in 0..dims {
            for b in a..dims {
                d[a][b] = second(idx, a, b);
                d[b][a] = d[a][b];
            }
        }
        let active = dims / 2;
        for i in 0..active {
            for j in i..active {
                let re = d[2 * i][2 * j] + d[2 * i + 1][2 * j + 1];
                let im = d[2 * i][2 * j + 1] - d[2 * i + 1][2 * j];
                m.set(i, j, Complex64::new(0.25 * re, 0.25 * im));
            }
        }
        m
    });
    let data = points.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
    FormField { grid, data }
}

/// `χ_u = χ + ∂∂̄u` with the discrete Hessian of `u`.
pub fn chi_u(geometry: &TorusGeometry, u: &ScalarField) -> Result<FormField> {
    geometry.grid.check_same(&u.grid)?;
    geometry.chi.add(&complex_hessian(u))
}

/// Density of `A^i ∧ B^j ∧ ω^{n-i-j}` against `ωⁿ` at one point.
///
/// `q(t) = (A + tB)^m ∧ ω^{n-m} / ωⁿ` with `m = i + j` is a polynomial of
/// degree `m` whose `t^j` coefficient is `C(m, j)` times the wanted density.
/// It is sampled at `t = 0, 1, …, m` and interpolated.
pub fn mixed_density(a: &HermitianPoint, b: &HermitianPoint, g: &HermitianPoint, i: usize, j: usize) -> Result<f64> {
    let n = a.dim();
    let m = i + j;
    if m > n {
        return Err(Error::domain(format!("i + j = {m} exceeds n = {n}")));
    }
    if j == 0 {
        return hermitian::wedge_ratio(a, g, i);
    }
    if i == 0 {
        return hermitian::wedge_ratio(b, g, j);
    }
    let samples: Vec<f64> =
        (0..=m).map(|t| hermitian::wedge_ratio(&a.add_scaled(b, t as f64), g, m)).collect::<Result<_>>()?;
    let coeffs = newton_to_monomial(&samples);
    Ok(coeffs[j] / symfun::binomial(m, j))
}

/// Monomial coefficients of the interpolant through `(t, y_t)`, `t = 0..len`.
fn newton_to_monomial(y: &[f64]) -> Vec<f64> {
    let m = y.len();
    // Divided differences on integer nodes.
    let mut dd = y.to_vec();
    for level in 1..m {
        for t in (level..m).rev() {
            dd[t] = (dd[t] - dd[t - 1]) / level as f64;
        }
    }
    // Horner expansion of Σ dd[r] Π_{s<r} (t - s).
    let mut poly = vec![0.0; m];
    for r in (0..m).rev() {
        // poly ← poly·(t - r) + dd[r]
        let mut next = vec![0.0; m];
        for p in 0..m {
            if poly[p] == 0.0 {
                continue;
            }
            next[p] -= r as f64 * poly[p];
            if p + 1 < m {
                next[p + 1] += poly[p];
            }
        }
        next[0] += dd[r];
        poly = next;
    }
    poly
}

/// `Σ f·density·n!·h^{2n}` over the grid.
pub fn integrate(f: &ScalarField, density: &ScalarField) -> Result<f64> {
    f.grid.check_same(&density.grid)?;
    let products: Vec<f64> = f.values.iter().zip(&density.values).map(|(a, b)| a * b).collect();
    Ok(pairwise_sum(&products) * f.grid.cell_volume())
}

/// `max - min` over the grid.
pub fn oscillation(f: &ScalarField) -> f64 {
    f.max() - f.min()
}

/// The sampled `F(χ) = log(S_k/S_l)` at every point of a form field.
pub fn quotient_field(geometry: &TorusGeometry, form: &FormField, levels: QuotientLevels) -> Result<ScalarField> {
    let grid = geometry.grid;
    let metric = geometry.metric;
    let values: Result<Vec<f64>> = map_points(grid.len(), |i| {
        hermitian::quotient_log(&form.at(i), &metric, levels).map_err(|e| e.at_point(grid.coords(i)))
    })
    .into_iter()
    .collect();
    Ok(ScalarField::from_raw(grid, values?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn toy(n: usize) -> Grid {
        Grid::new(2, n, true).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(2, 6, false).is_err());
        assert!(Grid::new(2, 9, false).is_err());
        assert!(Grid::new(4, 8, false).is_err());
        let g = Grid::new(2, 8, false).unwrap();
        assert_eq!(g.len(), 4096);
        assert_eq!(g.coords(g.shift(0, 3, -1)), vec![0, 0, 0, 7]);
    }

    #[test]
    fn hessian_of_constant_vanishes() {
        let g = Grid::new(2, 8, false).unwrap();
        let h = complex_hessian(&ScalarField::constant(g, 3.7));
        assert_eq!(h.max_abs_diff(&complex_hessian(&ScalarField::zeros(g))), 0.0);
        for idx in [0, 17, 4095] {
            assert!(h.at(idx).as_slice().iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn hessian_of_cosine_mode() {
        let eps = 0.01;
        let g = Grid::new(2, 16, false).unwrap();
        let u = ScalarField::from_fn(g, |x| eps * (2.0 * PI * x[0]).cos());
        let h = complex_hessian(&u).at(0);
        let exact = -PI * PI * eps;
        let hh = g.spacing().powi(2);
        assert!((h.get(0, 0).re - exact).abs() < 2.0 * PI.powi(4) * eps * hh);
        assert!(h.get(1, 1).norm() < 1e-14);
        assert!(h.get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn hessian_of_product_mode() {
        let eps = 0.05;
        let g = Grid::new(2, 32, false).unwrap();
        let u = ScalarField::from_fn(g, |x| eps * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin());
        let h = complex_hessian(&u);
        let mut worst: f64 = 0.0;
        for idx in (0..g.len()).step_by(97) {
            let x = g.position(idx);
            let exact = -2.0 * PI * PI * eps * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
            let p = h.at(idx);
            worst = worst.max((p.get(0, 0).re - exact).abs());
            assert!(p.get(0, 0).im == 0.0);
            assert!(p.get(0, 1).norm() < 1e-12 && p.get(1, 1).norm() < 1e-12);
        }
        assert!(worst < 0.01, "{worst}");
    }

    #[test]
    fn hessian_is_second_order() {
        let err = |n: usize| {
            let g = toy(n);
            let u = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin());
            let h = complex_hessian(&u);
            (0..g.len())
                .map(|i| {
                    let x = g.position(i);
                    let exact = -2.0 * PI * PI * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
                    (h.at(i).get(0, 0).re - exact).abs()
                })
                .fold(0.0, f64::max)
        };
        for n in [8, 16, 32] {
            assert!(err(n) / err(2 * n) >= 3.5);
        }
    }

    #[test]
    fn full_grid_mixed_entries_match_analytic() {
        // u = cos(2π(x¹ + y²)) couples the two complex coordinates.
        let g = Grid::new(2, 32, false).unwrap();
        let u = ScalarField::from_fn(g, |x| (2.0 * PI * (x[0] + x[3])).cos());
        let h = complex_hessian(&u);
        let poly = TrigPoly::new(vec![FourierMode::new(vec![1, 0, 0, 1], 1.0, ModeKind::Cos)]);
        let mut worst: f64 = 0.0;
        for idx in (0..g.len()).step_by(101) {
            let exact = poly.complex_hessian(2, &g.position(idx));
            let got = h.at(idx);
            for a in 0..2 {
                for b in 0..2 {
                    worst = worst.max((got.get(a, b) - exact.get(a, b)).norm());
                }
            }
        }
        // entries are of size π²; the cross stencil is off by about (2πh)²/3 relative
        assert!(worst < 0.2, "{worst}");
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let g = Grid::new(2, 8, false).unwrap();
        let u = ScalarField::from_fn(g, |x| (x[0] * 7.0).sin() * x[1] * x[1] + (x[2] - x[3]).exp());
        let h = complex_hessian(&u);
        let lap = ScalarField::from_values(g, (0..g.len()).map(|i| h.at(i).trace()).collect()).unwrap();
        assert!(integrate(&lap, &ScalarField::constant(g, 1.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let g = Grid::new(2, 8, false).unwrap();
        let one = ScalarField::constant(g, 1.0);
        assert!((integrate(&one, &one).unwrap() - 2.0).abs() < 1e-14);
        let s = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        assert!(integrate(&s, &one).unwrap().abs() < 1e-14);
        let t = toy(8);
        assert!((integrate(&ScalarField::constant(t, 1.0), &ScalarField::constant(t, 1.0)).unwrap() - 2.0).abs() < 1e-14);
        assert!(integrate(&one, &ScalarField::constant(t, 1.0)).is_err());
    }

    #[test]
    fn invariant_constant_for_flat_chi() {
        let geom = TorusGeometry::new(toy(8), ChiSpec::flat(2.0), 2).unwrap();
        let one = geom.ones();
        let top = integrate(&one, &geom.wedge_density(geom.chi(), 2).unwrap()).unwrap();
        let vol = integrate(&one, &one).unwrap();
        assert!((top / vol - 4.0).abs() < 1e-14);
    }

    #[test]
    fn oscillation_examples() {
        let g = toy(16);
        assert_eq!(oscillation(&ScalarField::constant(g, 5.0)), 0.0);
        let s = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        assert!((oscillation(&s) - 2.0).abs() < 1e-12);
        let step = ScalarField::from_fn(g, |x| if x[0] < 0.5 { 1.0 } else { 4.0 });
        assert_eq!(oscillation(&step), 3.0);
    }

    #[test]
    fn chi_u_examples() {
        let grid = toy(16);
        let rho = TrigPoly::new(vec![FourierMode::new(vec![1, 1, 0, 0], 0.02, ModeKind::Sin)]);
        let geom = TorusGeometry::new(grid, ChiSpec { scale: 2.0, rho: rho.clone() }, 2).unwrap();
        let u = ScalarField::from_fn(grid, |x| -rho.value(x));
        let x = chi_u(&geom, &u).unwrap();
        let flat = FormField::from_points(grid, vec![HermitianPoint::identity(2).scaled(2.0); grid.len()]).unwrap();
        let diff = x.max_abs_diff(&flat);
        assert!(diff > 0.0 && diff < 0.02, "{diff}");
        let exact = geom.chi().add(&complex_hessian(&u)).unwrap();
        assert_eq!(x.max_abs_diff(&exact), 0.0);

        let zero = TorusGeometry::new(grid, ChiSpec::flat(3.0), 2).unwrap();
        let x0 = chi_u(&zero, &ScalarField::zeros(grid)).unwrap();
        assert_eq!(x0.at(5), HermitianPoint::identity(2).scaled(3.0));
    }

    #[test]
    fn geometry_rejects_chi_outside_cone() {
        let rho = TrigPoly::new(vec![FourierMode::new(vec![1, 0, 0, 0], 1.0, ModeKind::Cos)]);
        let err = TorusGeometry::new(toy(8), ChiSpec { scale: 1.0, rho }, 2).unwrap_err();
        assert!(matches!(err, Error::ConeViolation { point: Some(_), .. }));
    }

    #[test]
    fn mixed_density_examples() {
        let id = HermitianPoint::identity(2);
        let a = HermitianPoint::diagonal(&[1.0, 2.0]);
        let b = HermitianPoint::diagonal(&[3.0, 4.0]);
        assert!((mixed_density(&a, &b, &id, 1, 1).unwrap() - 5.0).abs() < 1e-13);
        assert!((mixed_density(&a, &a, &id, 1, 1).unwrap() - hermitian::wedge_ratio(&a, &id, 2).unwrap()).abs() < 1e-13);
        assert_eq!(mixed_density(&a, &b, &id, 1, 0).unwrap(), hermitian::wedge_ratio(&a, &id, 1).unwrap());
        assert!(mixed_density(&a, &b, &id, 2, 1).is_err());
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        // 2 - 3t + 0.5t² + t³ at t = 0..3
        let p = |t: f64| 2.0 - 3.0 * t + 0.5 * t * t + t * t * t;
        let c = newton_to_monomial(&[p(0.0), p(1.0), p(2.0), p(3.0)]);
        for (got, want) in c.iter().zip([2.0, -3.0, 0.5, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
