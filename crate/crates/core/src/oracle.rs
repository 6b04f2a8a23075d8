//! Brute-force references for the fast paths.
//!
//! Nothing here goes through the product recurrence, the eigen solvers or
//! the interpolation used by [`crate::symfun`], [`crate::hermitian`] and
//! [`crate::field::mixed_density`]: symmetric functions come from subset
//! enumeration, wedge densities from Leibniz determinants.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{complex_hessian, ScalarField, TorusGeometry};
use crate::hermitian::HermitianPoint;
use crate::symfun::{self, EigenTuple, QuotientLevels};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    SubsetEnum,
    MixedDeterminant,
    PathIntegral,
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub method: OracleMethod,
}

impl OracleResult {
    fn new(value: f64, method: OracleMethod) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::domain(format!("{method:?} oracle produced {value}")));
        }
        Ok(OracleResult { value, method })
    }
}

/// `S_k` straight from the defining sum over all `k`-subsets (`n <= 8`).
pub fn sym_enum(values: &[f64], k: usize) -> Result<OracleResult> {
    let n = values.len();
    if n > 8 || k > n {
        return Err(Error::domain(format!("subset enumeration needs k <= n <= 8, got n={n}, k={k}")));
    }
    let total: f64 = (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| values[i]).product::<f64>())
        .sum();
    OracleResult::new(total, OracleMethod::SubsetEnum)
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            out.push((prefix.clone(), sign));
            return;
        }
        for c in 0..n {
            if used[c] {
                continue;
            }
            // inversions contributed by placing c after the current prefix
            let inv = prefix.iter().filter(|&&p| p > c).count();
            used[c] = true;
            prefix.push(c);
            rec(prefix, used, if inv % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            used[c] = false;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], 1.0, &mut out);
    out
}

/// Leibniz expansion of a complex determinant given row by row.
fn leibniz(rows: &[Vec<Complex64>]) -> Complex64 {
    let n = rows.len();
    permutations(n)
        .into_iter()
        .map(|(perm, sign)| perm.iter().enumerate().fold(Complex64::new(sign, 0.0), |acc, (r, &c)| acc * rows[r][c]))
        .sum()
}

fn row(m: &HermitianPoint, r: usize) -> Vec<Complex64> {
    (0..m.dim()).map(|c| m.get(r, c)).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Density of `A^i ∧ B^j ∧ ω^{n-i-j}` against `ωⁿ` (`ω ↔ g`, `n <= 3`).
///
/// By row multilinearity, `det(A + tB + s g)` expands into composite
/// determinants whose rows come from `A`, `B` or `g`; the coefficient of
/// `t^j s^{n-i-j}` is `n!/(i! j! (n-i-j)!)` times the mixed density
/// (times `det g`).
pub fn mixed_determinant(a: &HermitianPoint, b: &HermitianPoint, g: &HermitianPoint, i: usize, j: usize) -> Result<OracleResult> {
    let n = a.dim();
    if n > 3 || b.dim() != n || g.dim() != n || i + j > n {
        return Err(Error::domain(format!("mixed determinant needs i + j <= n <= 3, got n={n}, i={i}, j={j}")));
    }
    let sources = [a, b, g];
    let mut total = Complex64::new(0.0, 0.0);
    for code in 0..3usize.pow(n as u32) {
        let choice: Vec<usize> = (0..n).map(|r| (code / 3usize.pow(r as u32)) % 3).collect();
        let count = |s: usize| choice.iter().filter(|&&c| c == s).count();
        if count(0) != i || count(1) != j {
            continue;
        }
        let rows: Vec<Vec<Complex64>> = choice.iter().enumerate().map(|(r, &s)| row(sources[s], r)).collect();
        total += leibniz(&rows);
    }
    let det_g = leibniz(&(0..n).map(|r| row(g, r)).collect::<Vec<_>>()).re;
    let norm = factorial(i) * factorial(j) * factorial(n - i - j) / factorial(n);
    OracleResult::new(total.re * norm / det_g, OracleMethod::MixedDeterminant)
}

/// Sum of principal `m × m` minors, i.e. `S_m` of the eigenvalues (`g = I`).
fn principal_minor_sum(x: &HermitianPoint, m: usize) -> f64 {
    let n = x.dim();
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
            let rows: Vec<Vec<Complex64>> = idx.iter().map(|&r| idx.iter().map(|&c| x.get(r, c)).collect()).collect();
            leibniz(&rows).re
        })
        .sum()
}

fn central_difference(f: impl Fn(f64) -> Result<f64>, step: f64) -> Result<f64> {
    Ok((f(step)? - f(-step)?) / (2.0 * step))
}

/// Worst deviation between `f_gradient_diag` and centered differences of `f_value`.
///
/// `λ` must sit at least `10·step` inside the cone along the diagonal
/// direction, which keeps every probe `λ ± step·eᵢ` admissible.
pub fn fd_check_gradient(lambda: &EigenTuple, levels: QuotientLevels, step: f64) -> Result<OracleResult> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("finite-difference step {step} must be positive")));
    }
    let shifted: Vec<f64> = lambda.values().iter().map(|v| v - 10.0 * step).collect();
    if !symfun::in_gamma_k(&EigenTuple::new(&shifted)?, levels.k())? {
        return Err(Error::domain("eigen tuple is not interior to the cone at this step"));
    }
    let analytic = symfun::f_gradient_diag(lambda, levels)?;
    let probe = |i: usize, h: f64| -> Result<f64> {
        central_difference(
            |d| {
                let mut v = lambda.values().to_vec();
                v[i] += d;
                symfun::f_value(&EigenTuple::new(&v)?, levels)
            },
            h,
        )
    };
    let mut worst: f64 = 0.0;
    for (i, &g) in analytic.iter().enumerate() {
        let fd = match probe(i, step) {
            Err(Error::ConeViolation { .. }) => probe(i, step / 2.0)?,
            other => other?,
        };
        worst = worst.max((fd - g).abs());
    }
    OracleResult::new(worst, OracleMethod::FiniteDifference)
}

/// `J_l(u) = ∫₀¹ ∫_M u · χ_{su}^l ∧ ω^{n-l} ds` by composite Simpson in `s`.
pub fn path_integral_j(u: &ScalarField, geometry: &TorusGeometry, l: usize, nodes: usize) -> Result<OracleResult> {
    if nodes < 3 || nodes % 2 == 0 {
        return Err(Error::domain(format!("Simpson rule needs an odd node count >= 3, got {nodes}")));
    }
    let grid = geometry.grid();
    if u.grid() != grid {
        return Err(Error::GeometryMismatch("field and geometry grids differ".into()));
    }
    let n = grid.n();
    if l > n {
        return Err(Error::domain(format!("l={l} exceeds n={n}")));
    }
    let hess = complex_hessian(u);
    let binom = symfun::binomial(n, l);
    let inner = |s: f64| -> f64 {
        let mut acc = 0.0;
        for (p, &up) in u.values().iter().enumerate() {
            let x = geometry.chi().at(p).add_scaled(&hess.at(p), s);
            acc += up * principal_minor_sum(&x, l) / binom;
        }
        acc * grid.cell_volume()
    };
    let panels = nodes - 1;
    let ds = 1.0 / panels as f64;
    let total: f64 = (0..nodes)
        .map(|q| {
            let w = if q == 0 || q == panels {
                1.0
            } else if q % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * inner(q as f64 * ds)
        })
        .sum::<f64>()
        * ds
        / 3.0;
    OracleResult::new(total, OracleMethod::PathIntegral)
}
