//! Elementary symmetric polynomials on eigenvalue tuples and the quotient
//! operator `F = log(S_k / S_l)` built from them.
//!
//! `S_k` is evaluated by expanding the degree-truncated product
//! `Π (1 + λ_i x)` one factor at a time. Unlike Newton's identities this
//! never subtracts power sums, so mixed-sign tuples stay accurate.

use arrayvec::ArrayVec;

use crate::error::{Error, Result};

/// Largest complex dimension the algebra supports.
pub const MAX_DIM: usize = 6;

/// Per-index values in the eigenframe (gradient entries, diagonals).
pub type Diag = ArrayVec<f64, MAX_DIM>;

/// Eigenvalues of a Hermitian form with respect to the background metric.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenTuple(Diag);

impl EigenTuple {
    pub fn new(values: &[f64]) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&values.len()) {
            return Err(Error::domain(format!(
                "eigen tuple length {} outside 2..={MAX_DIM}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("eigen tuple has non-finite entries"));
        }
        Ok(EigenTuple(values.iter().copied().collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_sorted_descending(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }
}

/// The pair `(k, l)` of the quotient `S_k / S_l`, with `k > l >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuotientLevels {
    k: usize,
    l: usize,
}

impl QuotientLevels {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k <= l {
            return Err(Error::domain(format!("need k > l, got k={k}, l={l}")));
        }
        if k > MAX_DIM {
            return Err(Error::domain(format!("k={k} exceeds {MAX_DIM}")));
        }
        Ok(QuotientLevels { k, l })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.k > n {
            return Err(Error::domain(format!("k={} exceeds dimension {n}", self.k)));
        }
        Ok(())
    }
}

/// Binomial coefficient `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `S_0, …, S_kmax` of the entries not flagged in `skip`.
fn sym_prefix(values: &[f64], kmax: usize, skip: impl Fn(usize) -> bool) -> ArrayVec<f64, { MAX_DIM + 1 }> {
    let mut e: ArrayVec<f64, { MAX_DIM + 1 }> = (0..=kmax).map(|_| 0.0).collect();
    e[0] = 1.0;
    let mut seen = 0;
    for (i, &x) in values.iter().enumerate() {
        if skip(i) {
            continue;
        }
        seen += 1;
        for j in (1..=seen.min(kmax)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `S_k(λ)`; `S_0 = 1`.
pub fn elementary_sym(lambda: &EigenTuple, k: usize) -> Result<f64> {
    let n = lambda.dim();
    if k > n {
        return Err(Error::domain(format!("k={k} exceeds dimension {n}")));
    }
    Ok(sym_prefix(lambda.values(), k, |_| false)[k])
}

/// `S_{k;i₁…i_s}(λ)`: `S_k` with the excluded entries set to zero.
///
/// Indices are zero-based. Negative `k` down to -2 evaluates to zero.
pub fn elementary_sym_excl(lambda: &EigenTuple, k: isize, excluded: &[usize]) -> Result<f64> {
    let n = lambda.dim();
    for (pos, &i) in excluded.iter().enumerate() {
        if i >= n {
            return Err(Error::domain(format!("excluded index {i} out of range for n={n}")));
        }
        if excluded[..pos].contains(&i) {
            return Err(Error::domain(format!("excluded index {i} repeated")));
        }
    }
    if k < -2 || k > n as isize {
        return Err(Error::domain(format!("k={k} outside -2..={n}")));
    }
    if k < 0 {
        return Ok(0.0);
    }
    let k = k as usize;
    Ok(sym_prefix(lambda.values(), k, |i| excluded.contains(&i))[k])
}

fn cone_tolerance(lambda: &EigenTuple, j: usize) -> f64 {
    1e-12 * (1.0 + lambda.max_abs()).powi(j as i32)
}

/// First level `j` in `1..=k` where `S_j` fails the strict positivity test.
fn first_cone_failure(lambda: &EigenTuple, k: usize) -> Option<usize> {
    let s = sym_prefix(lambda.values(), k, |_| false);
    (1..=k).find(|&j| s[j] <= cone_tolerance(lambda, j))
}

/// Membership in the Gårding cone `{S_j > 0, j = 1..k}`.
pub fn in_gamma_k(lambda: &EigenTuple, k: usize) -> Result<bool> {
    if k == 0 || k > lambda.dim() {
        return Err(Error::domain(format!("cone level {k} outside 1..={}", lambda.dim())));
    }
    Ok(first_cone_failure(lambda, k).is_none())
}

/// Like [`in_gamma_k`] but reports the failing level as an error.
pub fn require_cone(lambda: &EigenTuple, k: usize) -> Result<()> {
    if !in_gamma_k(lambda, k)? {
        let level = first_cone_failure(lambda, k).unwrap_or(k);
        return Err(Error::ConeViolation { level, point: None });
    }
    Ok(())
}

/// `F(λ) = log S_k(λ) - log S_l(λ)`.
pub fn f_value(lambda: &EigenTuple, levels: QuotientLevels) -> Result<f64> {
    levels.check_dim(lambda.dim())?;
    require_cone(lambda, levels.k)?;
    let s = sym_prefix(lambda.values(), levels.k, |_| false);
    Ok(s[levels.k].ln() - s[levels.l].ln())
}

/// Diagonal of `∂F/∂X` in the eigenframe:
/// `F^{iī} = S_{k-1;i}/S_k - S_{l-1;i}/S_l`.
pub fn f_gradient_diag(lambda: &EigenTuple, levels: QuotientLevels) -> Result<Diag> {
    levels.check_dim(lambda.dim())?;
    require_cone(lambda, levels.k)?;
    let (k, l) = (levels.k, levels.l);
    let s = sym_prefix(lambda.values(), k, |_| false);
    let values = lambda.values();
    Ok((0..values.len())
        .map(|i| {
            let excl = sym_prefix(values, k - 1, |m| m == i);
            let lower = if l == 0 { 0.0 } else { excl[l - 1] / s[l] };
            excl[k - 1] / s[k] - lower
        })
        .collect())
}

/// Off-diagonal curvature coefficient `S_{k-2;ij}/S_k - S_{l-2;ij}/S_l` (zero-based `i != j`).
pub fn f_pair_coefficient(lambda: &EigenTuple, levels: QuotientLevels, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::domain("pair coefficient needs distinct indices"));
    }
    levels.check_dim(lambda.dim())?;
    require_cone(lambda, levels.k)?;
    let (k, l) = (levels.k as isize, levels.l as isize);
    let s_k = elementary_sym(lambda, levels.k)?;
    let s_l = elementary_sym(lambda, levels.l)?;
    let upper = elementary_sym_excl(lambda, k - 2, &[i, j])?;
    let lower = elementary_sym_excl(lambda, l - 2, &[i, j])?;
    Ok(upper / s_k - lower / s_l)
}

/// Everything the flow needs from one eigen tuple, from a single expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientTerms {
    /// `F = log(S_k / S_l)`.
    pub f: f64,
    /// `Σ_i F^{iī}`.
    pub gradient_trace: f64,
    pub s_k: f64,
    pub s_l: f64,
}

/// Evaluates `F` and the trace of its gradient, using
/// `Σ_i S_{m;i} = (n - m) S_m` for the trace.
pub fn quotient_terms(lambda: &EigenTuple, levels: QuotientLevels) -> Result<QuotientTerms> {
    let n = lambda.dim();
    levels.check_dim(n)?;
    let (k, l) = (levels.k, levels.l);
    let s = sym_prefix(lambda.values(), k, |_| false);
    if let Some(level) = (1..=k).find(|&j| s[j] <= cone_tolerance(lambda, j)) {
        return Err(Error::ConeViolation { level, point: None });
    }
    let upper = (n - k + 1) as f64 * s[k - 1] / s[k];
    let lower = if l == 0 { 0.0 } else { (n - l + 1) as f64 * s[l - 1] / s[l] };
    Ok(QuotientTerms { f: s[k].ln() - s[l].ln(), gradient_trace: upper - lower, s_k: s[k], s_l: s[l] })
}
