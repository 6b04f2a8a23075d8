//! Pointwise Hermitian linear algebra: eigenvalues of a (1,1)-form with
//! respect to a metric, and the quotient operator evaluated on matrix data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symfun::{self, Diag, EigenTuple, QuotientLevels, MAX_DIM};

const CAP: usize = MAX_DIM * MAX_DIM;
const JACOBI_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 64;

/// An `n × n` Hermitian matrix, the value of a (1,1)-form at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianPoint {
    n: usize,
    entries: [Complex64; CAP],
}

impl HermitianPoint {
    pub fn zeros(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension {n} unsupported");
        HermitianPoint { n, entries: [Complex64::new(0.0, 0.0); CAP] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * m.n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, checking Hermitian symmetry.
    pub fn from_rows(n: usize, rows: &[Complex64]) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) || rows.len() != n * n {
            return Err(Error::domain(format!("need {n}x{n} entries, got {}", rows.len())));
        }
        if rows.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("non-finite matrix entry"));
        }
        let scale = rows.iter().map(|z| z.norm()).fold(0.0_f64, f64::max).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                if (rows[i * n + j] - rows[j * n + i].conj()).norm() > 1e-13 * scale {
                    return Err(Error::domain(format!("entry ({i},{j}) breaks Hermitian symmetry")));
                }
            }
        }
        let mut m = Self::zeros(n);
        m.entries[..n * n].copy_from_slice(rows);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }

    /// Sets entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        if i == j {
            self.entries[i * self.n + i] = Complex64::new(z.re, 0.0);
        } else {
            self.entries[i * self.n + j] = z;
            self.entries[j * self.n + i] = z.conj();
        }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries[..self.n * self.n]
    }

    pub(crate) fn from_slice_unchecked(n: usize, rows: &[Complex64]) -> Self {
        let mut m = Self::zeros(n);
        m.entries[..n * n].copy_from_slice(rows);
        m
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &HermitianPoint, t: f64) -> HermitianPoint {
        debug_assert_eq!(self.n, other.n);
        let mut out = *self;
        for (a, b) in out.entries[..self.n * self.n].iter_mut().zip(other.as_slice()) {
            *a += b * t;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> HermitianPoint {
        let mut out = *self;
        for a in out.entries[..self.n * self.n].iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re).sum()
    }

    fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| self.get(i, j) == Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
        })
    }
}

/// Lower Cholesky factor of a positive definite Hermitian matrix.
fn cholesky(g: &HermitianPoint) -> Result<[Complex64; CAP]> {
    let n = g.n;
    let mut l = [Complex64::new(0.0, 0.0); CAP];
    for j in 0..n {
        let mut d = g.get(j, j).re;
        for p in 0..j {
            d -= l[j * n + p].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::Metric(format!("non-positive pivot {d:e} at row {j}")));
        }
        let d = d.sqrt();
        l[j * n + j] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = g.get(i, j);
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// `L⁻¹ X L⁻ᴴ` for the lower triangular `L`.
fn congruence_inverse(x: &HermitianPoint, l: &[Complex64; CAP]) -> HermitianPoint {
    let n = x.n;
    // Z = L⁻¹ X by forward substitution on each column.
    let mut z = [Complex64::new(0.0, 0.0); CAP];
    for c in 0..n {
        for i in 0..n {
            let mut s = x.get(i, c);
            for p in 0..i {
                s -= l[i * n + p] * z[p * n + c];
            }
            z[i * n + c] = s / l[i * n + i];
        }
    }
    // M = Z L⁻ᴴ, i.e. Mᴴ = L⁻¹ Zᴴ.
    let mut m = HermitianPoint::zeros(n);
    for c in 0..n {
        let mut col = [Complex64::new(0.0, 0.0); MAX_DIM];
        for i in 0..n {
            let mut s = z[c * n + i].conj();
            for p in 0..i {
                s -= l[i * n + p] * col[p];
            }
            col[i] = s / l[i * n + i];
        }
        for i in 0..n {
            m.entries[c * n + i] = col[i].conj();
        }
    }
    // Symmetrize away rounding.
    for i in 0..n {
        m.entries[i * n + i].im = 0.0;
        for j in i + 1..n {
            let avg = (m.entries[i * n + j] + m.entries[j * n + i].conj()) * 0.5;
            m.entries[i * n + j] = avg;
            m.entries[j * n + i] = avg.conj();
        }
    }
    m
}

fn reduce(x: &HermitianPoint, g: &HermitianPoint) -> Result<HermitianPoint> {
    if x.n != g.n {
        return Err(Error::domain(format!("form is {}x{}, metric is {}x{}", x.n, x.n, g.n, g.n)));
    }
    if g.is_identity() {
        return Ok(*x);
    }
    let l = cholesky(g)?;
    Ok(congruence_inverse(x, &l))
}

fn sorted_desc(mut values: Diag) -> Diag {
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

fn eigen_2x2(m: &HermitianPoint) -> Diag {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1).norm();
    let mid = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    [mid + r, mid - r].into_iter().collect()
}

/// Cyclic complex Jacobi. Returns eigenvalues and, when requested, the
/// unitary whose columns are the eigenvectors (row-major, stride `n`).
fn jacobi(m: &HermitianPoint, want_vectors: bool) -> (Diag, [Complex64; CAP]) {
    let n = m.n;
    let mut a = m.entries;
    let mut v = [Complex64::new(0.0, 0.0); CAP];
    if want_vectors {
        for i in 0..n {
            v[i * n + i] = Complex64::new(1.0, 0.0);
        }
    }
    let target = JACOBI_TOL * m.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                // Phase rotation makes the (p, q) entry real, then a real
                // Givens rotation annihilates it: U = diag(1, e^{-iφ}) · R.
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = Complex64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                // A ← A U (columns p, q)
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = arp * u_pp + arq * u_qp;
                    a[r * n + q] = arp * u_pq + arq * u_qq;
                }
                // A ← Uᴴ A (rows p, q)
                for col in 0..n {
                    let apc = a[p * n + col];
                    let aqc = a[q * n + col];
                    a[p * n + col] = u_pp.conj() * apc + u_qp.conj() * aqc;
                    a[q * n + col] = u_pq.conj() * apc + u_qq.conj() * aqc;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if want_vectors {
                    for r in 0..n {
                        let vrp = v[r * n + p];
                        let vrq = v[r * n + q];
                        v[r * n + p] = vrp * u_pp + vrq * u_qp;
                        v[r * n + q] = vrp * u_pq + vrq * u_qq;
                    }
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i].re).collect(), v)
}

/// Generalized eigenvalues of the pencil `(X, g)`, sorted descending.
pub fn eigen_wrt_metric(x: &HermitianPoint, g: &HermitianPoint) -> Result<EigenTuple> {
    let m = reduce(x, g)?;
    let values = if m.n == 2 { eigen_2x2(&m) } else { jacobi(&m, false).0 };
    EigenTuple::new(&sorted_desc(values))
}

/// Eigenvalues of `X` w.r.t. `g` (descending) together with the diagonal of
/// `Y` expressed in the same eigenframe.
pub fn eigen_frame_diagonal(x: &HermitianPoint, y: &HermitianPoint, g: &HermitianPoint) -> Result<(EigenTuple, Diag)> {
    let mx = reduce(x, g)?;
    let my = reduce(y, g)?;
    let n = mx.n;
    let (values, v) = jacobi(&mx, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let lambda: Diag = order.iter().map(|&i| values[i]).collect();
    let diag: Diag = order
        .iter()
        .map(|&c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..n {
                for s in 0..n {
                    acc += v[r * n + c].conj() * my.get(r, s) * v[s * n + c];
                }
            }
            acc.re
        })
        .collect();
    Ok((EigenTuple::new(&lambda)?, diag))
}

/// `F(λ(X, g)) = log S_k - log S_l`.
pub fn quotient_log(x: &HermitianPoint, g: &HermitianPoint, levels: QuotientLevels) -> Result<f64> {
    symfun::f_value(&eigen_wrt_metric(x, g)?, levels)
}

/// `S_k(λ(X, g)) / C(n, k)`: the density of `X^k ∧ ω^{n-k}` against `ωⁿ`.
pub fn wedge_ratio(x: &HermitianPoint, g: &HermitianPoint, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let lambda = eigen_wrt_metric(x, g)?;
    Ok(symfun::elementary_sym(&lambda, k)? / symfun::binomial(lambda.dim(), k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let lam = eigen_wrt_metric(&HermitianPoint::diagonal(&[2.0, 3.0]), &HermitianPoint::identity(2)).unwrap();
        assert_eq!(lam.values(), &[3.0, 2.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let x = HermitianPoint::from_rows(2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]).unwrap();
        let lam = eigen_wrt_metric(&x, &HermitianPoint::identity(2)).unwrap();
        assert!((lam.values()[0] - 3.0).abs() < 1e-15);
        assert!((lam.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_pencil() {
        let g = HermitianPoint::from_rows(
            3,
            &[c(2.0, 0.0), c(0.3, 0.1), c(0.0, 0.2), c(0.3, -0.1), c(1.5, 0.0), c(0.1, 0.0), c(0.0, -0.2), c(0.1, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let lam = eigen_wrt_metric(&g, &g).unwrap();
        for v in lam.values() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_three_by_three_trace_and_det() {
        let x = HermitianPoint::from_rows(
            3,
            &[c(1.0, 0.0), c(0.5, 0.5), c(-0.2, 0.3), c(0.5, -0.5), c(-2.0, 0.0), c(0.7, 0.0), c(-0.2, -0.3), c(0.7, 0.0), c(0.4, 0.0)],
        )
        .unwrap();
        let lam = eigen_wrt_metric(&x, &HermitianPoint::identity(3)).unwrap();
        let trace: f64 = lam.values().iter().sum();
        assert!((trace - x.trace()).abs() < 1e-12);
        assert!(lam.is_sorted_descending());
    }

    #[test]
    fn frame_diagonal_of_self_is_eigenvalues() {
        let x = HermitianPoint::from_rows(
            3,
            &[c(3.0, 0.0), c(0.5, 0.5), c(0.0, 0.3), c(0.5, -0.5), c(2.0, 0.0), c(0.7, 0.0), c(0.0, -0.3), c(0.7, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let (lam, diag) = eigen_frame_diagonal(&x, &x, &HermitianPoint::identity(3)).unwrap();
        for (a, b) in lam.values().iter().zip(diag.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let (_, id) = eigen_frame_diagonal(&x, &HermitianPoint::identity(3), &HermitianPoint::identity(3)).unwrap();
        for v in id {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_positive_metric_rejected() {
        let g = HermitianPoint::diagonal(&[1.0, -1.0]);
        assert!(matches!(eigen_wrt_metric(&HermitianPoint::identity(2), &g), Err(Error::Metric(_))));
    }

    #[test]
    fn quotient_log_examples() {
        let id = HermitianPoint::identity(2);
        let lv = QuotientLevels::new(2, 1).unwrap();
        assert_eq!(quotient_log(&id.scaled(2.0), &id, lv).unwrap(), 0.0);
        assert!((quotient_log(&id, &id, lv).unwrap() - 0.5_f64.ln()).abs() < 1e-15);
        let x = HermitianPoint::diagonal(&[1.0, 2.0, 3.0]);
        let v = quotient_log(&x, &HermitianPoint::identity(3), QuotientLevels::new(3, 0).unwrap()).unwrap();
        assert!((v - 6.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn wedge_ratio_examples() {
        let id = HermitianPoint::identity(2);
        let x = HermitianPoint::diagonal(&[1.5, -0.25]);
        assert!((wedge_ratio(&x, &id, 2).unwrap() - 1.5 * -0.25).abs() < 1e-15);
        assert!((wedge_ratio(&x, &id, 1).unwrap() - 0.625).abs() < 1e-15);
        assert_eq!(wedge_ratio(&x, &id, 0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        assert!(HermitianPoint::from_rows(2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]).is_err());
    }
}
