//! Seeded comparison of the fast kernels against [`crate::oracle`].
//!
//! Relative deviations are measured against the magnitude that bounds the
//! roundoff of each quantity (`S_k(|λ|)` for symmetric functions, a power of
//! the entry size for mixed densities), so cancellation does not read as error.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{mixed_density, ChiSpec, FourierMode, Grid, ModeKind, ScalarField, TorusGeometry, TrigPoly};
use crate::functionals;
use crate::hermitian::HermitianPoint;
use crate::oracle;
use crate::symfun::{self, EigenTuple, QuotientLevels};

/// Largest dimension every oracle in the battery supports.
pub const MAX_SELFTEST_DIM: usize = 6;

pub const GRADIENT_LEVELS: [(usize, usize); 5] = [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelftestConfig {
    pub seed: u64,
    pub samples: usize,
    pub max_n: usize,
    /// Perturbs the fast `S_k` by a relative 1e-6 before comparison.
    pub inject_fault: bool,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { seed: 0, samples: 2000, max_n: MAX_SELFTEST_DIM, inject_fault: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub samples: usize,
    pub max_deviation: f64,
    pub bound: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.bound
    }
}

pub struct Battery {
    rng: ChaCha8Rng,
    max_n: usize,
    inject_fault: bool,
}

impl Battery {
    pub fn new(seed: u64, max_n: usize, inject_fault: bool) -> Result<Self> {
        if !(2..=MAX_SELFTEST_DIM).contains(&max_n) {
            return Err(Error::domain(format!("max_n={max_n} outside the oracle range 2..={MAX_SELFTEST_DIM}")));
        }
        Ok(Battery { rng: ChaCha8Rng::seed_from_u64(seed), max_n, inject_fault })
    }

    fn dim(&mut self, lo: usize) -> usize {
        self.rng.gen_range(lo.min(self.max_n)..=self.max_n)
    }

    fn tuple(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.rng.gen_range(lo..hi)).collect()
    }

    /// A point of `Γ^k` with `λ - margin·𝟙` still inside, by rejection.
    fn cone_point(&mut self, n: usize, k: usize, margin: f64) -> EigenTuple {
        assert!(k <= n, "no cone Γ^{k} in dimension {n}");
        loop {
            let v = self.tuple(n, -1.0, 4.0);
            let shifted: Vec<f64> = v.iter().map(|x| x - margin).collect();
            let ok = EigenTuple::new(&shifted).and_then(|s| symfun::in_gamma_k(&s, k)).unwrap_or(false);
            if ok {
                return EigenTuple::new(&v).expect("finite sample");
            }
        }
    }

    fn fast_sym(&self, lambda: &EigenTuple, k: usize) -> Result<f64> {
        let s = symfun::elementary_sym(lambda, k)?;
        Ok(if self.inject_fault { s * (1.0 + 1e-6) } else { s })
    }

    /// `elementary_sym` and `elementary_sym_excl` against subset enumeration.
    pub fn symmetric_functions(&mut self, samples: usize) -> Result<CheckOutcome> {
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let n = self.dim(2);
            let v = self.tuple(n, -3.0, 3.0);
            let lambda = EigenTuple::new(&v)?;
            let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            let k = self.rng.gen_range(0..=n);
            let scale = oracle::sym_enum(&abs, k)?.value.max(1.0);
            worst = worst.max((self.fast_sym(&lambda, k)? - oracle::sym_enum(&v, k)?.value).abs() / scale);

            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut self.rng);
            let excluded = &idx[..self.rng.gen_range(1..=2.min(n - 1))];
            let rest: Vec<f64> = (0..n).filter(|i| !excluded.contains(i)).map(|i| v[i]).collect();
            let rest_abs: Vec<f64> = rest.iter().map(|x| x.abs()).collect();
            let m = self.rng.gen_range(0..=rest.len());
            let fast = symfun::elementary_sym_excl(&lambda, m as isize, excluded)?;
            let scale = oracle::sym_enum(&rest_abs, m)?.value.max(1.0);
            worst = worst.max((fast - oracle::sym_enum(&rest, m)?.value).abs() / scale);
        }
        Ok(CheckOutcome { name: "symmetric_functions", samples, max_deviation: worst, bound: 1e-12 })
    }

    /// `Σ_i λ_i S_{k-1;i} = k S_k` and `S_k = S_{k;i} + λ_i S_{k-1;i}`.
    pub fn symmetric_identities(&mut self, samples: usize) -> Result<CheckOutcome> {
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let n = self.dim(2);
            let v = self.tuple(n, -3.0, 3.0);
            let lambda = EigenTuple::new(&v)?;
            let abs = EigenTuple::new(&v.iter().map(|x| x.abs()).collect::<Vec<_>>())?;
            let k = self.rng.gen_range(1..=n);
            let s_k = self.fast_sym(&lambda, k)?;
            let scale = (k as f64 * symfun::elementary_sym(&abs, k)?).max(1.0);
            let mut euler = 0.0;
            for i in 0..n {
                let below = symfun::elementary_sym_excl(&lambda, k as isize - 1, &[i])?;
                euler += v[i] * below;
                let split = symfun::elementary_sym_excl(&lambda, k as isize, &[i])? + v[i] * below;
                worst = worst.max((split - s_k).abs() / scale);
            }
            worst = worst.max((euler - k as f64 * s_k).abs() / scale);
        }
        Ok(CheckOutcome { name: "symmetric_identities", samples, max_deviation: worst, bound: 1e-12 })
    }

    fn random_levels(&mut self, n: usize) -> QuotientLevels {
        let k = self.rng.gen_range(1..=n);
        let l = self.rng.gen_range(0..k);
        QuotientLevels::new(k, l).expect("k > l")
    }

    /// Minus the smallest `F^{iī}` seen on cone samples; passes when negative.
    pub fn ellipticity(&mut self, samples: usize) -> Result<CheckOutcome> {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let n = self.dim(2);
            let levels = self.random_levels(n);
            let lambda = self.cone_point(n, levels.k(), 0.0);
            let grad = symfun::f_gradient_diag(&lambda, levels)?;
            worst = worst.max(grad.iter().map(|g| -g).fold(f64::NEG_INFINITY, f64::max));
        }
        // strictly positive F^{iī} means every deviation is below zero
        Ok(CheckOutcome { name: "ellipticity", samples, max_deviation: worst, bound: -f64::MIN_POSITIVE })
    }

    /// Worst `(f(λ) + f(μ))/2 - f((λ+μ)/2)`.
    pub fn concavity(&mut self, samples: usize) -> Result<CheckOutcome> {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let n = self.dim(2);
            let levels = self.random_levels(n);
            let a = self.cone_point(n, levels.k(), 0.0);
            let b = self.cone_point(n, levels.k(), 0.0);
            let mid: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x + y)).collect();
            let chord = 0.5 * (symfun::f_value(&a, levels)? + symfun::f_value(&b, levels)?);
            worst = worst.max(chord - symfun::f_value(&EigenTuple::new(&mid)?, levels)?);
        }
        Ok(CheckOutcome { name: "concavity", samples, max_deviation: worst, bound: 1e-10 })
    }

    /// `fd_check_gradient` over [`GRADIENT_LEVELS`]; `samples` per pair.
    pub fn gradient(&mut self, samples: usize) -> Result<CheckOutcome> {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let max_n = self.max_n;
        for (k, l) in GRADIENT_LEVELS.into_iter().filter(|&(k, _)| k <= max_n) {
            let levels = QuotientLevels::new(k, l)?;
            for _ in 0..samples {
                let n = self.dim(k);
                count += 1;
                let lambda = self.cone_point(n, k, 0.25);
                worst = worst.max(oracle::fd_check_gradient(&lambda, levels, 1e-5)?.value);
            }
        }
        Ok(CheckOutcome { name: "gradient", samples: count, max_deviation: worst, bound: 1e-6 })
    }

    fn hermitian(&mut self, n: usize) -> HermitianPoint {
        let mut m = HermitianPoint::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(self.rng.gen_range(-2.0..2.0), 0.0));
            for j in i + 1..n {
                m.set(i, j, Complex64::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0)));
            }
        }
        m
    }

    /// Interpolated mixed densities against the composite-determinant expansion.
    pub fn mixed_densities(&mut self, samples: usize) -> Result<CheckOutcome> {
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let n = self.rng.gen_range(2..=self.max_n.min(3));
            let a = self.hermitian(n);
            let b = self.hermitian(n);
            let m = self.rng.gen_range(0..=n);
            let i = self.rng.gen_range(0..=m);
            let g = HermitianPoint::identity(n);
            let fast = mixed_density(&a, &b, &g, i, m - i)?;
            let slow = oracle::mixed_determinant(&a, &b, &g, i, m - i)?.value;
            let scale = (1.0 + a.frobenius_norm() + b.frobenius_norm()).powi(m as i32);
            worst = worst.max((fast - slow).abs() / scale);
        }
        Ok(CheckOutcome { name: "mixed_density", samples, max_deviation: worst, bound: 1e-10 })
    }

    /// Closed-form `J_l` against the Simpson path integral on random toy fields.
    pub fn j_path_independence(&mut self, fields: usize) -> Result<CheckOutcome> {
        let grid = Grid::new(2, 8, true)?;
        let rho = TrigPoly::new(vec![FourierMode::new(vec![1, 1, 0, 0], 0.01, ModeKind::Cos)]);
        let geometry = TorusGeometry::new(grid, ChiSpec { scale: 2.0, rho }, 2)?;
        let mut worst: f64 = 0.0;
        for _ in 0..fields {
            let modes: Vec<FourierMode> = (0..3)
                .map(|_| {
                    let freq = vec![self.rng.gen_range(-2..=2), self.rng.gen_range(-2..=2), 0, 0];
                    let kind = if self.rng.gen_bool(0.5) { ModeKind::Cos } else { ModeKind::Sin };
                    FourierMode::new(freq, self.rng.gen_range(-0.02..0.02), kind)
                })
                .collect();
            let offset = self.rng.gen_range(-0.5..0.5);
            let poly = TrigPoly::new(modes);
            let u = ScalarField::from_fn(grid, |x| poly.value(x) + offset);
            for l in 0..=2 {
                let closed = functionals::j_functional(&u, &geometry, l)?.value;
                let path = oracle::path_integral_j(&u, &geometry, l, 21)?.value;
                worst = worst.max((closed - path).abs());
            }
        }
        Ok(CheckOutcome { name: "j_path_independence", samples: fields, max_deviation: worst, bound: 1e-6 })
    }
}

/// The whole battery with sample counts derived from `config.samples`.
pub fn run_battery(config: &SelftestConfig) -> Result<Vec<CheckOutcome>> {
    if config.samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    let mut battery = Battery::new(config.seed, config.max_n, config.inject_fault)?;
    let s = config.samples;
    Ok(vec![
        battery.symmetric_functions(s)?,
        battery.symmetric_identities(s)?,
        battery.ellipticity(s)?,
        battery.concavity(s.div_ceil(10))?,
        battery.gradient(s.div_ceil(50))?,
        battery.mixed_densities(s.div_ceil(10))?,
        battery.j_path_independence(s.div_ceil(200).min(50))?,
    ])
}
