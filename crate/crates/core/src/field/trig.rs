use std::f64::consts::PI;

use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};
use crate::hermitian::HermitianPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeKind {
    Cos,
    Sin,
}

/// `amplitude · cos(2π k·x)` (or `sin`) for an integer frequency vector `k`
/// over the real coordinates `(x¹, y¹, …, xⁿ, yⁿ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMode {
    pub freq: Vec<i32>,
    pub amplitude: f64,
    pub kind: ModeKind,
}

impl FourierMode {
    pub fn new(freq: Vec<i32>, amplitude: f64, kind: ModeKind) -> Self {
        FourierMode { freq, amplitude, kind }
    }

    fn phase(&self, x: &[f64]) -> f64 {
        2.0 * PI * self.freq.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum::<f64>()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let p = self.phase(x);
        self.amplitude
            * match self.kind {
                ModeKind::Cos => p.cos(),
                ModeKind::Sin => p.sin(),
            }
    }
}

/// A real trigonometric polynomial on the torus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPoly {
    modes: Vec<FourierMode>,
}

impl TrigPoly {
    pub fn new(modes: Vec<FourierMode>) -> Self {
        TrigPoly { modes }
    }

    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| m.amplitude == 0.0)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.modes.iter().map(|m| m.eval(x)).sum()
    }

    /// Exact `∂∂̄` of the polynomial at `x`.
    ///
    /// Every mode satisfies `∂_a ∂_b f = -(2π)² k_a k_b f`, so
    /// `f_{ij̄} = -π² f · [(kxᵢkxⱼ + kyᵢkyⱼ) + i(kxᵢkyⱼ - kyᵢkxⱼ)]`.
    pub fn complex_hessian(&self, n: usize, x: &[f64]) -> HermitianPoint {
        let mut m = HermitianPoint::zeros(n);
        for mode in &self.modes {
            let f = mode.eval(x);
            let k = |a: usize| mode.freq.get(a).copied().unwrap_or(0) as f64;
            for i in 0..n {
                for j in i..n {
                    let re = k(2 * i) * k(2 * j) + k(2 * i + 1) * k(2 * j + 1);
                    let im = k(2 * i) * k(2 * j + 1) - k(2 * i + 1) * k(2 * j);
                    let add = Complex64::new(re, im) * (-PI * PI * f);
                    m.set(i, j, m.get(i, j) + add);
                }
            }
        }
        m
    }

    /// Frequency vectors must have length `2n`; toy grids only allow `(x¹, y¹)` dependence.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        for mode in &self.modes {
            if mode.freq.len() != 2 * grid.n() {
                return Err(Error::domain(format!(
                    "mode {:?} needs {} frequencies for n={}",
                    mode.freq,
                    2 * grid.n(),
                    grid.n()
                )));
            }
            if grid.is_toy() && mode.freq[2..].iter().any(|&k| k != 0) {
                return Err(Error::domain(format!("mode {:?} depends on more than (x1, y1) in toy mode", mode.freq)));
            }
            if !mode.amplitude.is_finite() {
                return Err(Error::domain("mode amplitude must be finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_sines_as_two_cosines() {
        // sin(2πx)sin(2πy) = ½cos(2π(x-y)) - ½cos(2π(x+y))
        let p = TrigPoly::new(vec![
            FourierMode::new(vec![1, -1, 0, 0], 0.5, ModeKind::Cos),
            FourierMode::new(vec![1, 1, 0, 0], -0.5, ModeKind::Cos),
        ]);
        let x = [0.13, 0.71, 0.0, 0.0];
        let want = (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
        assert!((p.value(&x) - want).abs() < 1e-14);
        // ∂∂̄ in the first slot: ¼Δ = -2π² · value
        let h = p.complex_hessian(2, &x);
        assert!((h.get(0, 0).re + 2.0 * PI * PI * want).abs() < 1e-12);
        assert_eq!(h.get(1, 1).re, 0.0);
    }

    #[test]
    fn toy_grid_rejects_other_axes() {
        let g = Grid::new(2, 8, true).unwrap();
        let p = TrigPoly::new(vec![FourierMode::new(vec![0, 0, 1, 0], 1.0, ModeKind::Sin)]);
        assert!(p.check_grid(&g).is_err());
        let short = TrigPoly::new(vec![FourierMode::new(vec![1, 0], 1.0, ModeKind::Sin)]);
        assert!(short.check_grid(&g).is_err());
    }
}
