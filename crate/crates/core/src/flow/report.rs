use std::io::Write;

use crate::error::{Error, Result};
use crate::field::ScalarField;

pub const CSV_HEADER: &str = "t,dt,min_dtu,max_dtu,osc_dtu,J_l,residual_inf,b_est";

/// Monitors recorded after each accepted step (and at `t = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub min_dtu: f64,
    pub max_dtu: f64,
    pub osc_dtu: f64,
    pub j_l: f64,
    pub residual_inf: f64,
    pub b_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    MaxSteps,
    ConeExit,
    BlowUp,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::MaxSteps => "max_steps",
            RunStatus::ConeExit => "cone_exit",
            RunStatus::BlowUp => "blow_up",
        }
    }
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaSample {
    pub step: usize,
    pub t: f64,
    pub theta_min: f64,
}

#[derive(Clone, Debug)]
pub struct FlowReport {
    pub series: Vec<SeriesRecord>,
    pub status: RunStatus,
    /// Message of the error that stopped the run, for cone exits and blow-ups.
    pub failure: Option<String>,
    pub final_u: ScalarField,
    pub final_u_hat: ScalarField,
    pub final_b: f64,
    pub b_integral: f64,
    pub b_consistent: bool,
    /// Elliptic residual of `û` with `b = final_b`.
    pub residual_inf: f64,
    /// `None` when the series has too few usable records for a fit.
    pub decay_rate: Option<f64>,
    pub decay_r_squared: Option<f64>,
    pub cone_retries: usize,
    pub theta_samples: Vec<ThetaSample>,
    pub spacing: f64,
}

impl FlowReport {
    /// Steps where `max ∂_t u` rose or `min ∂_t u` fell by more than
    /// `(1e-6 + 10h²)·dt`.
    pub fn max_principle_violations(&self) -> usize {
        let rate = 1e-6 + 10.0 * self.spacing * self.spacing;
        self.series
            .windows(2)
            .filter(|w| {
                let slack = rate * w[1].dt;
                w[1].max_dtu > w[0].max_dtu + slack || w[1].min_dtu < w[0].min_dtu - slack
            })
            .count()
    }

    /// Steps where `J_l` increased by more than `tol`.
    pub fn j_monotonicity_violations(&self, tol: f64) -> usize {
        self.series.windows(2).filter(|w| w[1].j_l > w[0].j_l + tol).count()
    }

    pub fn theta_min(&self) -> Option<f64> {
        self.theta_samples.iter().map(|s| s.theta_min).reduce(f64::min)
    }

    pub fn steps(&self) -> usize {
        self.series.last().map_or(0, |r| r.step)
    }

    pub fn final_time(&self) -> f64 {
        self.series.last().map_or(0.0, |r| r.t)
    }
}

/// Least-squares fit of `log osc(∂_t u)` against `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Minus the fitted slope.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: usize,
}

const MIN_RECORDS: usize = 10;

/// Fits the trailing half of the records with `t >= 1` and `osc > 1e-13`.
pub fn decay_fit(series: &[SeriesRecord]) -> Result<DecayFit> {
    let usable: Vec<(f64, f64)> =
        series.iter().filter(|r| r.t >= 1.0 && r.osc_dtu > 1e-13).map(|r| (r.t, r.osc_dtu.ln())).collect();
    if usable.len() < MIN_RECORDS {
        return Err(Error::Estimation(format!("{} usable records, need {MIN_RECORDS}", usable.len())));
    }
    let tail = &usable[usable.len() / 2..];
    let m = tail.len() as f64;
    let mean_t = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let stt: f64 = tail.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sty: f64 = tail.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let slope = sty / stt;
    let ss_tot: f64 = tail.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = tail.iter().map(|p| (p.1 - mean_y - slope * (p.0 - mean_t)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit { rate: -slope, r_squared, samples: tail.len() })
}

/// `c₀` in `osc(∂_t u) ≈ C e^{-c₀ t}`.
pub fn estimate_decay_rate(report: &FlowReport) -> Result<f64> {
    decay_fit(&report.series).map(|f| f.rate)
}

/// One row per `every` steps, always including the last record.
pub fn write_series_csv<W: Write>(mut w: W, series: &[SeriesRecord], every: usize) -> Result<()> {
    if every == 0 {
        return Err(Error::domain("csv sampling period must be at least 1"));
    }
    writeln!(w, "{CSV_HEADER}")?;
    for (i, r) in series.iter().enumerate() {
        if r.step % every != 0 && i + 1 != series.len() {
            continue;
        }
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t, r.dt, r.min_dtu, r.max_dtu, r.osc_dtu, r.j_l, r.residual_inf, r.b_estimate
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(osc: impl Fn(f64) -> f64, count: usize, dt: f64) -> Vec<SeriesRecord> {
        (0..count)
            .map(|s| {
                let t = s as f64 * dt;
                SeriesRecord {
                    step: s,
                    t,
                    dt,
                    min_dtu: -osc(t) / 2.0,
                    max_dtu: osc(t) / 2.0,
                    osc_dtu: osc(t),
                    j_l: -t,
                    residual_inf: 0.0,
                    b_estimate: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn exact_exponential_rate() {
        let series = synthetic(|t| 3.0 * (-2.0 * t).exp(), 200, 0.05);
        let fit = decay_fit(&series).unwrap();
        assert!((fit.rate - 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        let fit = decay_fit(&synthetic(|_| 0.5, 100, 0.1)).unwrap();
        assert!(fit.rate.abs() < 1e-15);
    }

    #[test]
    fn too_few_records() {
        assert!(matches!(decay_fit(&synthetic(|_| 0.5, 15, 0.1)), Err(Error::Estimation(_))));
        // everything below the floor is unusable
        assert!(decay_fit(&synthetic(|_| 1e-14, 100, 0.1)).is_err());
    }

    #[test]
    fn csv_layout_and_thinning() {
        let series = synthetic(|t| (-t).exp(), 7, 0.5);
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &series, 3).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        // steps 0, 3, 6
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0e0,5e-1,"));
        for line in &lines[1..] {
            let parsed: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(parsed.len(), 8);
        }
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &series[..6], 4).unwrap();
        // steps 0, 4 and the final step 5
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
