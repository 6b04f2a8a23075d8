//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qflow_core::field::{oscillation, ChiSpec, FourierMode, Grid, ModeKind, ScalarField, TorusGeometry, TrigPoly};
use qflow_core::flow::{self, write_series_csv, FlowConfig, FlowReport, RunStatus};
use qflow_core::functionals;
use qflow_core::selftest::Battery;
use qflow_core::QuotientLevels;

const SEED: u64 = 20240611;

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn levels() -> QuotientLevels {
    QuotientLevels::new(2, 1).unwrap()
}

fn toy_grid(points: usize) -> Grid {
    Grid::new(2, points, true).unwrap()
}

fn mode(freq: [i32; 2], amplitude: f64, kind: ModeKind) -> FourierMode {
    FourierMode::new(vec![freq[0], freq[1], 0, 0], amplitude, kind)
}

/// `0.05·sin(2πx¹)sin(2πy¹)` as two cosine modes.
fn donaldson_target() -> TrigPoly {
    TrigPoly::new(vec![mode([1, -1], 0.025, ModeKind::Cos), mode([1, 1], -0.025, ModeKind::Cos)])
}

struct Run {
    label: String,
    report: FlowReport,
    elapsed: Duration,
    psi_dominates_c: bool,
}

fn run(label: &str, geometry: &TorusGeometry, config: &FlowConfig) -> Run {
    let start = Instant::now();
    let report = flow::run(config, geometry).unwrap_or_else(|e| panic!("{label}: {e}"));
    let elapsed = start.elapsed();
    let psi_dominates_c = functionals::psi_dominates_c(geometry, config).unwrap();
    Run { label: label.to_string(), report, elapsed, psi_dominates_c }
}

fn fixed_point_run() -> (Run, f64) {
    let rho = TrigPoly::new(vec![mode([1, 0], 0.05, ModeKind::Cos)]);
    let geometry = TorusGeometry::new(toy_grid(16), ChiSpec { scale: 2.0, rho }, 2).unwrap();
    let psi = flow::manufactured_psi(&geometry, &TrigPoly::zero(), levels()).unwrap();
    let config = FlowConfig::new(levels(), psi).unwrap();
    let r = run("fixed point", &geometry, &config);
    let u_inf = r.report.final_u.max_abs();
    (r, u_inf)
}

fn constant_shift_run() -> Run {
    let geometry = TorusGeometry::new(toy_grid(16), ChiSpec::flat(2.0), 2).unwrap();
    let c = functionals::constant_c(&geometry, levels()).unwrap();
    let psi = ScalarField::constant(geometry.grid(), c * 0.1f64.exp());
    let config = FlowConfig::new(levels(), psi).unwrap();
    run("constant shift", &geometry, &config)
}

struct Donaldson {
    run: Run,
    max_error: f64,
    spacing: f64,
    csv: Vec<u8>,
}

fn donaldson_run(points: usize) -> Donaldson {
    let geometry = TorusGeometry::new(toy_grid(points), ChiSpec::flat(2.0), 2).unwrap();
    let target = donaldson_target();
    let psi = flow::manufactured_psi(&geometry, &target, levels()).unwrap();
    let mut config = FlowConfig::new(levels(), psi).unwrap().with_subsolution(ScalarField::zeros(geometry.grid())).unwrap();
    config.snapshot_every = 200;
    let r = run(&format!("donaldson N={points}"), &geometry, &config);
    let u_star_hat = functionals::normalize(&flow::sample(geometry.grid(), &target), &geometry, 1).unwrap();
    let max_error = r.report.final_u_hat.add_scaled(&u_star_hat, -1.0).unwrap().max_abs();
    let mut csv = Vec::new();
    write_series_csv(&mut csv, &r.report.series, 1).unwrap();
    Donaldson { run: r, max_error, spacing: geometry.grid().spacing(), csv }
}

/// Donaldson-type run with `ψ ≡ c` and a non-flat `χ`, where `ψ >= c` holds.
fn balanced_run() -> Run {
    let rho = TrigPoly::new(vec![mode([1, 1], 0.04, ModeKind::Cos)]);
    let geometry = TorusGeometry::new(toy_grid(16), ChiSpec { scale: 2.0, rho }, 2).unwrap();
    let c = functionals::constant_c(&geometry, levels()).unwrap();
    let config = FlowConfig::new(levels(), ScalarField::constant(geometry.grid(), c)).unwrap();
    run("balanced psi = c", &geometry, &config)
}

fn criterion_1(battery: &mut Battery) -> Line {
    let start = Instant::now();
    let a = battery.symmetric_functions(10_000).unwrap();
    let b = battery.symmetric_identities(10_000).unwrap();
    let t = start.elapsed();
    Line {
        id: 1,
        title: "symmetric functions vs subset enumeration",
        pass: a.passed() && b.passed() && t < Duration::from_secs(10),
        detail: format!("max rel dev {:.2e}, identities {:.2e}, {:.2?}", a.max_deviation, b.max_deviation, t),
    }
}

fn criterion_2(battery: &mut Battery) -> Line {
    let start = Instant::now();
    let a = battery.ellipticity(10_000).unwrap();
    let b = battery.concavity(1_000).unwrap();
    let t = start.elapsed();
    Line {
        id: 2,
        title: "ellipticity and concavity",
        pass: a.passed() && b.passed() && t < Duration::from_secs(10),
        detail: format!("min F^ii {:.2e}, worst concavity gap {:.2e}, {:.2?}", -a.max_deviation, b.max_deviation, t),
    }
}

fn criterion_3(battery: &mut Battery) -> Line {
    let r = battery.gradient(1_000).unwrap();
    Line {
        id: 3,
        title: "gradient vs finite differences",
        pass: r.passed(),
        detail: format!("{} points, max dev {:.2e}", r.samples, r.max_deviation),
    }
}

fn criterion_4(battery: &mut Battery) -> Line {
    let r = battery.mixed_densities(1_000).unwrap();
    Line { id: 4, title: "mixed density vs mixed determinant", pass: r.passed(), detail: format!("max rel dev {:.2e}", r.max_deviation) }
}

fn criterion_5(battery: &mut Battery) -> Line {
    let r = battery.j_path_independence(50).unwrap();
    Line { id: 5, title: "J_l path independence", pass: r.passed(), detail: format!("50 fields, max abs dev {:.2e}", r.max_deviation) }
}

fn main() -> ExitCode {
    let mut lines = Vec::new();
    let mut battery = Battery::new(SEED, 6, false).unwrap();
    lines.push(criterion_1(&mut battery));
    lines.push(criterion_2(&mut battery));
    lines.push(criterion_3(&mut battery));
    lines.push(criterion_4(&mut battery));
    lines.push(criterion_5(&mut battery));

    let (fixed, u_inf) = fixed_point_run();
    lines.push(Line {
        id: 6,
        title: "fixed point",
        pass: fixed.report.status == RunStatus::Converged
            && fixed.report.steps() == 0
            && u_inf <= 1e-14
            && fixed.report.final_b.abs() <= 1e-12
            && fixed.report.residual_inf <= 1e-12
            && fixed.elapsed < Duration::from_secs(5),
        detail: format!(
            "{} after {} steps, |u| {:.1e}, b {:.1e}, residual {:.1e}, {:.2?}",
            fixed.report.status,
            fixed.report.steps(),
            u_inf,
            fixed.report.final_b,
            fixed.report.residual_inf,
            fixed.elapsed
        ),
    });

    let shift = constant_shift_run();
    let shift_osc = oscillation(&shift.report.final_u_hat);
    lines.push(Line {
        id: 7,
        title: "constant shift",
        pass: shift.report.status == RunStatus::Converged
            && (shift.report.final_b + 0.1).abs() <= 1e-6
            && shift_osc <= 1e-8
            && shift.report.b_consistent,
        detail: format!("{}, b {:.12}, osc(u_hat) {:.1e}", shift.report.status, shift.report.final_b, shift_osc),
    });

    let coarse = donaldson_run(16);
    let fine = donaldson_run(32);
    let ratio = coarse.max_error / fine.max_error;
    let donaldson_ok = |d: &Donaldson| {
        let h2 = d.spacing * d.spacing;
        d.run.report.status == RunStatus::Converged && d.max_error <= h2 && d.run.report.residual_inf <= 1e-6 + 10.0 * h2
    };
    lines.push(Line {
        id: 8,
        title: "manufactured Donaldson-type solution",
        pass: donaldson_ok(&coarse) && donaldson_ok(&fine) && ratio >= 3.0 && fine.run.elapsed < Duration::from_secs(300),
        detail: format!(
            "errors {:.3e} / {:.3e} (h² = {:.2e} / {:.2e}), ratio {:.2}, residuals {:.1e} / {:.1e}, b {:.1e} / {:.1e}, N=32 in {:.1?}",
            coarse.max_error,
            fine.max_error,
            coarse.spacing * coarse.spacing,
            fine.spacing * fine.spacing,
            ratio,
            coarse.run.report.residual_inf,
            fine.run.report.residual_inf,
            coarse.run.report.final_b,
            fine.run.report.final_b,
            fine.run.elapsed
        ),
    });

    let balanced = balanced_run();
    let all_runs = [&fixed, &shift, &coarse.run, &fine.run, &balanced];

    let mp: Vec<String> = all_runs.iter().map(|r| format!("{} {}", r.label, r.report.max_principle_violations())).collect();
    lines.push(Line {
        id: 9,
        title: "maximum principle for d_t u",
        pass: all_runs.iter().all(|r| r.report.max_principle_violations() == 0),
        detail: format!("violations: {}", mp.join(", ")),
    });

    let cone_runs = [&fixed, &shift, &coarse.run, &fine.run];
    lines.push(Line {
        id: 10,
        title: "cone preservation",
        pass: cone_runs.iter().all(|r| r.report.status != RunStatus::ConeExit && r.report.cone_retries == 0),
        detail: format!(
            "statuses {}, dt halvings {}",
            cone_runs.iter().map(|r| r.report.status.as_str()).collect::<Vec<_>>().join("/"),
            cone_runs.iter().map(|r| r.report.cone_retries).sum::<usize>()
        ),
    });

    let dominated: Vec<&&Run> = all_runs.iter().filter(|r| r.psi_dominates_c).collect();
    lines.push(Line {
        id: 11,
        title: "J_l monotonicity when psi >= c",
        pass: !dominated.is_empty() && dominated.iter().all(|r| r.report.j_monotonicity_violations(1e-8) == 0),
        detail: format!(
            "runs with psi >= c: {}",
            dominated
                .iter()
                .map(|r| format!("{} ({} steps, {} violations)", r.label, r.report.steps(), r.report.j_monotonicity_violations(1e-8)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    });

    // The constant-shift run has osc(d_t u) = 0 from t = 0, so there is no
    // decay to fit; it is checked for staying at roundoff instead.
    let shift_flat = shift.report.series.iter().all(|r| r.osc_dtu <= 1e-13);
    let decay_runs = [&coarse.run, &fine.run, &balanced];
    let decay_ok = |r: &Run| matches!((r.report.decay_rate, r.report.decay_r_squared), (Some(c), Some(q)) if c > 0.0 && q >= 0.95);
    lines.push(Line {
        id: 12,
        title: "exponential decay of osc(d_t u)",
        pass: shift_flat && decay_runs.iter().all(|r| decay_ok(r)),
        detail: format!(
            "constant shift degenerate (osc identically {:.0e}); {}",
            shift.report.series.iter().map(|r| r.osc_dtu).fold(0.0, f64::max),
            decay_runs
                .iter()
                .map(|r| format!(
                    "{} rate {:.3} R² {:.4}",
                    r.label,
                    r.report.decay_rate.unwrap_or(f64::NAN),
                    r.report.decay_r_squared.unwrap_or(f64::NAN)
                ))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    });

    let theta_runs = [&coarse.run, &fine.run];
    lines.push(Line {
        id: 13,
        title: "dichotomy diagnostic with zero subsolution",
        pass: theta_runs.iter().all(|r| !r.report.theta_samples.is_empty() && r.report.theta_min().is_some_and(|t| t > 0.0)),
        detail: theta_runs
            .iter()
            .map(|r| format!("{}: {} samples, theta_min {:.3e}", r.label, r.report.theta_samples.len(), r.report.theta_min().unwrap_or(0.0)))
            .collect::<Vec<_>>()
            .join(", "),
    });

    let again = donaldson_run(32);
    lines.push(Line {
        id: 14,
        title: "determinism",
        pass: again.csv == fine.csv,
        detail: format!("N=32 series.csv {} bytes, identical: {}", fine.csv.len(), again.csv == fine.csv),
    });

    let mut failed = 0;
    for line in &lines {
        println!("criterion {:>2} {}: {} ({})", line.id, if line.pass { "PASS" } else { "FAIL" }, line.title, line.detail);
        if !line.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

