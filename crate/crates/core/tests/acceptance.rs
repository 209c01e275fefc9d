//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 2 is known red at the pinned grid: linear interpolation of the
//! Fubini–Study potential with spacing h = 0.01 biases height and volume by
//! about h²/36 ≈ 2.8e-6, above the 1e-6 budget. It is reported as FAIL and
//! does not abort the run; any other red line exits nonzero.

use std::time::Instant;

use toric_height::cli::report::{emit, Format, Report, Settings};
use toric_height::harness::{
    convergence_study, fixtures, run_suite, Check, ConvergenceTable, SuiteConfig,
};
use toric_height::{MetricFunction, SamplingGrid};

const KNOWN_RED: &[usize] = &[2];

struct Outcome {
    id: usize,
    passed: bool,
    detail: String,
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

/// Composite Simpson on `[0, 1]` of the binary entropy in nats, an oracle
/// independent of the PWL machinery: `-∫ x ln x + (1 - x) ln(1 - x) = 1/2`.
fn entropy_integral(n: usize) -> f64 {
    let f = |x: f64| {
        let xlx = |t: f64| if t == 0.0 { 0.0 } else { t * t.ln() };
        -(xlx(x) + xlx(1.0 - x))
    };
    let h = 1.0 / n as f64;
    let mut acc = f(0.0) + f(1.0);
    for k in 1..n {
        acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (a0, a_inf) in [(0.0, 1.0), (1.0, 1.0)] {
        let m = fixtures::canonical(a0, a_inf);
        worst = worst.max(m.height().abs()).max(m.chi_volume().abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome {
        id: 1,
        passed: worst <= 1e-12 && elapsed < 1.0,
        detail: format!("max |height|, |chi| = {worst:e}; {elapsed:.3}s"),
    }
}

fn criterion_2() -> Outcome {
    let oracle = entropy_integral(20_000);
    let m = fixtures::fubini_study();
    let (h, chi) = (m.height(), m.chi_volume());
    let roof_half = m.roof().evaluate(0.5);
    let roof_ok = within(roof_half, 0.5 * 2f64.ln(), 1e-6);
    let height_ok = within(h, 0.5, 1e-6) && within(chi, 0.5, 1e-6);
    let oracle_ok = within(oracle, 0.5, 1e-9);
    let fine = MetricFunction::fubini_study_on(SamplingGrid::new(20.0, 40_001).expect("grid"))
        .expect("sampled");
    Outcome {
        id: 2,
        passed: roof_ok && height_ok && oracle_ok,
        detail: format!(
            "height - 0.5 = {:e}, chi - 0.5 = {:e} (budget 1e-6: {}); roof(1/2) - ln2/2 = {:e} ({}); \
             quadrature oracle - 0.5 = {:e}; on 40001 points height - 0.5 = {:e}",
            h - 0.5,
            chi - 0.5,
            if height_ok { "ok" } else { "exceeded" },
            roof_half - 0.5 * 2f64.ln(),
            if roof_ok { "ok" } else { "exceeded" },
            oracle - 0.5,
            fine.height() - 0.5,
        ),
    }
}

fn criterion_3() -> Outcome {
    let r = fixtures::tent(0.4).verify();
    let checks = [
        within(r.chi_volume, 0.2, 1e-12),
        within(r.height, 0.0, 1e-12),
        within(r.gap, 0.2, 1e-12),
        within(r.energy, 0.2, 1e-12),
        within(r.orthogonality_residual, 0.0, 1e-12),
    ];
    Outcome {
        id: 3,
        passed: checks.iter().all(|&c| c),
        detail: format!(
            "chi {} height {} gap {} energy {} orthogonality {}",
            r.chi_volume, r.height, r.gap, r.energy, r.orthogonality_residual
        ),
    }
}

fn suite_report_text(config: &SuiteConfig) -> String {
    let report = run_suite(config);
    emit(
        &Report {
            settings: Settings {
                command: "suite".into(),
                tol: None,
                seed: config.seed(),
                trials: config.trials(),
                grid_half_width: SamplingGrid::default().half_width,
                grid_points: SamplingGrid::default().points,
                widths: Vec::new(),
            },
            body: toric_height::cli::report::Body::Suite(report),
        },
        Format::Json,
    )
}

fn criterion_4(config: &SuiteConfig) -> Outcome {
    let start = Instant::now();
    let report = run_suite(config);
    let elapsed = start.elapsed().as_secs_f64();
    let required = [
        Check::VolumeGap,
        Check::SemipositiveEquality,
        Check::RoofInvariance,
        Check::HeightDomination,
        Check::Orthogonality,
        Check::EnergyIdentity,
        Check::MassConservation,
        Check::ScalingCovariance,
        Check::SupNormConsistency,
    ];
    let failing: Vec<&str> = required
        .iter()
        .filter(|&&c| report.check(c).passed != report.trials)
        .map(|c| c.name())
        .collect();
    Outcome {
        id: 4,
        passed: failing.is_empty() && report.all_passed() && elapsed < 30.0,
        detail: format!(
            "{} trials, {} failing checks {:?}; {elapsed:.2}s",
            report.trials, report.failure_count, failing
        ),
    }
}

fn convergence_ok(table: &ConvergenceTable) -> bool {
    table.sup_strictly_decreasing() && table.rows.iter().all(|r| table.height_bound_holds(r))
}

fn criterion_5() -> Outcome {
    let widths = [0.2, 0.1, 0.05];
    let tent = convergence_study(&fixtures::tent(0.4), &widths).expect("study");
    let fs = convergence_study(&fixtures::fubini_study(), &widths).expect("study");
    let ratios = |t: &ConvergenceTable| -> Vec<String> {
        t.rows
            .iter()
            .map(|r| {
                format!(
                    "{:.3}",
                    (r.height - t.limit.height).abs() / (t.degree * r.sup_distance)
                )
            })
            .collect()
    };
    Outcome {
        id: 5,
        passed: convergence_ok(&tent) && convergence_ok(&fs),
        detail: format!(
            "|dh|/(deg*sup) tent {:?}, fubini-study {:?} (bound 4)",
            ratios(&tent),
            ratios(&fs)
        ),
    }
}

fn criterion_6(config: &SuiteConfig) -> Outcome {
    let first = suite_report_text(config);
    let second = suite_report_text(config);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(|| suite_report_text(config));
    let passed = first == second && first == serial;
    Outcome {
        id: 6,
        passed,
        detail: format!(
            "{} bytes, repeated and single-threaded runs {}",
            first.len(),
            if passed { "identical" } else { "differ" }
        ),
    }
}

fn main() {
    let config = SuiteConfig::default();
    let outcomes = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(&config),
        criterion_5(),
        criterion_6(&config),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && KNOWN_RED.contains(&o.id) {
            " [known red]"
        } else {
            ""
        };
        println!("criterion {}: {status}{note} — {}", o.id, o.detail);
        if !o.passed && !KNOWN_RED.contains(&o.id) {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
