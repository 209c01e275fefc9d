//! Randomized metric generators and the batch runner for the inequality and
//! identity checks.
//!
//! Every trial draws its inputs from its own ChaCha stream: the key comes
//! from the suite seed and the stream number is the trial index, so results
//! do not depend on how trials are scheduled across threads. (Keying on
//! `seed ^ trial_index` instead would make nearby seeds permute the same set
//! of trials.)

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::arakelov::{ArakelovError, MetricFunction, ToricDivisor};
use crate::cli::spec::MetricSpec;
use crate::convex::{contact_set, dirichlet_energy, upper_concave_envelope};
use crate::pwl::{Interval, PwlFunction};

/// Kink positions are drawn from `[-KINK_BOX, KINK_BOX]`.
pub const KINK_BOX: f64 = 10.0;

/// Failing cases kept verbatim in a report.
const MAX_RECORDED_FAILURES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("a suite needs at least one trial")]
    ZeroTrials,
    #[error("tolerance `{0}` must be positive and finite")]
    NonPositiveTolerance(&'static str),
    #[error("kink range {min}..={max} is invalid (need 1 <= min <= max)")]
    InvalidKinkRange { min: usize, max: usize },
    #[error("degree range must be nonnegative")]
    InvalidDegreeRange,
    #[error("convergence study needs at least one width")]
    EmptyWidths,
    #[error("widths must be positive and strictly decreasing")]
    WidthsNotDecreasing,
    #[error(transparent)]
    Arakelov(#[from] ArakelovError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Identities that are exact in PWL algebra, up to rounding.
    pub exactness: f64,
    /// `|height - chi_volume|` on semipositive metrics.
    pub equality: f64,
    pub orthogonality: f64,
    /// The gap may dip to `-gap_floor` from rounding.
    pub gap_floor: f64,
    pub energy_relative: f64,
    pub mass: f64,
    /// Comparisons of sampled smooth fixtures against closed forms.
    pub sampled: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exactness: 1e-10,
            equality: 1e-10,
            orthogonality: 1e-10,
            gap_floor: 1e-9,
            energy_relative: 1e-9,
            mass: 1e-12,
            sampled: 1e-6,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), HarnessError> {
        let named = [
            ("exactness", self.exactness),
            ("equality", self.equality),
            ("orthogonality", self.orthogonality),
            ("gap_floor", self.gap_floor),
            ("energy_relative", self.energy_relative),
            ("mass", self.mass),
            ("sampled", self.sampled),
        ];
        for (name, value) in named {
            if !(value > 0.0 && value.is_finite()) {
                return Err(HarnessError::NonPositiveTolerance(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KinkRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    trials: usize,
    seed: u64,
    degree_range: Interval,
    kink_range: KinkRange,
    tolerances: Tolerances,
}

impl Default for SuiteConfig {
    /// 1000 trials, seed 42, degrees in `[0, 5]`, 1 to 12 kinks.
    fn default() -> Self {
        SuiteConfig {
            trials: 1000,
            seed: 42,
            degree_range: Interval::new(0.0, 5.0).expect("valid"),
            kink_range: KinkRange { min: 1, max: 12 },
            tolerances: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    pub fn new(
        trials: usize,
        seed: u64,
        degree_range: Interval,
        kink_range: KinkRange,
        tolerances: Tolerances,
    ) -> Result<Self, HarnessError> {
        if trials == 0 {
            return Err(HarnessError::ZeroTrials);
        }
        if degree_range.lo() < 0.0 {
            return Err(HarnessError::InvalidDegreeRange);
        }
        if kink_range.min == 0 || kink_range.min > kink_range.max {
            return Err(HarnessError::InvalidKinkRange {
                min: kink_range.min,
                max: kink_range.max,
            });
        }
        tolerances.validate()?;
        Ok(SuiteConfig {
            trials,
            seed,
            degree_range,
            kink_range,
            tolerances,
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn degree_range(&self) -> Interval {
        self.degree_range
    }

    pub fn kink_range(&self) -> KinkRange {
        self.kink_range
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }
}

/// The checks run on every metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    GeneratorSoundness,
    VolumeGap,
    SemipositiveEquality,
    RoofInvariance,
    HeightDomination,
    Orthogonality,
    EnergyIdentity,
    ScalingCovariance,
    SupNormConsistency,
    MassConservation,
    DspReassembly,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::GeneratorSoundness,
        Check::VolumeGap,
        Check::SemipositiveEquality,
        Check::RoofInvariance,
        Check::HeightDomination,
        Check::Orthogonality,
        Check::EnergyIdentity,
        Check::ScalingCovariance,
        Check::SupNormConsistency,
        Check::MassConservation,
        Check::DspReassembly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::GeneratorSoundness => "generator_soundness",
            Check::VolumeGap => "volume_gap",
            Check::SemipositiveEquality => "semipositive_equality",
            Check::RoofInvariance => "roof_invariance",
            Check::HeightDomination => "height_domination",
            Check::Orthogonality => "orthogonality",
            Check::EnergyIdentity => "energy_identity",
            Check::ScalingCovariance => "scaling_covariance",
            Check::SupNormConsistency => "sup_norm_consistency",
            Check::MassConservation => "mass_conservation",
            Check::DspReassembly => "dsp_reassembly",
        }
    }

    pub fn tolerance(self, tol: &Tolerances) -> f64 {
        match self {
            Check::GeneratorSoundness | Check::RoofInvariance => 0.0,
            Check::VolumeGap => tol.gap_floor,
            Check::SemipositiveEquality => tol.equality,
            Check::Orthogonality => tol.orthogonality,
            Check::EnergyIdentity => tol.energy_relative,
            Check::MassConservation => tol.mass,
            Check::HeightDomination
            | Check::ScalingCovariance
            | Check::SupNormConsistency
            | Check::DspReassembly => tol.exactness,
        }
    }
}

/// Auxiliary inputs for the covariance and sup-norm checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub scale: f64,
    pub level: u32,
    pub lattice_point: f64,
}

impl Probe {
    /// A probe at the centre of the polytope with level 2 and shift 0.3.
    pub fn centred(m: &MetricFunction) -> Self {
        let domain = m.divisor().polytope();
        Probe {
            scale: 0.3,
            level: 2,
            lattice_point: domain.lo() + domain.hi(),
        }
    }

    fn draw<R: Rng>(rng: &mut R, m: &MetricFunction) -> Self {
        let domain = m.divisor().polytope();
        let scale = rng.gen_range(-2.0..=2.0);
        let level: u32 = rng.gen_range(1..=8);
        let k = f64::from(level);
        let (lo, hi) = ((k * domain.lo()).ceil(), (k * domain.hi()).floor());
        let mut lattice_point = 0.5 * k * (domain.lo() + domain.hi());
        if lo <= hi {
            let candidate = lo + rng.gen_range(0..=(hi - lo) as u64) as f64;
            if domain.contains(candidate / k) {
                lattice_point = candidate;
            }
        }
        Probe {
            scale,
            level,
            lattice_point,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOutcome {
    pub check: Check,
    pub residual: f64,
    pub passed: bool,
}

fn outcome(check: Check, residual: f64, tol: &Tolerances) -> CheckOutcome {
    let passed = match check {
        Check::GeneratorSoundness | Check::RoofInvariance => residual == 0.0,
        _ => residual <= check.tolerance(tol),
    };
    CheckOutcome {
        check,
        residual,
        passed,
    }
}

/// `|a - b| / max(1, |a|, |b|)`: relative for large values, absolute near
/// zero, where a rounding-level gap against an exactly zero energy would
/// otherwise score 1.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Runs every check in [`Check::ALL`] except generator soundness, which
/// only makes sense for generated inputs and is reported as passing here.
pub fn check_metric(m: &MetricFunction, probe: &Probe, tol: &Tolerances) -> Vec<CheckOutcome> {
    let equilibrium = m.equilibrium();
    let report = m.verify();
    let height_p = equilibrium.height();
    let chi_p = equilibrium.chi_volume();
    let mut out = Vec::with_capacity(Check::ALL.len());

    out.push(outcome(Check::GeneratorSoundness, 0.0, tol));
    out.push(outcome(Check::VolumeGap, (-report.gap).max(0.0), tol));

    let mut equality = (height_p - chi_p).abs();
    if m.is_semipositive() {
        equality = equality.max((report.height - report.chi_volume).abs());
    }
    out.push(outcome(Check::SemipositiveEquality, equality, tol));

    let (roof, roof_p) = (m.roof(), equilibrium.roof());
    let roof_residual = if roof == roof_p {
        0.0
    } else {
        roof.vertices()
            .iter()
            .map(|&(x, t)| (t - roof_p.evaluate(x)).abs())
            .fold(f64::MIN_POSITIVE, f64::max)
    };
    out.push(outcome(Check::RoofInvariance, roof_residual, tol));

    out.push(outcome(
        Check::HeightDomination,
        (report.height - height_p).max(0.0),
        tol,
    ));

    // residual of the integral, plus a hard failure if some atom of the
    // envelope's measure sits off the contact set
    let mu_p = equilibrium.ma_measure();
    let mut orthogonality = report.orthogonality_residual;
    match contact_set(m.psi(), equilibrium.psi(), 1e-12) {
        Ok(sets) => {
            let off_contact = mu_p
                .atoms()
                .iter()
                .any(|a| !sets.iter().any(|s| s.contains(a.position)));
            if off_contact {
                orthogonality = f64::INFINITY;
            }
        }
        Err(_) => orthogonality = f64::INFINITY,
    }
    out.push(outcome(Check::Orthogonality, orthogonality, tol));

    let defect = m.defect();
    let mu = m.ma_measure();
    let against_difference = mu.sub(&mu_p).integrate(&defect);
    let against_sum = mu.add(&mu_p).integrate(&defect);
    let energy_residual = match dirichlet_energy(&defect) {
        Ok(energy) => relative_error(against_difference, energy)
            .max(relative_error(against_sum, energy))
            .max(relative_error(report.gap, report.energy)),
        Err(_) => f64::INFINITY,
    };
    out.push(outcome(Check::EnergyIdentity, energy_residual, tol));

    let scaled = m.scale(probe.scale);
    let shift = 2.0 * probe.scale * m.degree();
    let covariance = (scaled.height() - report.height - shift)
        .abs()
        .max((scaled.chi_volume() - report.chi_volume - shift).abs());
    out.push(outcome(Check::ScalingCovariance, covariance, tol));

    let sup_residual = match (
        m.section_sup_log_norm(probe.level, probe.lattice_point),
        equilibrium.section_sup_log_norm(probe.level, probe.lattice_point),
    ) {
        (Ok(s), Ok(s_p)) => {
            let k = f64::from(probe.level);
            let theta = roof.evaluate(probe.lattice_point / k);
            (s + k * theta).abs().max((s - s_p).abs())
        }
        _ => f64::INFINITY,
    };
    out.push(outcome(Check::SupNormConsistency, sup_residual, tol));

    out.push(outcome(
        Check::MassConservation,
        (mu.total_mass() - m.degree()).abs(),
        tol,
    ));

    let (plus, minus) = m.dsp_split();
    let reassembly = if plus.is_semipositive() && minus.is_semipositive() {
        plus.psi()
            .sub(minus.psi())
            .sup_distance(m.psi())
            .unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    };
    out.push(outcome(Check::DspReassembly, reassembly, tol));
    out
}

fn draw_positions<R: Rng>(rng: &mut R, kinks: usize) -> Vec<f64> {
    let mut positions: Vec<f64> = (0..kinks)
        .map(|_| rng.gen_range(-KINK_BOX..=KINK_BOX))
        .collect();
    positions.sort_by(f64::total_cmp);
    positions.dedup();
    positions
}

fn integrate_slopes(
    divisor: ToricDivisor,
    positions: Vec<f64>,
    interior_slopes: &[f64],
    offset: f64,
) -> PwlFunction {
    let mut values = Vec::with_capacity(positions.len());
    let mut value = offset;
    for (k, &u) in positions.iter().enumerate() {
        if k > 0 {
            value += interior_slopes[k - 1] * (u - positions[k - 1]);
        }
        values.push(value);
    }
    PwlFunction::new(positions, values, divisor.a_inf(), -divisor.a0())
        .expect("generated data is finite and increasing")
}

fn draw_semipositive<R: Rng>(rng: &mut R, divisor: ToricDivisor, kinks: usize) -> MetricFunction {
    let polytope = divisor.polytope();
    let positions = draw_positions(rng, kinks.max(1));
    let mut slopes: Vec<f64> = (1..positions.len())
        .map(|_| rng.gen_range(polytope.lo()..=polytope.hi()))
        .collect();
    slopes.sort_by(|a, b| b.total_cmp(a));
    let offset = rng.gen_range(-2.0..=2.0);
    let psi = integrate_slopes(divisor, positions, &slopes, offset);
    // rounding in the integration can leave sub-ulp convex kinks
    let psi = upper_concave_envelope(&psi).expect("nef divisor has ordered rays");
    MetricFunction::new(divisor, psi).expect("rays match the divisor")
}

fn draw_dsp<R: Rng>(rng: &mut R, divisor: ToricDivisor, kinks: usize) -> MetricFunction {
    let polytope = divisor.polytope();
    let positions = draw_positions(rng, kinks.max(1));
    let slopes: Vec<f64> = (1..positions.len())
        .map(|_| rng.gen_range(polytope.lo()..=polytope.hi()))
        .collect();
    let offset = rng.gen_range(-2.0..=2.0);
    let psi = integrate_slopes(divisor, positions, &slopes, offset);
    MetricFunction::new(divisor, psi).expect("rays match the divisor")
}

/// Concave metric with `kinks` breakpoints in `[-10, 10]` and interior
/// slopes decreasing from `a_inf` to `-a0`.
pub fn random_semipositive(divisor: ToricDivisor, kinks: usize, seed: u64) -> MetricFunction {
    draw_semipositive(&mut ChaCha8Rng::seed_from_u64(seed), divisor, kinks)
}

/// Metric with the divisor's ray slopes and interior slopes drawn uniformly
/// from the polytope in random order.
pub fn random_dsp(divisor: ToricDivisor, kinks: usize, seed: u64) -> MetricFunction {
    draw_dsp(&mut ChaCha8Rng::seed_from_u64(seed), divisor, kinks)
}

fn draw_divisor<R: Rng>(rng: &mut R, degrees: Interval) -> ToricDivisor {
    let degree = if degrees.is_degenerate() {
        degrees.lo()
    } else {
        rng.gen_range(degrees.lo()..=degrees.hi())
    };
    let split: f64 = rng.gen_range(0.0..=1.0);
    let shift: f64 = rng.gen_range(-1.0..=1.0);
    let a0 = split * degree - shift;
    ToricDivisor::new(a0, degree - a0)
        .or_else(|_| ToricDivisor::new(a0, -a0))
        .expect("degree is nonnegative")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub name: &'static str,
    pub evaluated: usize,
    pub passed: usize,
    pub worst_residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureCase {
    pub trial: usize,
    pub check: &'static str,
    pub residual: f64,
    /// The failing metric as a spec document.
    pub metric: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckSummary>,
    pub failures: Vec<FailureCase>,
    pub failure_count: usize,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn check(&self, check: Check) -> &CheckSummary {
        self.checks
            .iter()
            .find(|c| c.name == check.name())
            .expect("every check is summarised")
    }
}

struct TrialResult {
    outcomes: Vec<CheckOutcome>,
    metric: MetricFunction,
}

fn run_trial(config: &SuiteConfig, trial: usize) -> TrialResult {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial as u64);
    let divisor = draw_divisor(&mut rng, config.degree_range);
    let kinks = rng.gen_range(config.kink_range.min..=config.kink_range.max);
    let semipositive = rng.gen_bool(0.5);
    let metric = if semipositive {
        draw_semipositive(&mut rng, divisor, kinks)
    } else {
        draw_dsp(&mut rng, divisor, kinks)
    };
    let probe = Probe::draw(&mut rng, &metric);
    let mut outcomes = check_metric(&metric, &probe, &config.tolerances);
    let sound = MetricFunction::new(metric.divisor(), metric.psi().clone()).is_ok()
        && (!semipositive || metric.is_semipositive());
    outcomes[0] = outcome(
        Check::GeneratorSoundness,
        if sound { 0.0 } else { 1.0 },
        &config.tolerances,
    );
    TrialResult { outcomes, metric }
}

pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let results: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, trial))
        .collect();

    let mut checks: Vec<CheckSummary> = Check::ALL
        .iter()
        .map(|&c| CheckSummary {
            name: c.name(),
            evaluated: 0,
            passed: 0,
            worst_residual: 0.0,
            tolerance: c.tolerance(&config.tolerances),
        })
        .collect();
    let mut failures = Vec::new();
    let mut failure_count = 0;
    for (trial, result) in results.iter().enumerate() {
        for (summary, o) in checks.iter_mut().zip(&result.outcomes) {
            summary.evaluated += 1;
            summary.worst_residual = summary.worst_residual.max(o.residual);
            if o.passed {
                summary.passed += 1;
            } else {
                failure_count += 1;
                if failures.len() < MAX_RECORDED_FAILURES {
                    failures.push(FailureCase {
                        trial,
                        check: o.check.name(),
                        residual: o.residual,
                        metric: MetricSpec::from_metric(&result.metric).to_json(),
                    });
                }
            }
        }
    }
    SuiteReport {
        trials: config.trials,
        seed: config.seed,
        checks,
        failures,
        failure_count,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Zero for the limit row.
    pub width: f64,
    pub sup_distance: f64,
    pub height: f64,
    pub chi_volume: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub degree: f64,
    pub rows: Vec<ConvergenceRow>,
    pub limit: ConvergenceRow,
}

/// Absolute slack added to the continuity bounds for rounding.
pub const CONTINUITY_SLACK: f64 = 1e-12;

impl ConvergenceTable {
    pub fn sup_strictly_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sup_distance < w[0].sup_distance)
    }

    /// `|height_w - height| <= 4·deg·sup_distance` on a row.
    pub fn height_bound_holds(&self, row: &ConvergenceRow) -> bool {
        (row.height - self.limit.height).abs()
            <= 4.0 * self.degree * row.sup_distance + CONTINUITY_SLACK
    }

    /// `|chi_w - chi| <= 2·deg·sup_distance` on a row.
    pub fn chi_bound_holds(&self, row: &ConvergenceRow) -> bool {
        (row.chi_volume - self.limit.chi_volume).abs()
            <= 2.0 * self.degree * row.sup_distance + CONTINUITY_SLACK
    }

    /// Bounds hold on every row and the sup distances shrink strictly
    /// (or all vanish, for metrics the kernel leaves fixed).
    pub fn passed(&self) -> bool {
        let all_zero = self.rows.iter().all(|r| r.sup_distance == 0.0);
        (all_zero || self.sup_strictly_decreasing())
            && self
                .rows
                .iter()
                .all(|r| self.height_bound_holds(r) && self.chi_bound_holds(r))
    }
}

pub fn convergence_study(
    m: &MetricFunction,
    widths: &[f64],
) -> Result<ConvergenceTable, HarnessError> {
    if widths.is_empty() {
        return Err(HarnessError::EmptyWidths);
    }
    if widths.iter().any(|&w| !(w > 0.0 && w.is_finite()))
        || widths.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(HarnessError::WidthsNotDecreasing);
    }
    let rows = widths
        .iter()
        .map(|&width| {
            let smoothed = m.mollify(width)?;
            Ok(ConvergenceRow {
                width,
                sup_distance: smoothed
                    .psi()
                    .sup_distance(m.psi())
                    .expect("mollification keeps the rays"),
                height: smoothed.height(),
                chi_volume: smoothed.chi_volume(),
            })
        })
        .collect::<Result<Vec<_>, ArakelovError>>()?;
    Ok(ConvergenceTable {
        degree: m.degree(),
        rows,
        limit: ConvergenceRow {
            width: 0.0,
            sup_distance: 0.0,
            height: m.height(),
            chi_volume: m.chi_volume(),
        },
    })
}

/// Reference metrics with known heights and volumes.
pub mod fixtures {
    use crate::arakelov::{MetricFunction, ToricDivisor};
    use crate::pwl::PwlFunction;

    pub fn canonical(a0: f64, a_inf: f64) -> MetricFunction {
        MetricFunction::canonical(ToricDivisor::new(a0, a_inf).expect("fixture divisor is nef"))
    }

    /// Canonical metric on `[∞]` scaled by `e^{-0.3}`.
    pub fn scaled_canonical() -> MetricFunction {
        canonical(0.0, 1.0).scale(0.3)
    }

    pub fn fubini_study() -> MetricFunction {
        MetricFunction::fubini_study()
    }

    /// `ψ(u) = min(0, u) - max(0, eps - |u|)` on `[∞]`.
    pub fn tent(eps: f64) -> MetricFunction {
        let divisor = ToricDivisor::new(0.0, 1.0).expect("nef");
        let base = PwlFunction::new(vec![0.0], vec![0.0], 1.0, 0.0).expect("finite");
        let bump =
            PwlFunction::new(vec![-eps, 0.0, eps], vec![0.0, eps, 0.0], 0.0, 0.0).expect("eps > 0");
        MetricFunction::new(divisor, base.sub(&bump)).expect("rays match")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(a0: f64, a_inf: f64) -> ToricDivisor {
        ToricDivisor::new(a0, a_inf).unwrap()
    }

    #[test]
    fn generators_are_deterministic() {
        let dv = d(1.5, 2.0);
        assert_eq!(
            random_semipositive(dv, 7, 11),
            random_semipositive(dv, 7, 11)
        );
        assert_eq!(random_dsp(dv, 7, 11), random_dsp(dv, 7, 11));
        assert_ne!(random_dsp(dv, 7, 11), random_dsp(dv, 7, 12));
    }

    #[test]
    fn one_kink_is_a_shifted_canonical() {
        let m = random_semipositive(d(0.0, 1.0), 1, 5);
        assert_eq!(m.psi().len(), 1);
        assert_eq!(m.ma_measure().atoms()[0].mass, 1.0);
    }

    #[test]
    fn generated_metrics_are_valid() {
        for seed in 0..200 {
            let dv = d(0.5 + (seed % 3) as f64, 1.0);
            let m = random_semipositive(dv, 12, seed);
            assert!(m.is_semipositive(), "seed {seed}");
            let m = random_dsp(dv, 12, seed);
            let (p, q) = m.dsp_split();
            assert!(p.is_semipositive() && q.is_semipositive());
            assert!(p.psi().sub(q.psi()).sup_distance(m.psi()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn config_rejects_bad_values() {
        let base = SuiteConfig::default();
        let degrees = base.degree_range();
        let kinks = base.kink_range();
        let tol = *base.tolerances();
        assert_eq!(
            SuiteConfig::new(0, 1, degrees, kinks, tol),
            Err(HarnessError::ZeroTrials)
        );
        assert!(matches!(
            SuiteConfig::new(1, 1, degrees, KinkRange { min: 3, max: 2 }, tol),
            Err(HarnessError::InvalidKinkRange { .. })
        ));
        let bad = Tolerances { mass: 0.0, ..tol };
        assert_eq!(
            SuiteConfig::new(1, 1, degrees, kinks, bad),
            Err(HarnessError::NonPositiveTolerance("mass"))
        );
    }

    #[test]
    fn fixtures_raise_no_false_alarms() {
        let tol = Tolerances::default();
        let metrics = [
            fixtures::canonical(0.0, 1.0),
            fixtures::canonical(1.0, 1.0),
            fixtures::scaled_canonical(),
            fixtures::fubini_study(),
            fixtures::tent(0.4),
        ];
        for m in &metrics {
            for o in check_metric(m, &Probe::centred(m), &tol) {
                assert!(
                    o.passed,
                    "{} failed with residual {}",
                    o.check.name(),
                    o.residual
                );
            }
        }
    }

    #[test]
    fn canonical_checks_have_zero_residual() {
        let m = fixtures::canonical(0.0, 1.0);
        for o in check_metric(&m, &Probe::centred(&m), &Tolerances::default()) {
            assert_eq!(o.residual, 0.0, "{}", o.check.name());
        }
    }

    #[test]
    fn convergence_rejects_bad_widths() {
        let m = fixtures::tent(0.4);
        assert_eq!(convergence_study(&m, &[]), Err(HarnessError::EmptyWidths));
        assert_eq!(
            convergence_study(&m, &[0.1, 0.2]),
            Err(HarnessError::WidthsNotDecreasing)
        );
    }

    #[test]
    fn convergence_on_linear_metric_is_flat() {
        let m = fixtures::canonical(-1.0, 1.0);
        let table = convergence_study(&m, &[0.2, 0.1]).unwrap();
        assert!(table
            .rows
            .iter()
            .all(|r| r.sup_distance == 0.0 && r.height == 0.0));
        assert!(table.passed());
    }
}
