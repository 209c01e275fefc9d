//! Toric metrized divisors on the projective line and their arithmetic
//! invariants: roof functions, heights and χ-arithmetic volumes.
//!
//! Coordinates: along the compact-torus orbits a toric metric is read as a
//! function of `u = -log|z|`, and the metric function `ψ(u)` is the log-norm
//! of the canonical section, i.e. minus the Green function. With this choice
//! a metric is semipositive exactly when `ψ` is concave, and the canonical
//! metric is the support-type function `u ↦ min_{x ∈ Δ} x·u`.
//!
//! Only the archimedean place is modelled; finite places carry the canonical
//! metric and contribute nothing to heights or volumes.

use thiserror::Error;

use crate::convex::{
    self, concave_conjugate, gradient_energy, second_derivative_measure, upper_concave_envelope,
    ConvexError,
};
use crate::pwl::{AtomicMeasure, Interval, PwlError, PwlFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArakelovError {
    #[error("divisor ({a0}, {a_inf}) is not nef: degree {degree} < 0")]
    NotNef { a0: f64, a_inf: f64, degree: f64 },
    #[error("divisor coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("metric ray slopes ({found_left}, {found_right}) do not match the divisor ({expected_left}, {expected_right})")]
    SlopeMismatch {
        expected_left: f64,
        expected_right: f64,
        found_left: f64,
        found_right: f64,
    },
    #[error("metric is not semipositive")]
    NotSemipositive,
    #[error("{point} lies outside the polytope [{lo}, {hi}]")]
    OutsidePolytope { point: f64, lo: f64, hi: f64 },
    #[error("section level must be a positive integer")]
    InvalidLevel,
    #[error("mollification width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("sampling grid needs half-width > 0 and at least 2 points")]
    InvalidGrid,
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

/// `a0·[0] + a_inf·[∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToricDivisor {
    a0: f64,
    a_inf: f64,
}

impl ToricDivisor {
    pub fn new(a0: f64, a_inf: f64) -> Result<Self, ArakelovError> {
        if !a0.is_finite() || !a_inf.is_finite() {
            return Err(ArakelovError::NonFiniteCoefficient);
        }
        let degree = a0 + a_inf;
        if degree < 0.0 {
            return Err(ArakelovError::NotNef { a0, a_inf, degree });
        }
        Ok(ToricDivisor { a0, a_inf })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a_inf(&self) -> f64 {
        self.a_inf
    }

    pub fn degree(&self) -> f64 {
        self.a0 + self.a_inf
    }

    /// `Δ_D = [-a0, a_inf]`.
    pub fn polytope(&self) -> Interval {
        Interval::new(-self.a0, self.a_inf).expect("nef divisor has a nonempty polytope")
    }
}

/// Uniform sampling grid for smooth metric functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub half_width: f64,
    pub points: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid {
            half_width: 20.0,
            points: 4001,
        }
    }
}

impl SamplingGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self, ArakelovError> {
        if !(half_width > 0.0 && half_width.is_finite()) || points < 2 {
            return Err(ArakelovError::InvalidGrid);
        }
        Ok(SamplingGrid { half_width, points })
    }

    /// Symmetric nodes; the middle node is exactly zero for odd counts.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.points - 1;
        let span = 2.0 * self.half_width;
        (0..=n)
            .map(|i| -self.half_width + span * (i as f64) / (n as f64))
            .collect()
    }
}

/// A toric DSP metric: a divisor together with the metric function `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFunction {
    divisor: ToricDivisor,
    psi: PwlFunction,
}

/// Concave conjugate of a metric function on the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofFunction {
    domain: Interval,
    theta: PwlFunction,
}

impl RoofFunction {
    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn theta(&self) -> &PwlFunction {
        &self.theta
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.theta.evaluate(x)
    }

    pub fn integral(&self) -> f64 {
        self.theta.integrate(self.domain)
    }

    /// Vertices over the closed domain: both endpoints plus every interior kink.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.domain.lo(), self.domain.hi());
        let mut xs = vec![lo];
        xs.extend(
            self.theta
                .breakpoints()
                .iter()
                .copied()
                .filter(|&x| x > lo && x < hi),
        );
        if hi > lo {
            xs.push(hi);
        }
        xs.into_iter()
            .map(|x| (x, self.theta.evaluate(x)))
            .collect()
    }
}

/// Height, χ-volume and the diagnostics certifying `height ≤ chi_volume`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightReport {
    pub height: f64,
    pub chi_volume: f64,
    /// `chi_volume - height`.
    pub gap: f64,
    /// `|∫ (ψ - Pψ) dμ_{Pψ}|`; zero when the envelope's measure lives on the contact set.
    pub orthogonality_residual: f64,
    /// `∫ ((ψ - Pψ)')² du`; equals the gap.
    pub energy: f64,
}

impl MetricFunction {
    pub fn new(divisor: ToricDivisor, psi: PwlFunction) -> Result<Self, ArakelovError> {
        let (left, right) = (divisor.a_inf(), -divisor.a0());
        if psi.slope_neg_inf() != left || psi.slope_pos_inf() != right {
            return Err(ArakelovError::SlopeMismatch {
                expected_left: left,
                expected_right: right,
                found_left: psi.slope_neg_inf(),
                found_right: psi.slope_pos_inf(),
            });
        }
        Ok(MetricFunction { divisor, psi })
    }

    /// Builds a metric from breakpoint data; the ray slopes come from the divisor.
    pub fn from_breakpoints(
        divisor: ToricDivisor,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, ArakelovError> {
        let psi = PwlFunction::new(breakpoints, values, divisor.a_inf(), -divisor.a0())?;
        MetricFunction::new(divisor, psi)
    }

    /// `ψ_can(u) = min(-a0·u, a_inf·u)`.
    pub fn canonical(divisor: ToricDivisor) -> Self {
        let psi = PwlFunction::new(vec![0.0], vec![0.0], divisor.a_inf(), -divisor.a0())
            .expect("canonical metric data is finite");
        MetricFunction { divisor, psi }
    }

    /// Fubini–Study metric on `O(1)` sampled on the default grid.
    pub fn fubini_study() -> Self {
        MetricFunction::fubini_study_on(SamplingGrid::default()).expect("default grid is valid")
    }

    /// `ψ_FS(u) = -½·log(1 + e^{-2u})` on `D = [∞]`, sampled on `grid`.
    ///
    /// Samples of a concave function interpolate to a concave function; the
    /// envelope pass only removes rounding noise in the nearly linear tails.
    pub fn fubini_study_on(grid: SamplingGrid) -> Result<Self, ArakelovError> {
        let divisor = ToricDivisor::new(0.0, 1.0)?;
        let sampled = PwlFunction::from_samples(fubini_study_psi, &grid.nodes(), 1.0, 0.0)?;
        let psi = upper_concave_envelope(&sampled)?;
        MetricFunction::new(divisor, psi)
    }

    pub fn divisor(&self) -> ToricDivisor {
        self.divisor
    }

    pub fn psi(&self) -> &PwlFunction {
        &self.psi
    }

    pub fn degree(&self) -> f64 {
        self.divisor.degree()
    }

    pub fn is_semipositive(&self) -> bool {
        self.psi.is_concave()
    }

    /// `ψ ↦ ψ - c`: the metric multiplied by `e^{-c}`.
    pub fn scale(&self, c: f64) -> Self {
        MetricFunction {
            divisor: self.divisor,
            psi: self.psi.shifted(-c),
        }
    }

    pub fn roof(&self) -> RoofFunction {
        let domain = self.divisor.polytope();
        let theta = concave_conjugate(&self.psi, domain)
            .expect("ray slopes of a nef metric span its polytope");
        RoofFunction { domain, theta }
    }

    /// `2·∫_Δ θ`.
    pub fn chi_volume(&self) -> f64 {
        2.0 * self.roof().integral()
    }

    /// The equilibrium metric: `ψ` replaced by its concave envelope.
    pub fn equilibrium(&self) -> Self {
        let psi = upper_concave_envelope(&self.psi).expect("nef metric has ordered ray slopes");
        MetricFunction {
            divisor: self.divisor,
            psi,
        }
    }

    /// Monge–Ampère measure of the metric (the second-derivative measure of `ψ`).
    pub fn ma_measure(&self) -> AtomicMeasure {
        second_derivative_measure(&self.psi)
    }

    /// Height relative to the canonical metric:
    /// `h = -∫ (ψ - ψ_can) d(μ_ψ + μ_can)`.
    pub fn height(&self) -> f64 {
        let canonical = MetricFunction::canonical(self.divisor);
        let difference = self.psi.sub(&canonical.psi);
        let measure = self.ma_measure().add(&canonical.ma_measure());
        -measure.integrate(&difference)
    }

    /// Height of a semipositive metric through its roof function.
    pub fn height_semipositive(&self) -> Result<f64, ArakelovError> {
        if !self.is_semipositive() {
            return Err(ArakelovError::NotSemipositive);
        }
        Ok(self.chi_volume())
    }

    /// `sup_u (k·ψ(u) - p·u)`, the log of the sup-norm of the monomial
    /// section of `O(kD)` attached to the lattice point `p`.
    pub fn section_sup_log_norm(&self, k: u32, lattice_point: f64) -> Result<f64, ArakelovError> {
        if k == 0 {
            return Err(ArakelovError::InvalidLevel);
        }
        let domain = self.divisor.polytope();
        let x = lattice_point / f64::from(k);
        if !x.is_finite() || !domain.contains(x) {
            return Err(ArakelovError::OutsidePolytope {
                point: x,
                lo: domain.lo(),
                hi: domain.hi(),
            });
        }
        let k = f64::from(k);
        // slopes k·a_inf - p >= 0 on the left ray and -k·a0 - p <= 0 on the
        // right ray, so the supremum sits at a breakpoint.
        Ok(self
            .psi
            .breakpoints()
            .iter()
            .zip(self.psi.values())
            .map(|(&u, &v)| k * v - lattice_point * u)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Convolution of `ψ` with the triangular kernel supported on
    /// `[-width, width]`, resampled at the breakpoints shifted by `±width`.
    ///
    /// Rays are untouched beyond `width` from the outermost kinks, and the
    /// result stays within `width · max|slope|` of `ψ`.
    pub fn mollify(&self, width: f64) -> Result<Self, ArakelovError> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(ArakelovError::InvalidWidth(width));
        }
        let mu = self.ma_measure();
        if mu.is_empty() {
            return Ok(self.clone());
        }
        let atoms = mu.atoms();
        let positions: Vec<f64> = atoms.iter().map(|a| a.position).collect();

        let mut nodes: Vec<f64> = positions
            .iter()
            .flat_map(|&u| [u - width, u + width])
            .collect();
        nodes.sort_by(f64::total_cmp);
        let mut resample: Vec<f64> = Vec::with_capacity(nodes.len());
        for x in nodes {
            match resample.last() {
                Some(&last) if x - last <= 1e-9 * width.max(last.abs()) => {}
                _ => resample.push(x),
            }
        }

        // ψ = affine - Σ (m_i / 2)|u - u_i|, and convolving |z| with the kernel
        // adds (w - |z|)³ / (3w²) inside the support.
        let smoothed = |x: f64| -> f64 {
            let lo = positions.partition_point(|&u| u <= x - width);
            let hi = positions.partition_point(|&u| u < x + width);
            let correction: f64 = atoms[lo..hi]
                .iter()
                .map(|a| {
                    let r = width - (x - a.position).abs();
                    0.5 * a.mass * r * r * r / (3.0 * width * width)
                })
                .sum();
            self.psi.evaluate(x) - correction
        };
        let values = resample.iter().map(|&x| smoothed(x)).collect();
        let mut psi = PwlFunction::new(
            resample,
            values,
            self.psi.slope_neg_inf(),
            self.psi.slope_pos_inf(),
        )?;
        if self.is_semipositive() && !psi.is_concave() {
            // the exact resample is concave; this only removes rounding noise
            psi = upper_concave_envelope(&psi)?;
        }
        MetricFunction::new(self.divisor, psi)
    }

    /// Writes `ψ = ψ₁ - ψ₂` with both pieces concave.
    ///
    /// `ψ₂` carries the negative part of the Monge–Ampère measure on the
    /// divisor `N·[0]` (`N` its mass) and vanishes left of its first atom;
    /// `ψ₁` carries the positive part on `D + N·[0]`.
    pub fn dsp_split(&self) -> (MetricFunction, MetricFunction) {
        let negative = self.ma_measure().negative_part();
        if negative.is_empty() {
            let zero = ToricDivisor::new(0.0, 0.0).expect("zero divisor is nef");
            return (self.clone(), MetricFunction::canonical(zero));
        }
        let atoms = negative.atoms();
        let mut xs = Vec::with_capacity(atoms.len());
        let mut ys = Vec::with_capacity(atoms.len());
        let mut slope = 0.0;
        let mut value = 0.0;
        for (k, atom) in atoms.iter().enumerate() {
            if k > 0 {
                value += slope * (atom.position - atoms[k - 1].position);
            }
            xs.push(atom.position);
            ys.push(value);
            slope -= atom.mass;
        }
        let mass = -slope;
        let d2 = ToricDivisor::new(mass, 0.0).expect("nonnegative mass");
        let psi2 = PwlFunction::new(xs, ys, 0.0, -mass).expect("finite split data");
        let psi2 = upper_concave_envelope(&psi2).expect("ordered rays");

        let d1 = ToricDivisor::new(self.divisor.a0() + mass, self.divisor.a_inf())
            .expect("adding an effective divisor keeps nefness");
        let sum = self.psi.add(&psi2);
        let kinks: Vec<f64> = self
            .ma_measure()
            .positive_part()
            .atoms()
            .iter()
            .map(|a| a.position)
            .collect();
        let (kinks, values) = if kinks.is_empty() {
            (vec![0.0], vec![sum.evaluate(0.0)])
        } else {
            let values = kinks.iter().map(|&u| sum.evaluate(u)).collect();
            (kinks, values)
        };
        let psi1 =
            PwlFunction::new(kinks, values, d1.a_inf(), -d1.a0()).expect("finite split data");
        let psi1 = upper_concave_envelope(&psi1).expect("ordered rays");
        (
            MetricFunction::new(d1, psi1).expect("slopes match by construction"),
            MetricFunction::new(d2, psi2).expect("slopes match by construction"),
        )
    }

    /// Height, χ-volume and the orthogonality/energy diagnostics.
    pub fn verify(&self) -> HeightReport {
        let height = self.height();
        let chi_volume = self.chi_volume();
        let equilibrium = self.equilibrium();
        let defect = self.psi.sub(&equilibrium.psi);
        let orthogonality_residual = equilibrium.ma_measure().integrate(&defect).abs();
        let energy = gradient_energy(&defect).expect("defect of matching rays is flat");
        HeightReport {
            height,
            chi_volume,
            gap: chi_volume - height,
            orthogonality_residual,
            energy,
        }
    }

    /// `ψ - Pψ`, nonpositive and flat outside the breakpoint span.
    pub fn defect(&self) -> PwlFunction {
        self.psi.sub(&self.equilibrium().psi)
    }

    /// Metric recovered from a roof function: `ψ(u) = inf_{x ∈ Δ} (x·u - θ(x))`.
    pub fn from_roof(divisor: ToricDivisor, roof: &RoofFunction) -> Result<Self, ArakelovError> {
        let psi = convex::conjugate_from_domain(roof.theta(), roof.domain());
        MetricFunction::new(divisor, psi)
    }
}

/// `-½·log(1 + e^{-2u})`, evaluated without overflow on either side.
pub fn fubini_study_psi(u: f64) -> f64 {
    if u >= 0.0 {
        -0.5 * (-2.0 * u).exp().ln_1p()
    } else {
        u - 0.5 * (2.0 * u).exp().ln_1p()
    }
}
