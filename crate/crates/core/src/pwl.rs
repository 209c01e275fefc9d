//! Piecewise-linear functions on the real line with explicit ray slopes,
//! and finitely supported signed measures.
//!
//! A [`PwlFunction`] is determined by a strictly increasing list of
//! breakpoints, the value at each breakpoint, and the slopes of the two
//! unbounded rays. Between breakpoints it interpolates linearly. Every
//! constructor returns the canonical form: kinks whose slope jump is below
//! [`KINK_TOLERANCE`] are merged away, and an affine function is stored with
//! its single breakpoint at `u = 0`.

use std::cmp::Ordering;

use thiserror::Error;

/// Slope jumps smaller than this are treated as no kink at all.
pub const KINK_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PwlError {
    #[error("a piecewise-linear function needs at least one breakpoint")]
    Empty,
    #[error("breakpoints and values differ in length ({breakpoints} vs {values})")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("breakpoints must be strictly increasing (index {index})")]
    NotIncreasing { index: usize },
    #[error("non-finite data at index {index}")]
    NonFinite { index: usize },
    #[error("ray slopes must be finite")]
    NonFiniteSlope,
    #[error("asymptotic slopes differ: ({left_a}, {right_a}) vs ({left_b}, {right_b})")]
    SlopeMismatch {
        left_a: f64,
        right_a: f64,
        left_b: f64,
        right_b: f64,
    },
    #[error("sample at u = {at} is not finite")]
    NonFiniteSample { at: f64 },
    #[error("sampling grid needs at least two points, got {0}")]
    GridTooSmall(usize),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("atom positions must be finite and masses finite")]
    InvalidAtom,
}

/// Slope of the chord between two points.
///
/// Every slope in the crate goes through this one expression so that
/// comparisons made in different places agree bit for bit.
#[inline]
pub(crate) fn chord_slope(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    (y1 - y0) / (x1 - x0)
}

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, PwlError> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(PwlError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self, PwlError> {
        Interval::new(x, x)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PwlFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slope_neg_inf: f64,
    slope_pos_inf: f64,
}

impl PwlFunction {
    /// Builds a function from raw breakpoint data and returns its canonical form.
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        slope_neg_inf: f64,
        slope_pos_inf: f64,
    ) -> Result<Self, PwlError> {
        if breakpoints.is_empty() {
            return Err(PwlError::Empty);
        }
        if breakpoints.len() != values.len() {
            return Err(PwlError::LengthMismatch {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        if !slope_neg_inf.is_finite() || !slope_pos_inf.is_finite() {
            return Err(PwlError::NonFiniteSlope);
        }
        for (index, (&u, &v)) in breakpoints.iter().zip(&values).enumerate() {
            if !u.is_finite() || !v.is_finite() {
                return Err(PwlError::NonFinite { index });
            }
        }
        if let Some(index) = breakpoints.windows(2).position(|w| w[0] >= w[1]) {
            return Err(PwlError::NotIncreasing { index: index + 1 });
        }
        Ok(canonicalize(
            breakpoints,
            values,
            slope_neg_inf,
            slope_pos_inf,
        ))
    }

    /// `u ↦ slope·u + intercept`.
    pub fn affine(slope: f64, intercept: f64) -> Self {
        PwlFunction {
            breakpoints: vec![0.0],
            values: vec![intercept],
            slope_neg_inf: slope,
            slope_pos_inf: slope,
        }
    }

    pub fn constant(c: f64) -> Self {
        PwlFunction::affine(0.0, c)
    }

    pub fn zero() -> Self {
        PwlFunction::constant(0.0)
    }

    /// PWL interpolant of `h` on `grid` with the given ray slopes.
    pub fn from_samples<F>(
        h: F,
        grid: &[f64],
        slope_neg_inf: f64,
        slope_pos_inf: f64,
    ) -> Result<Self, PwlError>
    where
        F: Fn(f64) -> f64,
    {
        if grid.len() < 2 {
            return Err(PwlError::GridTooSmall(grid.len()));
        }
        let mut values = Vec::with_capacity(grid.len());
        for &u in grid {
            let v = h(u);
            if !v.is_finite() {
                return Err(PwlError::NonFiniteSample { at: u });
            }
            values.push(v);
        }
        PwlFunction::new(grid.to_vec(), values, slope_neg_inf, slope_pos_inf)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slope_neg_inf(&self) -> f64 {
        self.slope_neg_inf
    }

    pub fn slope_pos_inf(&self) -> f64 {
        self.slope_pos_inf
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// First and last breakpoint.
    pub fn span(&self) -> Interval {
        Interval {
            lo: self.breakpoints[0],
            hi: self.breakpoints[self.len() - 1],
        }
    }

    /// The `len() + 1` slopes from the left ray to the right ray.
    pub fn slopes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(self.slope_neg_inf);
        for k in 1..self.len() {
            out.push(self.segment_slope(k - 1));
        }
        out.push(self.slope_pos_inf);
        out
    }

    /// Slope of the segment between breakpoints `k` and `k + 1`.
    fn segment_slope(&self, k: usize) -> f64 {
        chord_slope(
            self.breakpoints[k],
            self.values[k],
            self.breakpoints[k + 1],
            self.values[k + 1],
        )
    }

    pub fn is_affine(&self) -> bool {
        self.len() == 1 && self.slope_neg_inf == self.slope_pos_inf
    }

    /// Left slopes nonincreasing, i.e. every kink carries positive mass.
    pub fn is_concave(&self) -> bool {
        self.slopes().windows(2).all(|w| w[0] >= w[1])
    }

    pub fn evaluate(&self, u: f64) -> f64 {
        let n = self.len();
        let first = self.breakpoints[0];
        let last = self.breakpoints[n - 1];
        if u <= first {
            return self.values[0] + self.slope_neg_inf * (u - first);
        }
        if u >= last {
            return self.values[n - 1] + self.slope_pos_inf * (u - last);
        }
        // first < u < last, so 1 <= right <= n - 1
        let right = self.breakpoints.partition_point(|&x| x <= u);
        let left = right - 1;
        let (x0, x1) = (self.breakpoints[left], self.breakpoints[right]);
        if u == x0 {
            return self.values[left];
        }
        let (y0, y1) = (self.values[left], self.values[right]);
        y0 + (y1 - y0) * ((u - x0) / (x1 - x0))
    }

    /// `alpha·f + beta·g`, exact up to rounding on the merged breakpoints.
    pub fn linear_combination(f: &PwlFunction, g: &PwlFunction, alpha: f64, beta: f64) -> Self {
        let breakpoints = merge_sorted(&f.breakpoints, &g.breakpoints);
        let values = breakpoints
            .iter()
            .map(|&u| alpha * f.evaluate(u) + beta * g.evaluate(u))
            .collect();
        PwlFunction::new(
            breakpoints,
            values,
            alpha * f.slope_neg_inf + beta * g.slope_neg_inf,
            alpha * f.slope_pos_inf + beta * g.slope_pos_inf,
        )
        .expect("linear combination of valid functions is valid")
    }

    pub fn sub(&self, other: &PwlFunction) -> Self {
        PwlFunction::linear_combination(self, other, 1.0, -1.0)
    }

    pub fn add(&self, other: &PwlFunction) -> Self {
        PwlFunction::linear_combination(self, other, 1.0, 1.0)
    }

    /// `f + c`.
    pub fn shifted(&self, c: f64) -> Self {
        PwlFunction::new(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v + c).collect(),
            self.slope_neg_inf,
            self.slope_pos_inf,
        )
        .expect("shift of a valid function is valid")
    }

    pub fn has_same_rays(&self, other: &PwlFunction) -> bool {
        (self.slope_neg_inf - other.slope_neg_inf).abs() <= KINK_TOLERANCE
            && (self.slope_pos_inf - other.slope_pos_inf).abs() <= KINK_TOLERANCE
    }

    /// Supremum of `|f - g|`, attained at a breakpoint of either function.
    pub fn sup_distance(&self, other: &PwlFunction) -> Result<f64, PwlError> {
        if !self.has_same_rays(other) {
            return Err(PwlError::SlopeMismatch {
                left_a: self.slope_neg_inf,
                right_a: self.slope_pos_inf,
                left_b: other.slope_neg_inf,
                right_b: other.slope_pos_inf,
            });
        }
        Ok(merge_sorted(&self.breakpoints, &other.breakpoints)
            .into_iter()
            .map(|u| (self.evaluate(u) - other.evaluate(u)).abs())
            .fold(0.0, f64::max))
    }

    /// Exact integral over `window` (trapezoids on every linear piece).
    pub fn integrate(&self, window: Interval) -> f64 {
        if window.is_degenerate() {
            return 0.0;
        }
        let mut nodes = Vec::with_capacity(self.len() + 2);
        nodes.push(window.lo);
        nodes.extend(
            self.breakpoints
                .iter()
                .copied()
                .filter(|&u| u > window.lo && u < window.hi),
        );
        nodes.push(window.hi);
        let mut total = 0.0;
        let mut prev = (nodes[0], self.evaluate(nodes[0]));
        for &u in &nodes[1..] {
            let v = self.evaluate(u);
            total += 0.5 * (u - prev.0) * (prev.1 + v);
            prev = (u, v);
        }
        total
    }
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => match x.partial_cmp(&y).expect("finite breakpoints") {
                Ordering::Less => {
                    i += 1;
                    x
                }
                Ordering::Greater => {
                    j += 1;
                    y
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    x
                }
            },
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

/// Drops every breakpoint whose slope jump is below [`KINK_TOLERANCE`].
///
/// Input must already be validated. Ray slopes are kept as given; a dropped
/// breakpoint next to a ray is absorbed into that ray.
fn canonicalize(
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    slope_neg_inf: f64,
    slope_pos_inf: f64,
) -> PwlFunction {
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(breakpoints.len());
    let left_slope = |kept: &[(f64, f64)]| -> f64 {
        match kept {
            [.., a, b] => chord_slope(a.0, a.1, b.0, b.1),
            _ => slope_neg_inf,
        }
    };
    for (u, v) in breakpoints.into_iter().zip(values) {
        while let Some(&(tu, tv)) = kept.last() {
            let right = chord_slope(tu, tv, u, v);
            if (left_slope(&kept) - right).abs() < KINK_TOLERANCE {
                kept.pop();
            } else {
                break;
            }
        }
        kept.push((u, v));
    }
    while kept.len() > 1 {
        if (left_slope(&kept) - slope_pos_inf).abs() < KINK_TOLERANCE {
            kept.pop();
        } else {
            break;
        }
    }
    if kept.len() == 1 && (slope_neg_inf - slope_pos_inf).abs() < KINK_TOLERANCE {
        let (u, v) = kept[0];
        let at_zero = if u > 0.0 {
            v - slope_neg_inf * u
        } else {
            v - slope_pos_inf * u
        };
        kept[0] = (0.0, at_zero);
    }
    let (breakpoints, values) = kept.into_iter().unzip();
    PwlFunction {
        breakpoints,
        values,
        slope_neg_inf,
        slope_pos_inf,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

/// A signed measure with finitely many point masses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    /// Sorts by position, merges coincident atoms, and drops zero masses.
    pub fn from_atoms<I>(atoms: I) -> Result<Self, PwlError>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<Atom> = Vec::new();
        for (position, mass) in atoms {
            if !position.is_finite() || !mass.is_finite() {
                return Err(PwlError::InvalidAtom);
            }
            raw.push(Atom { position, mass });
        }
        raw.sort_by(|a, b| a.position.total_cmp(&b.position));
        let mut merged: Vec<Atom> = Vec::with_capacity(raw.len());
        for atom in raw {
            match merged.last_mut() {
                Some(last) if last.position == atom.position => last.mass += atom.mass,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.mass != 0.0);
        Ok(AtomicMeasure { atoms: merged })
    }

    pub fn empty() -> Self {
        AtomicMeasure::default()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass.abs()).sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.mass > 0.0)
    }

    /// `∫ f dμ = Σ f(position)·mass`.
    pub fn integrate(&self, f: &PwlFunction) -> f64 {
        self.atoms
            .iter()
            .map(|a| f.evaluate(a.position) * a.mass)
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        AtomicMeasure::from_atoms(self.atoms.iter().map(|a| (a.position, c * a.mass)))
            .expect("scaling keeps atoms finite")
    }

    pub fn add(&self, other: &AtomicMeasure) -> Self {
        AtomicMeasure::from_atoms(
            self.atoms
                .iter()
                .chain(other.atoms.iter())
                .map(|a| (a.position, a.mass)),
        )
        .expect("sum of finite measures is finite")
    }

    pub fn sub(&self, other: &AtomicMeasure) -> Self {
        self.add(&other.scaled(-1.0))
    }

    pub fn positive_part(&self) -> Self {
        AtomicMeasure {
            atoms: self
                .atoms
                .iter()
                .copied()
                .filter(|a| a.mass > 0.0)
                .collect(),
        }
    }

    /// The negative part as a nonnegative measure.
    pub fn negative_part(&self) -> Self {
        AtomicMeasure {
            atoms: self
                .atoms
                .iter()
                .filter(|a| a.mass < 0.0)
                .map(|a| Atom {
                    position: a.position,
                    mass: -a.mass,
                })
                .collect(),
        }
    }
}
