//! Concave envelopes, concave Legendre–Fenchel conjugates, second-derivative
//! measures, contact sets and Dirichlet energies of piecewise-linear functions.
//!
//! Sign convention: for a function `f` the second-derivative measure carries
//! mass `(left slope) - (right slope)` at each kink, so concave kinks are
//! positive. The envelope of `f` is the smallest concave function lying above
//! `f` whose ray slopes agree with those of `f`.

use thiserror::Error;

use crate::pwl::{chord_slope, AtomicMeasure, Interval, PwlError, PwlFunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("ray slopes {slope_neg_inf} (left) < {slope_pos_inf} (right): no concave envelope")]
    SlopeOrderViolation {
        slope_neg_inf: f64,
        slope_pos_inf: f64,
    },
    #[error(
        "conjugate domain [{lo}, {hi}] differs from the slope range [{expected_lo}, {expected_hi}]"
    )]
    DomainMismatch {
        lo: f64,
        hi: f64,
        expected_lo: f64,
        expected_hi: f64,
    },
    #[error("envelope lies below the function by {excess} at u = {at}")]
    EnvelopeMismatch { at: f64, excess: f64 },
    #[error("function is not compactly supported (ray slopes {slope_neg_inf}, {slope_pos_inf}; ray values {left}, {right})")]
    NonCompactSupport {
        slope_neg_inf: f64,
        slope_pos_inf: f64,
        left: f64,
        right: f64,
    },
    #[error(transparent)]
    Pwl(#[from] PwlError),
}

/// Ray values below this are treated as zero by [`dirichlet_energy`].
const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Smallest concave function `≥ f` with the same ray slopes as `f`.
///
/// Monotone chain over the breakpoints where the left ray acts as a virtual
/// edge of slope `slope_neg_inf` below the first hull vertex and the right ray
/// as one of slope `slope_pos_inf` above the last. A concave canonical input
/// is returned unchanged bit for bit.
pub fn upper_concave_envelope(f: &PwlFunction) -> Result<PwlFunction, ConvexError> {
    let (left, right) = (f.slope_neg_inf(), f.slope_pos_inf());
    if left < right {
        return Err(ConvexError::SlopeOrderViolation {
            slope_neg_inf: left,
            slope_pos_inf: right,
        });
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(f.len());
    for (&u, &v) in f.breakpoints().iter().zip(f.values()) {
        loop {
            let dominated = match hull.as_slice() {
                [] => false,
                // only vertex so far: is it under the left ray through (u, v)?
                [a] => chord_slope(a.0, a.1, u, v) >= left,
                [.., a, b] => chord_slope(a.0, a.1, b.0, b.1) <= chord_slope(b.0, b.1, u, v),
            };
            if !dominated {
                break;
            }
            hull.pop();
        }
        hull.push((u, v));
    }
    while let [.., a, b] = hull.as_slice() {
        if chord_slope(a.0, a.1, b.0, b.1) <= right {
            hull.pop();
        } else {
            break;
        }
    }
    let (xs, ys) = hull.into_iter().unzip();
    Ok(PwlFunction::new(xs, ys, left, right)?)
}

/// `θ(x) = inf_u (x·u - f(u))` on `domain`, which must be the slope range
/// `[slope_pos_inf, slope_neg_inf]` of `f`.
///
/// The infimum is always attained at a vertex of the envelope, so the result
/// is computed from the envelope and `conjugate(f) == conjugate(envelope(f))`
/// holds exactly. Outside the domain the returned function continues along
/// the end segments; callers should only evaluate it on `domain`.
pub fn concave_conjugate(f: &PwlFunction, domain: Interval) -> Result<PwlFunction, ConvexError> {
    if domain.lo() != f.slope_pos_inf() || domain.hi() != f.slope_neg_inf() {
        return Err(ConvexError::DomainMismatch {
            lo: domain.lo(),
            hi: domain.hi(),
            expected_lo: f.slope_pos_inf(),
            expected_hi: f.slope_neg_inf(),
        });
    }
    let env = upper_concave_envelope(f)?;
    let (us, vs) = (env.breakpoints(), env.values());
    let m = us.len() - 1;
    if m == 0 {
        return Ok(PwlFunction::affine(us[0], -vs[0]));
    }
    // x runs upwards through the envelope slopes, i.e. right to left along u.
    let mut xs = Vec::with_capacity(m + 2);
    let mut thetas = Vec::with_capacity(m + 2);
    xs.push(domain.lo());
    thetas.push(domain.lo() * us[m] - vs[m]);
    for j in (1..=m).rev() {
        let s = chord_slope(us[j - 1], vs[j - 1], us[j], vs[j]);
        xs.push(s);
        thetas.push(s * us[j] - vs[j]);
    }
    xs.push(domain.hi());
    thetas.push(domain.hi() * us[0] - vs[0]);
    Ok(PwlFunction::new(xs, thetas, us[m], us[0])?)
}

/// Inverse transform: `ψ(u) = inf_{x ∈ domain} (x·u - θ(x))`.
///
/// For concave `θ` this recovers the concave function whose conjugate is `θ`;
/// the result has ray slopes `domain.hi()` on the left and `domain.lo()` on
/// the right.
pub fn conjugate_from_domain(theta: &PwlFunction, domain: Interval) -> PwlFunction {
    let mut nodes = vec![domain.lo()];
    nodes.extend(
        theta
            .breakpoints()
            .iter()
            .copied()
            .filter(|&x| x > domain.lo() && x < domain.hi()),
    );
    if !domain.is_degenerate() {
        nodes.push(domain.hi());
    }
    let vals: Vec<f64> = nodes.iter().map(|&x| theta.evaluate(x)).collect();
    if nodes.len() == 1 {
        return PwlFunction::affine(nodes[0], -vals[0]);
    }
    // between consecutive vertices x_j < x_{j+1} the active line switches at
    // u = slope of θ on that segment; u decreases as x increases.
    let mut us = Vec::with_capacity(nodes.len() - 1);
    let mut psis = Vec::with_capacity(nodes.len() - 1);
    for j in (0..nodes.len() - 1).rev() {
        let u = chord_slope(nodes[j], vals[j], nodes[j + 1], vals[j + 1]);
        us.push(u);
        psis.push(nodes[j + 1] * u - vals[j + 1]);
    }
    // a non-concave θ would give non-increasing kinks; keep strictly increasing ones
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(us.len());
    for (u, p) in us.into_iter().zip(psis) {
        match pts.last() {
            Some(&(last, _)) if u <= last => {}
            _ => pts.push((u, p)),
        }
    }
    let (xs, ys) = pts.into_iter().unzip();
    PwlFunction::new(xs, ys, domain.hi(), domain.lo()).expect("finite conjugate data")
}

/// Atoms at the kinks of `f` with mass `left slope - right slope`.
pub fn second_derivative_measure(f: &PwlFunction) -> AtomicMeasure {
    let slopes = f.slopes();
    AtomicMeasure::from_atoms(
        f.breakpoints()
            .iter()
            .zip(slopes.windows(2))
            .map(|(&u, w)| (u, w[0] - w[1])),
    )
    .expect("finite kinks")
}

/// Maximal intervals where `env - f <= tol`, clamped to the breakpoint span
/// of the two functions. The unbounded ends of the contact set show up as
/// intervals touching the ends of the span.
pub fn contact_set(
    f: &PwlFunction,
    env: &PwlFunction,
    tol: f64,
) -> Result<Vec<Interval>, ConvexError> {
    if !f.has_same_rays(env) {
        return Err(ConvexError::EnvelopeMismatch {
            at: f64::INFINITY,
            excess: f64::INFINITY,
        });
    }
    let gap = env.sub(f);
    let mut nodes: Vec<f64> = f.breakpoints().to_vec();
    nodes.extend_from_slice(env.breakpoints());
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let d: Vec<f64> = nodes.iter().map(|&u| gap.evaluate(u)).collect();
    if let Some((k, &dk)) = d.iter().enumerate().find(|(_, &dk)| dk < -tol) {
        return Err(ConvexError::EnvelopeMismatch {
            at: nodes[k],
            excess: -dk,
        });
    }
    let inside = |dk: f64| dk <= tol;
    let crossing = |k: usize| -> f64 {
        let t = (tol - d[k]) / (d[k + 1] - d[k]);
        nodes[k] + t * (nodes[k + 1] - nodes[k])
    };
    let mut out = Vec::new();
    let mut start = if inside(d[0]) { Some(nodes[0]) } else { None };
    for k in 0..nodes.len() - 1 {
        match (inside(d[k]), inside(d[k + 1])) {
            (true, false) => {
                let lo = start.take().expect("open interval");
                out.push(Interval::new(lo, crossing(k))?);
            }
            (false, true) => start = Some(crossing(k)),
            _ => {}
        }
    }
    if let Some(lo) = start {
        out.push(Interval::new(lo, nodes[nodes.len() - 1])?);
    }
    Ok(out)
}

/// `∫ (f')² du` for `f` with flat rays. Only the slopes matter here, so the
/// ray values may be arbitrary constants.
pub fn gradient_energy(f: &PwlFunction) -> Result<f64, ConvexError> {
    if f.slope_neg_inf() != 0.0 || f.slope_pos_inf() != 0.0 {
        return Err(ConvexError::NonCompactSupport {
            slope_neg_inf: f.slope_neg_inf(),
            slope_pos_inf: f.slope_pos_inf(),
            left: f.values()[0],
            right: f.values()[f.len() - 1],
        });
    }
    let (us, vs) = (f.breakpoints(), f.values());
    Ok((1..us.len())
        .map(|k| {
            let s = chord_slope(us[k - 1], vs[k - 1], us[k], vs[k]);
            s * s * (us[k] - us[k - 1])
        })
        .sum())
}

/// `∫ (f')² du` for a compactly supported `f` (flat rays at height zero).
pub fn dirichlet_energy(f: &PwlFunction) -> Result<f64, ConvexError> {
    let left = f.values()[0];
    let right = f.values()[f.len() - 1];
    if f.slope_neg_inf() != 0.0
        || f.slope_pos_inf() != 0.0
        || left.abs() > SUPPORT_TOLERANCE
        || right.abs() > SUPPORT_TOLERANCE
    {
        return Err(ConvexError::NonCompactSupport {
            slope_neg_inf: f.slope_neg_inf(),
            slope_pos_inf: f.slope_pos_inf(),
            left,
            right,
        });
    }
    gradient_energy(f)
}
