//! Exact piecewise-linear computations for toric metrized divisors on the
//! projective line: roof functions, equilibrium metrics, Monge–Ampère
//! measures, heights and χ-arithmetic volumes, together with a randomized
//! harness checking `height ≤ chi_volume` and the identities behind it.

pub mod arakelov;
pub mod cli;
pub mod convex;
pub mod harness;
pub mod pwl;

pub use arakelov::{
    ArakelovError, HeightReport, MetricFunction, RoofFunction, SamplingGrid, ToricDivisor,
};
pub use convex::ConvexError;
pub use pwl::{Atom, AtomicMeasure, Interval, PwlError, PwlFunction};
