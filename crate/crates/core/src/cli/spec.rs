//! Metric specification documents.
//!
//! ```json
//! {"divisor": {"a0": 0, "a_inf": 1},
//!  "metric": {"type": "scaled", "base": {"type": "canonical"}, "c": 0.3},
//!  "grid": {"half_width": 20, "points": 4001}}
//! ```
//!
//! Variants: `canonical`, `fubini_study`, `scaled {base, c}`,
//! `mollified {base, width}`, `pwl {breakpoints, values, slopes?}` and
//! `difference {plus, minus}`. The bases of `scaled` and `mollified` share
//! the enclosing divisor; `plus` and `minus` are complete documents whose
//! divisors must differ by the outer one. Explicit `pwl` slopes, when given,
//! must be `[a_inf, -a0]`. Nested documents are sampled on the outer grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arakelov::{MetricFunction, SamplingGrid, ToricDivisor};
use crate::pwl::PwlFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("malformed spec: {0}")]
    Parse(String),
    #[error("invalid spec: {}", .0.join("; "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorSpec {
    pub a0: f64,
    pub a_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricVariant {
    Canonical,
    FubiniStudy,
    Scaled {
        base: Box<MetricVariant>,
        c: f64,
    },
    Mollified {
        base: Box<MetricVariant>,
        width: f64,
    },
    Pwl {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slopes: Option<[f64; 2]>,
    },
    Difference {
        plus: Box<MetricSpec>,
        minus: Box<MetricSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub divisor: DivisorSpec,
    pub metric: MetricVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

/// Parses and validates a spec document.
pub fn parse_spec(text: &str) -> Result<MetricSpec, SpecError> {
    let spec: MetricSpec =
        serde_json::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
    spec.build(None)?;
    Ok(spec)
}

/// Canonical text of a spec; parsing it back yields the same spec.
pub fn normalize(spec: &MetricSpec) -> String {
    spec.to_json()
}

impl MetricSpec {
    /// Exact description of a metric as a `pwl` document.
    pub fn from_metric(m: &MetricFunction) -> Self {
        let d = m.divisor();
        let psi = m.psi();
        MetricSpec {
            divisor: DivisorSpec {
                a0: d.a0(),
                a_inf: d.a_inf(),
            },
            metric: MetricVariant::Pwl {
                breakpoints: psi.breakpoints().to_vec(),
                values: psi.values().to_vec(),
                slopes: Some([psi.slope_neg_inf(), psi.slope_pos_inf()]),
            },
            grid: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("specs always serialize")
    }

    /// Builds the metric. `grid` overrides the document's own grid for
    /// every sampled component.
    pub fn build(&self, grid: Option<SamplingGrid>) -> Result<MetricFunction, SpecError> {
        let mut violations = Vec::new();
        let metric = self.build_at("$", grid, &mut violations);
        match metric {
            Some(m) if violations.is_empty() => Ok(m),
            _ => Err(SpecError::Validation(violations)),
        }
    }

    fn build_at(
        &self,
        path: &str,
        grid: Option<SamplingGrid>,
        violations: &mut Vec<String>,
    ) -> Option<MetricFunction> {
        let divisor = match ToricDivisor::new(self.divisor.a0, self.divisor.a_inf) {
            Ok(d) => d,
            Err(e) => {
                violations.push(format!("{path}.divisor: {e}"));
                return None;
            }
        };
        let grid = match grid {
            Some(g) => g,
            None => match self.grid {
                Some(g) => match SamplingGrid::new(g.half_width, g.points) {
                    Ok(g) => g,
                    Err(e) => {
                        violations.push(format!("{path}.grid: {e}"));
                        return None;
                    }
                },
                None => SamplingGrid::default(),
            },
        };
        build_variant(
            &self.metric,
            divisor,
            grid,
            &format!("{path}.metric"),
            violations,
        )
    }
}

fn fail(violations: &mut Vec<String>, path: &str, msg: String) -> Option<MetricFunction> {
    violations.push(format!("{path}: {msg}"));
    None
}

fn build_variant(
    variant: &MetricVariant,
    divisor: ToricDivisor,
    grid: SamplingGrid,
    path: &str,
    violations: &mut Vec<String>,
) -> Option<MetricFunction> {
    match variant {
        MetricVariant::Canonical => Some(MetricFunction::canonical(divisor)),
        MetricVariant::FubiniStudy => {
            if divisor.a0() != 0.0 || divisor.a_inf() != 1.0 {
                return fail(
                    violations,
                    path,
                    "fubini_study needs the divisor (a0, a_inf) = (0, 1)".into(),
                );
            }
            match MetricFunction::fubini_study_on(grid) {
                Ok(m) => Some(m),
                Err(e) => fail(violations, path, e.to_string()),
            }
        }
        MetricVariant::Scaled { base, c } => {
            if !c.is_finite() {
                return fail(violations, path, "scale factor must be finite".into());
            }
            build_variant(base, divisor, grid, &format!("{path}.base"), violations)
                .map(|m| m.scale(*c))
        }
        MetricVariant::Mollified { base, width } => {
            let m = build_variant(base, divisor, grid, &format!("{path}.base"), violations)?;
            match m.mollify(*width) {
                Ok(m) => Some(m),
                Err(e) => fail(violations, path, e.to_string()),
            }
        }
        MetricVariant::Pwl {
            breakpoints,
            values,
            slopes,
        } => {
            let expected = [divisor.a_inf(), -divisor.a0()];
            if let Some(s) = slopes {
                if *s != expected {
                    return fail(
                        violations,
                        path,
                        format!(
                            "slopes [{}, {}] differ from the divisor's [{}, {}]",
                            s[0], s[1], expected[0], expected[1]
                        ),
                    );
                }
            }
            let psi = match PwlFunction::new(
                breakpoints.clone(),
                values.clone(),
                expected[0],
                expected[1],
            ) {
                Ok(psi) => psi,
                Err(e) => return fail(violations, path, e.to_string()),
            };
            match MetricFunction::new(divisor, psi) {
                Ok(m) => Some(m),
                Err(e) => fail(violations, path, e.to_string()),
            }
        }
        MetricVariant::Difference { plus, minus } => {
            let p = plus.build_at(&format!("{path}.plus"), Some(grid), violations);
            let q = minus.build_at(&format!("{path}.minus"), Some(grid), violations);
            let (p, q) = (p?, q?);
            let (dp, dq) = (p.divisor(), q.divisor());
            if dp.a0() - dq.a0() != divisor.a0() || dp.a_inf() - dq.a_inf() != divisor.a_inf() {
                return fail(
                    violations,
                    path,
                    format!(
                        "plus - minus has divisor ({}, {}), expected ({}, {})",
                        dp.a0() - dq.a0(),
                        dp.a_inf() - dq.a_inf(),
                        divisor.a0(),
                        divisor.a_inf()
                    ),
                );
            }
            match MetricFunction::new(divisor, p.psi().sub(q.psi())) {
                Ok(m) => Some(m),
                Err(e) => fail(violations, path, e.to_string()),
            }
        }
    }
}
