//! Reports and their two serializations: a JSON object and a tab-delimited
//! table whose `#` lines carry metadata, so curves plot directly.

use serde_json::{Map, Value};

use crate::arakelov::HeightReport;
use crate::harness::{ConvergenceRow, ConvergenceTable, SuiteReport};
use crate::pwl::AtomicMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Settings in effect for a run, echoed into every report.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub command: String,
    pub tol: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub grid_half_width: f64,
    pub grid_points: usize,
    pub widths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub points: Vec<(f64, f64)>,
    /// Ray slopes, for curves defined on the whole line.
    pub slopes: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyThresholds {
    pub gap_floor: f64,
    pub orthogonality: f64,
    pub energy_relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Scalar {
        name: &'static str,
        value: f64,
    },
    Curve(Curve),
    Measure(AtomicMeasure),
    Verify {
        report: HeightReport,
        thresholds: VerifyThresholds,
        passed: bool,
    },
    Suite(SuiteReport),
    Converge {
        table: ConvergenceTable,
        passed: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub settings: Settings,
    pub body: Body,
}

impl Report {
    /// Whether every check carried by the report held.
    pub fn passed(&self) -> bool {
        match &self.body {
            Body::Verify { passed, .. } | Body::Converge { passed, .. } => *passed,
            Body::Suite(s) => s.all_passed(),
            _ => true,
        }
    }
}

/// `%.17g`: seventeen significant digits, trailing zeros dropped.
pub fn g17(x: f64) -> String {
    // negative zero prints as 0
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(g17(x))
    }
}

/// Pretty JSON in which floats keep seventeen significant digits.
fn write_json(value: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (None, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&g17(n.as_f64().expect("finite float"))),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn object(entries: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in entries {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}

fn settings_json(s: &Settings) -> Value {
    object(vec![
        ("command", Value::String(s.command.clone())),
        ("tol", s.tol.map_or(Value::Null, num)),
        ("seed", Value::from(s.seed)),
        ("trials", Value::from(s.trials)),
        ("grid_half_width", num(s.grid_half_width)),
        ("grid_points", Value::from(s.grid_points)),
        (
            "widths",
            Value::Array(s.widths.iter().map(|&w| num(w)).collect()),
        ),
    ])
}

fn pairs_json(points: &[(f64, f64)], x: &str, y: &str) -> Value {
    Value::Array(
        points
            .iter()
            .map(|&(a, b)| object(vec![(x, num(a)), (y, num(b))]))
            .collect(),
    )
}

fn height_report_json(r: &HeightReport) -> Value {
    object(vec![
        ("height", num(r.height)),
        ("chi_volume", num(r.chi_volume)),
        ("gap", num(r.gap)),
        ("orthogonality_residual", num(r.orthogonality_residual)),
        ("energy", num(r.energy)),
    ])
}

fn row_json(r: &ConvergenceRow) -> Value {
    object(vec![
        ("width", num(r.width)),
        ("sup_distance", num(r.sup_distance)),
        ("height", num(r.height)),
        ("chi_volume", num(r.chi_volume)),
    ])
}

fn suite_json(s: &SuiteReport) -> Value {
    let checks = s
        .checks
        .iter()
        .map(|c| {
            object(vec![
                ("name", Value::String(c.name.into())),
                ("evaluated", Value::from(c.evaluated)),
                ("passed", Value::from(c.passed)),
                ("worst_residual", num(c.worst_residual)),
                ("tolerance", num(c.tolerance)),
            ])
        })
        .collect();
    let failures = s
        .failures
        .iter()
        .map(|f| {
            object(vec![
                ("trial", Value::from(f.trial)),
                ("check", Value::String(f.check.into())),
                ("residual", num(f.residual)),
                (
                    "metric",
                    serde_json::from_str(&f.metric).unwrap_or(Value::String(f.metric.clone())),
                ),
            ])
        })
        .collect();
    object(vec![
        ("trials", Value::from(s.trials)),
        ("seed", Value::from(s.seed)),
        ("failure_count", Value::from(s.failure_count)),
        ("checks", Value::Array(checks)),
        ("failures", Value::Array(failures)),
    ])
}

fn body_json(body: &Body) -> Value {
    match body {
        Body::Scalar { name, value } => object(vec![(name, num(*value))]),
        Body::Curve(c) => {
            let mut entries = vec![("points", pairs_json(&c.points, c.x_label, c.y_label))];
            if let Some((left, right)) = c.slopes {
                entries.push(("slope_left", num(left)));
                entries.push(("slope_right", num(right)));
            }
            object(entries)
        }
        Body::Measure(m) => {
            let atoms: Vec<(f64, f64)> = m.atoms().iter().map(|a| (a.position, a.mass)).collect();
            object(vec![
                ("atoms", pairs_json(&atoms, "position", "mass")),
                ("total_mass", num(m.total_mass())),
            ])
        }
        Body::Verify {
            report,
            thresholds,
            passed,
        } => object(vec![
            ("report", height_report_json(report)),
            (
                "thresholds",
                object(vec![
                    ("gap_floor", num(thresholds.gap_floor)),
                    ("orthogonality", num(thresholds.orthogonality)),
                    ("energy_relative", num(thresholds.energy_relative)),
                ]),
            ),
            ("passed", Value::Bool(*passed)),
        ]),
        Body::Suite(s) => suite_json(s),
        Body::Converge { table, passed } => object(vec![
            ("degree", num(table.degree)),
            (
                "rows",
                Value::Array(table.rows.iter().map(row_json).collect()),
            ),
            ("limit", row_json(&table.limit)),
            ("passed", Value::Bool(*passed)),
        ]),
    }
}

fn table_text(report: &Report) -> String {
    let s = &report.settings;
    let mut out = format!(
        "# command\t{}\n# tol\t{}\n# seed\t{}\n# trials\t{}\n# grid_half_width\t{}\n# grid_points\t{}\n",
        s.command,
        s.tol.map_or("default".to_string(), g17),
        s.seed,
        s.trials,
        g17(s.grid_half_width),
        s.grid_points
    );
    let mut line = |cells: &[String]| {
        out.push_str(&cells.join("\t"));
        out.push('\n');
    };
    match &report.body {
        Body::Scalar { name, value } => line(&[name.to_string(), g17(*value)]),
        Body::Curve(c) => {
            if let Some((left, right)) = c.slopes {
                line(&[format!("# slope_left\t{}", g17(left))]);
                line(&[format!("# slope_right\t{}", g17(right))]);
            }
            line(&[format!("# {}", c.x_label), c.y_label.to_string()]);
            for &(x, y) in &c.points {
                line(&[g17(x), g17(y)]);
            }
        }
        Body::Measure(m) => {
            line(&["# position".into(), "mass".into()]);
            for a in m.atoms() {
                line(&[g17(a.position), g17(a.mass)]);
            }
        }
        Body::Verify {
            report: r, passed, ..
        } => {
            line(&["height".into(), g17(r.height)]);
            line(&["chi_volume".into(), g17(r.chi_volume)]);
            line(&["gap".into(), g17(r.gap)]);
            line(&[
                "orthogonality_residual".into(),
                g17(r.orthogonality_residual),
            ]);
            line(&["energy".into(), g17(r.energy)]);
            line(&["passed".into(), passed.to_string()]);
        }
        Body::Suite(suite) => {
            line(&[format!("# failure_count\t{}", suite.failure_count)]);
            line(&[
                "# check".into(),
                "evaluated".into(),
                "passed".into(),
                "worst_residual".into(),
                "tolerance".into(),
            ]);
            for c in &suite.checks {
                line(&[
                    c.name.into(),
                    c.evaluated.to_string(),
                    c.passed.to_string(),
                    g17(c.worst_residual),
                    g17(c.tolerance),
                ]);
            }
        }
        Body::Converge { table, passed } => {
            line(&[format!("# passed\t{passed}")]);
            line(&[
                "# width".into(),
                "sup_distance".into(),
                "height".into(),
                "chi_volume".into(),
            ]);
            for r in table.rows.iter().chain(std::iter::once(&table.limit)) {
                line(&[
                    g17(r.width),
                    g17(r.sup_distance),
                    g17(r.height),
                    g17(r.chi_volume),
                ]);
            }
        }
    }
    out
}

/// Deterministic rendering of a report.
pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let value = object(vec![
                ("settings", settings_json(&report.settings)),
                ("result", body_json(&report.body)),
            ]);
            let mut text = String::new();
            write_json(&value, 0, &mut text);
            text.push('\n');
            text
        }
        Format::Table => table_text(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(g17(0.2), "0.20000000000000001");
        assert_eq!(g17(0.5), "0.5");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-3.0), "-3");
        assert_eq!(g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(123456.0), "123456");
        assert_eq!(g17(f64::INFINITY), "inf");
        for x in [0.1, 1.0 / 3.0, 2.0f64.ln(), 1e-300, 6.02e23, -0.75] {
            assert_eq!(g17(x).parse::<f64>().unwrap(), x);
        }
    }
}
