//! Report output: JSON, CSV trace tables and a plain-text summary. Every
//! float is written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;
use tvspec_core::ExtReal;

use crate::error::CliError;
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
    All,
}

pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn ext(x: ExtReal) -> String {
    if x.is_infinite() {
        "inf".into()
    } else if x.is_finite() {
        sig17(x.to_f64())
    } else {
        format!("2^{}", sig17(x.log2()))
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => write!(out, "{u}").unwrap(),
            (_, Some(i), _) => write!(out, "{i}").unwrap(),
            (_, _, Some(f)) => out.push_str(&sig17(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn to_json(report: &Report) -> String {
    let v = serde_json::to_value(report).expect("reports serialize");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per iterate of every radius estimate.
pub fn radius_csv(report: &Report) -> String {
    let mut out = String::from("section,kind,n,iterate,lower,upper\n");
    for s in &report.sections {
        for e in &s.radii {
            for (n, v) in &e.iterates {
                writeln!(out, "{},{},{},{},{},{}", csv_field(&s.label), e.kind.name(), n, ext(*v), ext(e.lower), ext(e.upper)).unwrap();
            }
        }
    }
    out
}

/// One row per increment of every Neumann monitor.
pub fn neumann_csv(report: &Report) -> String {
    let mut out = String::from("section,kind,lambda_re,lambda_im,n,increment,verdict\n");
    for s in &report.sections {
        for r in &s.neumann {
            for (n, v) in &r.residual_trace {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{:?}",
                    csv_field(&s.label),
                    r.kind.name(),
                    sig17(r.lambda.re),
                    sig17(r.lambda.im),
                    n,
                    ext(*v),
                    r.verdict
                )
                .unwrap();
            }
        }
    }
    out
}

pub fn summary(report: &Report) -> String {
    let mut out = String::new();
    writeln!(out, "{} report ({})", report.kind, report.schema).unwrap();
    if let Some(sc) = &report.scenario {
        writeln!(out, "scenario: {}", sc.name).unwrap();
    }
    let p = &report.parameters;
    let opt = |x: Option<usize>| x.map_or("default".to_string(), |v| v.to_string());
    writeln!(out, "seed {}, depth {}, level {}", p.seed, opt(p.depth), opt(p.level)).unwrap();
    for s in &report.sections {
        writeln!(out).unwrap();
        writeln!(out, "[{}] {}", if s.passed { "PASS" } else { "FAIL" }, s.label).unwrap();
        if let Some(t) = &s.title {
            writeln!(out, "  {t}").unwrap();
        }
        if let Some(e) = &s.expected {
            writeln!(out, "  expected: {e}").unwrap();
        }
        for c in &s.checks {
            writeln!(out, "  {} {}: {} (expected {})", if c.passed { "ok  " } else { "FAIL" }, c.name, c.observed, c.expected).unwrap();
        }
        for f in &s.findings {
            writeln!(out, "  {f}").unwrap();
        }
        for e in &s.radii {
            writeln!(out, "  {} in {}", e.kind, e.bracket()).unwrap();
        }
        for r in &s.neumann {
            writeln!(out, "  Neumann {} at {}: {:?} after {} terms", r.kind, r.lambda, r.verdict, r.terms_used).unwrap();
        }
        for n in &s.notes {
            writeln!(out, "  note: {n}").unwrap();
        }
        if let Some(e) = &s.error {
            writeln!(out, "  error: {e}").unwrap();
        }
    }
    let passed = report.sections.iter().filter(|s| s.passed).count();
    writeln!(out).unwrap();
    writeln!(out, "{passed}/{} sections passed", report.sections.len()).unwrap();
    out
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

/// Writes the requested files into `dir` and returns their names.
pub fn emit(report: &Report, format: Format, dir: &Path) -> Result<Vec<&'static str>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), source: e })?;
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::All) {
        write_file(dir, "report.json", &to_json(report))?;
        written.push("report.json");
    }
    if matches!(format, Format::Csv | Format::All) {
        write_file(dir, "radius_traces.csv", &radius_csv(report))?;
        write_file(dir, "neumann_traces.csv", &neumann_csv(report))?;
        written.extend(["radius_traces.csv", "neumann_traces.csv"]);
    }
    if matches!(format, Format::Text | Format::All) {
        write_file(dir, "summary.txt", &summary(report))?;
        written.push("summary.txt");
    }
    Ok(written)
}

/// Text written to stdout when no output directory is given.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => format!("{}\n{}", radius_csv(report), neumann_csv(report)),
        Format::Text => summary(report),
        Format::All => format!("{}\n{}", summary(report), to_json(report)),
    }
}
