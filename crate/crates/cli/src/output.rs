use std::io::Write;
use std::path::Path;

use aoi_core::experiments::{CurveRow, TradeoffPoint};

use crate::CliError;

pub const TRADEOFF_HEADER: [&str; 14] = [
    "policy",
    "dist_kind",
    "dist_param",
    "lambda",
    "mu",
    "avg_age",
    "age_stderr",
    "avg_delay",
    "delay_stderr",
    "delay_var",
    "source",
    "seed",
    "horizon",
    "status",
];

pub const CURVES_HEADER: [&str; 12] = [
    "policy",
    "dist_kind",
    "dist_param",
    "lambda",
    "mu",
    "avg_age",
    "age_stderr",
    "bound",
    "source",
    "seed",
    "horizon",
    "status",
];

/// Shortest round-trip decimal; infinities as `inf`/`-inf`, NaN as empty.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn point_prefix(p: &TradeoffPoint) -> Vec<String> {
    vec![
        p.policy.label(),
        p.dist.kind().as_str().to_string(),
        opt(p.dist.shape()),
        fmt_num(p.lambda),
        fmt_num(p.dist.mu()),
    ]
}

pub fn tradeoff_record(p: &TradeoffPoint) -> Vec<String> {
    let mut r = point_prefix(p);
    r.extend([
        opt(p.avg_age),
        opt(p.age_stderr),
        opt(p.avg_delay),
        opt(p.delay_stderr),
        opt(p.delay_var),
        p.source.as_str().to_string(),
        p.seed.map(|s| s.to_string()).unwrap_or_default(),
        opt(p.horizon),
        p.status.as_str().to_string(),
    ]);
    r
}

pub fn curve_record(row: &CurveRow) -> Vec<String> {
    let p = &row.point;
    let mut r = point_prefix(p);
    r.extend([
        opt(p.avg_age),
        opt(p.age_stderr),
        fmt_num(row.bound),
        p.source.as_str().to_string(),
        p.seed.map(|s| s.to_string()).unwrap_or_default(),
        opt(p.horizon),
        p.status.as_str().to_string(),
    ]);
    r
}

fn write_csv<I>(header: &[&str], records: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in records {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("records are UTF-8")
}

pub fn tradeoff_csv(points: &[TradeoffPoint]) -> String {
    write_csv(&TRADEOFF_HEADER, points.iter().map(tradeoff_record))
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    write_csv(&CURVES_HEADER, rows.iter().map(curve_record))
}

pub fn trace_csv(trace: &[(f64, f64)]) -> String {
    write_csv(&["t", "age"], trace.iter().map(|&(t, a)| vec![fmt_num(t), fmt_num(a)]))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}
