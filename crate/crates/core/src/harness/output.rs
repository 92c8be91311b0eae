//! Metrics CSV: one row per epoch, `.` decimals, LF line endings, empty
//! fields where a metric does not apply.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::optim::RunRecord;

pub const METRICS_HEADER: [&str; 8] = [
    "epoch",
    "grad_evals_over_N",
    "wall_ms",
    "train_loss",
    "test_loss",
    "grad_norm",
    "optimality_gap",
    "dist_ref",
];

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_metrics<W: Write>(w: W, records: &[RunRecord]) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(METRICS_HEADER)?;
    for r in records {
        out.write_record([
            r.epoch.to_string(),
            fmt_float(r.grad_evals_over_n),
            fmt_opt(r.wall_ms),
            fmt_float(r.train_loss),
            fmt_opt(r.test_loss),
            fmt_float(r.grad_norm),
            fmt_opt(r.optimality_gap),
            fmt_opt(r.dist_ref),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_metrics_file(path: &Path, records: &[RunRecord]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_metrics(std::io::BufWriter::new(file), records)
}

/// Renders the metrics CSV to a string.
pub fn metrics_to_string(records: &[RunRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_metrics(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}
