//! CSV emission and parsing.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use walkbench_core::engine::Trace;

/// Significant digits of every real written to CSV.
pub const SIG_DIGITS: usize = 12;

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-5 ≤ |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= SIG_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub const TRACE_HEADER: [&str; 4] = ["step", "prob_marked", "l1_coherence", "norm_drift"];

pub fn write_trace<W: Write>(trace: &Trace, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(TRACE_HEADER)?;
    for t in 0..=trace.steps {
        out.write_record([
            t.to_string(),
            format_sig(trace.prob[t]),
            format_sig(trace.coherence[t]),
            format_sig(trace.norm_drift[t]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace_file(trace: &Trace, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_trace(trace, std::io::BufWriter::new(file))
}

/// Snapshot amplitudes as `step,index,re,im`.
pub fn write_snapshots<W: Write>(trace: &Trace, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["step", "index", "re", "im"])?;
    for snap in &trace.snapshots {
        for (i, a) in snap.state.amplitudes().iter().enumerate() {
            out.write_record([snap.step.to_string(), i.to_string(), format_sig(a.re), format_sig(a.im)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One parsed row of a trace CSV.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub prob_marked: f64,
    pub l1_coherence: f64,
    pub norm_drift: f64,
}

pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    anyhow::ensure!(headers.iter().eq(TRACE_HEADER), "unexpected trace header {headers:?}");
    rdr.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Rows of the coherence comparison table.
pub fn write_coherence<W: Write>(rows: &[(usize, f64, f64)], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["step", "simulated", "closed_form", "abs_error"])?;
    for &(t, sim, closed) in rows {
        out.write_record([t.to_string(), format_sig(sim), format_sig(closed), format_sig((sim - closed).abs())])?;
    }
    out.flush()?;
    Ok(())
}
