//! Parameter sweeps over an experiment template.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::Value;

use crate::commands::{classify_experiment, run_experiment};
use crate::experiment::ExperimentFile;
use crate::output::format_sig;

pub const DEFAULT_MAX_SWEEP: usize = 256;
pub const MAX_SWEEP_ENV: &str = "WALKBENCH_MAX_SWEEP";

const FILE_KEYS: [&str; 8] = ["topology", "n", "algorithm", "shift", "config", "steps", "snapshots", "seed"];
const NUMERIC_KEYS: [&str; 3] = ["n", "steps", "seed"];

/// One `--vary key=values` axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl std::str::FromStr for Axis {
    type Err = anyhow::Error;

    /// `key=v1,v2,…`, `key=v1|v2|…` or `key=a..b` (inclusive integers).
    fn from_str(s: &str) -> Result<Self> {
        let (key, rest) = s.split_once('=').ok_or_else(|| anyhow!("--vary `{s}`: expected key=values"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            bail!("--vary `{s}`: empty key");
        }
        let values: Vec<String> = if let Some((a, b)) = rest.split_once("..") {
            let a: i64 = a.trim().parse().map_err(|_| anyhow!("--vary `{s}`: bad range start"))?;
            let b: i64 = b.trim().parse().map_err(|_| anyhow!("--vary `{s}`: bad range end"))?;
            if b < a {
                bail!("--vary `{s}`: empty range");
            }
            (a..=b).map(|v| v.to_string()).collect()
        } else {
            let sep = if rest.contains('|') { '|' } else { ',' };
            rest.split(sep).map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
        };
        if values.is_empty() {
            bail!("--vary `{s}`: no values");
        }
        Ok(Axis { key, values })
    }
}

pub fn max_sweep() -> Result<usize> {
    match std::env::var(MAX_SWEEP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| anyhow!("{MAX_SWEEP_ENV}=`{v}` is not a count")),
        Err(_) => Ok(DEFAULT_MAX_SWEEP),
    }
}

/// Cartesian product of the axes, in row-major order.
pub fn points(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push((axis.key.clone(), v.clone()));
                    p
                })
            })
            .collect();
    }
    out
}

/// Applies one point to the template. File keys are replaced; any other key
/// substitutes a `{key}` placeholder in `config`.
pub fn instantiate(template: &Value, point: &[(String, String)]) -> Result<ExperimentFile> {
    let mut doc = template.clone();
    let obj = doc.as_object_mut().ok_or_else(|| anyhow!("sweep template must be a JSON object"))?;
    for (key, value) in point {
        if FILE_KEYS.contains(&key.as_str()) {
            let v = if NUMERIC_KEYS.contains(&key.as_str()) {
                Value::from(value.parse::<u64>().map_err(|_| anyhow!("invalid `{key}`: `{value}` is not a count"))?)
            } else {
                Value::from(value.as_str())
            };
            obj.insert(key.clone(), v);
        } else {
            let config = obj
                .get("config")
                .and_then(Value::as_str)
                .ok_or_else(|| anyhow!("invalid `config`: missing in template"))?;
            let placeholder = format!("{{{key}}}");
            if !config.contains(&placeholder) {
                bail!("--vary key `{key}` is neither a file key nor a `{placeholder}` placeholder in `config`");
            }
            let replaced = config.replace(&placeholder, value);
            obj.insert("config".into(), Value::from(replaced));
        }
    }
    obj.remove("output");
    serde_json::from_value(doc).map_err(|e| anyhow!("invalid experiment file: {e}"))
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub point: Vec<(String, String)>,
    pub output: PathBuf,
    pub peak_step: usize,
    pub peak_prob: f64,
    pub healthy: bool,
    pub label: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub index: PathBuf,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn healthy(&self) -> bool {
        self.rows.iter().all(|r| r.healthy)
    }
}

pub fn cmd_sweep(template: &Path, axes: &[Axis], out_dir: &Path, with_labels: bool, tol: f64) -> Result<SweepReport> {
    let text = std::fs::read_to_string(template).with_context(|| format!("reading {}", template.display()))?;
    let template: Value = serde_json::from_str(&text).map_err(|e| anyhow!("invalid experiment file: {e}"))?;
    let points = points(axes);
    let cap = max_sweep()?;
    if points.len() > cap {
        bail!("sweep has {} runs, above the cap of {cap} (set {MAX_SWEEP_ENV} to raise it)", points.len());
    }
    let experiments = points
        .iter()
        .map(|p| instantiate(&template, p)?.resolve().with_context(|| describe(p)))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let rows = experiments
        .par_iter()
        .zip(points.par_iter())
        .enumerate()
        .map(|(i, (exp, point))| {
            let output = out_dir.join(format!("run_{i:04}.csv"));
            let (report, _) = run_experiment(exp, &output).with_context(|| describe(point))?;
            let label = if with_labels {
                Some(classify_experiment(exp, tol)?.classification.label.to_string())
            } else {
                None
            };
            Ok(SweepRow {
                point: point.clone(),
                output,
                peak_step: report.peak_step,
                peak_prob: report.peak_prob,
                healthy: report.healthy(),
                label,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let index = out_dir.join("index.csv");
    write_index(&index, axes, &rows)?;
    Ok(SweepReport { index, rows })
}

fn describe(point: &[(String, String)]) -> String {
    let parts: Vec<String> = point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("sweep point {}", parts.join(" "))
}

fn write_index(path: &Path, axes: &[Axis], rows: &[SweepRow]) -> Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut header: Vec<String> = vec!["run".into()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    header.extend(["path", "peak_prob", "peak_step"].map(String::from));
    if rows.iter().any(|r| r.label.is_some()) {
        header.push("label".into());
    }
    out.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut record = vec![i.to_string()];
        record.extend(row.point.iter().map(|(_, v)| v.clone()));
        let file = row.output.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        record.extend([file, format_sig(row.peak_prob), row.peak_step.to_string()]);
        if let Some(label) = &row.label {
            record.push(label.clone());
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}
