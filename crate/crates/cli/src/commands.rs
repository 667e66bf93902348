//! Subcommand bodies. Each returns whether its health checks held.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use walkbench_core::coherence::{coherence_closed_form, simulated_coherence, PQParams};
use walkbench_core::config::{classify, detect_period, find_period, Classification, Label, Periods};
use walkbench_core::engine::{SnapshotPolicy, Trace};

use crate::experiment::{Experiment, ExperimentFile};
use crate::output::{format_sig, write_coherence, write_snapshots, write_trace_file};

/// Norm drift above this marks a run unhealthy.
pub const DRIFT_LIMIT: f64 = 1e-8;
/// Closed-form mismatch above this marks a coherence table unhealthy.
pub const COHERENCE_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output: PathBuf,
    pub peak_step: usize,
    pub peak_prob: f64,
    pub max_norm_drift: f64,
}

impl RunReport {
    pub fn healthy(&self) -> bool {
        self.max_norm_drift <= DRIFT_LIMIT
    }

    pub fn summary(&self) -> String {
        format!(
            "max prob_marked {} at step {}; max norm drift {}; wrote {}",
            format_sig(self.peak_prob),
            self.peak_step,
            format_sig(self.max_norm_drift),
            self.output.display()
        )
    }
}

fn snapshot_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.snapshots.csv"))
}

pub fn run_experiment(exp: &Experiment, output: &Path) -> Result<(RunReport, Trace)> {
    exp.check_snapshot_budget(exp.snapshots)?;
    let trace = exp.spec.run(exp.file.steps, exp.snapshots);
    write_trace_file(&trace, output)?;
    if !trace.snapshots.is_empty() {
        let path = snapshot_path(output);
        let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_snapshots(&trace, std::io::BufWriter::new(file))?;
    }
    let (peak_step, peak_prob) = trace.peak();
    let report = RunReport {
        output: output.to_path_buf(),
        peak_step,
        peak_prob,
        max_norm_drift: trace.max_norm_drift(),
    };
    Ok((report, trace))
}

pub fn cmd_run(file: &Path, output: Option<PathBuf>) -> Result<RunReport> {
    let exp = ExperimentFile::load(file)?.resolve()?;
    let output = output
        .or_else(|| exp.file.output.clone())
        .ok_or_else(|| anyhow!("invalid `output`: required (or pass --output)"))?;
    Ok(run_experiment(&exp, &output)?.0)
}

#[derive(Debug, Clone)]
pub struct ClassifyReport {
    pub classification: Classification,
    pub periods: Option<Periods>,
    pub period_search: usize,
}

impl ClassifyReport {
    pub fn render(&self) -> String {
        let c = &self.classification;
        let mut out = format!(
            "label: {}\nhorizon: {}\nmax_prob_deviation: {}\nsign_flip_holds_through: {}\n",
            c.label,
            c.horizon,
            format_sig(c.max_prob_deviation),
            c.sign_flip_holds_through
        );
        if let Some(p) = &self.periods {
            let show = |v: Option<usize>| v.map_or(format!("none within {} steps", self.period_search), |t| t.to_string());
            out.push_str(&format!("period: {}\nsign_reversal: {}\n", show(p.period), show(p.reversal)));
        }
        out
    }
}

/// Classifies over the file's `steps` horizon. Exceptional runs also get a
/// period search of at least `4N²` steps.
pub fn classify_experiment(exp: &Experiment, tol: f64) -> Result<ClassifyReport> {
    exp.check_snapshot_budget(SnapshotPolicy::All)?;
    let trace = exp.spec.run(exp.file.steps, SnapshotPolicy::All);
    let classification = classify(&trace, tol)?;
    let mut period_search = trace.steps;
    let periods = if classification.label == Label::Exceptional {
        let mut p = detect_period(&trace, tol)?;
        if p.period.is_none() {
            period_search = period_search.max(4 * exp.file.n * exp.file.n);
            p = find_period(&exp.spec, period_search, tol)?;
        }
        Some(p)
    } else {
        None
    };
    Ok(ClassifyReport { classification, periods, period_search })
}

pub fn cmd_classify(file: &Path, tol: f64) -> Result<ClassifyReport> {
    let exp = ExperimentFile::load(file)?.resolve()?;
    classify_experiment(&exp, tol)
}

#[derive(Debug, Clone)]
pub struct CoherenceTable {
    pub rows: Vec<(usize, f64, f64)>,
}

impl CoherenceTable {
    pub fn max_abs_error(&self) -> f64 {
        self.rows.iter().map(|(_, s, c)| (s - c).abs()).fold(0.0, f64::max)
    }

    pub fn healthy(&self) -> bool {
        self.max_abs_error() <= COHERENCE_LIMIT
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        write_coherence(&self.rows, w)
    }
}

pub fn cmd_coherence(n: usize, rho: f64, theta: f64, phi: f64, steps: usize) -> Result<CoherenceTable> {
    if steps >= n {
        bail!("formula valid only for t < N: steps {steps} must be below n {n}");
    }
    let params = PQParams::new(rho, theta, phi)?;
    let sim = simulated_coherence(n, &params, steps)?;
    let rows = sim
        .into_iter()
        .enumerate()
        .map(|(t, s)| Ok((t, s, coherence_closed_form(n, t, &params)?)))
        .collect::<walkbench_core::Result<Vec<_>>>()?;
    Ok(CoherenceTable { rows })
}
