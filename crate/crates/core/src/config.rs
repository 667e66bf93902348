//! Marked-vertex arrangements and empirical classification of traces.

use std::fmt;

use crate::engine::{Trace, WalkSpec};
use crate::state::{is_sign_flip_of, MarkedSet, Topology};
use crate::{Result, WalkError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigKind {
    /// `{(i, j) : j − i ≡ α}`
    DiagonalOffset(i64),
    /// `{(i, j) : i + j ≡ α}`
    AntiDiagonal(i64),
    /// Union of the `j − i ≡ α` and `j − i ≡ β` diagonals.
    DoubleDiagonal(i64, i64),
    /// Union of the `i + j ≡ α` and `i + j ≡ β` anti-diagonals.
    DoubleAntiDiagonal(i64, i64),
    /// Literal coordinates: `(i, j)` pairs on the grid, `(x)` on the cycle.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigSpec {
    pub kind: ConfigKind,
    pub n: usize,
}

fn wrap(x: i64, n: usize) -> usize {
    x.rem_euclid(n as i64) as usize
}

impl ConfigSpec {
    pub fn new(kind: ConfigKind, n: usize) -> Self {
        Self { kind, n }
    }

    /// Parses `diag:α`, `antidiag:α`, `ddiag:α,β`, `dantidiag:α,β` or
    /// `explicit:(i,j);(i,j);…`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let text = text.trim();
        let bad = |why: &str| WalkError::Parse(format!("config `{text}`: {why}"));
        let (head, args) = text.split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let ints = |s: &str| -> Result<Vec<i64>> {
            s.split(',')
                .map(|p| p.trim().parse::<i64>().map_err(|_| bad("expected integers")))
                .collect()
        };
        let kind = match head.trim() {
            "diag" | "antidiag" => match ints(args)?[..] {
                [a] if head.trim() == "diag" => ConfigKind::DiagonalOffset(a),
                [a] => ConfigKind::AntiDiagonal(a),
                _ => return Err(bad("expected one offset")),
            },
            "ddiag" | "dantidiag" => match ints(args)?[..] {
                [a, b] if head.trim() == "ddiag" => ConfigKind::DoubleDiagonal(a, b),
                [a, b] => ConfigKind::DoubleAntiDiagonal(a, b),
                _ => return Err(bad("expected two offsets")),
            },
            "explicit" => {
                let mut vertices = Vec::new();
                for item in args.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let inner = item
                        .strip_prefix('(')
                        .and_then(|s| s.strip_suffix(')'))
                        .ok_or_else(|| bad("vertices must be parenthesised"))?;
                    let coords = inner
                        .split(',')
                        .map(|p| p.trim().parse::<usize>().map_err(|_| bad("expected non-negative coordinates")))
                        .collect::<Result<Vec<_>>>()?;
                    vertices.push(coords);
                }
                if vertices.is_empty() {
                    return Err(bad("no vertices"));
                }
                ConfigKind::Explicit(vertices)
            }
            _ => return Err(bad("unknown kind")),
        };
        Ok(Self { kind, n })
    }

    /// Marked set on `topology`, whose side must equal `self.n`.
    pub fn generate(&self, topology: Topology) -> Result<MarkedSet> {
        let n = self.n;
        if n < 2 {
            return Err(WalkError::InvalidSpace("N must be at least 2".into()));
        }
        if topology.n() != n {
            return Err(WalkError::DimensionMismatch(format!(
                "config for N = {n} used on {topology}"
            )));
        }
        let positions = topology.positions();
        let grid_only = || {
            if matches!(topology, Topology::Grid(_)) {
                Ok(())
            } else {
                Err(WalkError::IncompatibleTopology(format!(
                    "{self} needs a grid; use explicit vertices on {topology}"
                )))
            }
        };
        let diagonal = |a: i64| (0..n).map(move |i| i * n + wrap(i as i64 + a, n));
        let anti = |a: i64| (0..n).map(move |i| i * n + wrap(a - i as i64, n));
        let check_distinct = |a: i64, b: i64| {
            if wrap(a, n) == wrap(b, n) {
                Err(WalkError::DegenerateDoubleDiagonal(a, b, n))
            } else {
                Ok(())
            }
        };
        match &self.kind {
            ConfigKind::DiagonalOffset(a) => {
                grid_only()?;
                MarkedSet::new(diagonal(*a), positions)
            }
            ConfigKind::AntiDiagonal(a) => {
                grid_only()?;
                MarkedSet::new(anti(*a), positions)
            }
            ConfigKind::DoubleDiagonal(a, b) => {
                grid_only()?;
                check_distinct(*a, *b)?;
                MarkedSet::new(diagonal(*a).chain(diagonal(*b)), positions)
            }
            ConfigKind::DoubleAntiDiagonal(a, b) => {
                grid_only()?;
                check_distinct(*a, *b)?;
                MarkedSet::new(anti(*a).chain(anti(*b)), positions)
            }
            ConfigKind::Explicit(vertices) => {
                let arity = match topology {
                    Topology::Grid(_) => 2,
                    Topology::Cycle(_) => 1,
                };
                let mut flat = Vec::with_capacity(vertices.len());
                for v in vertices {
                    if v.len() != arity {
                        return Err(WalkError::Parse(format!(
                            "vertex {v:?} needs {arity} coordinate(s) on {topology}"
                        )));
                    }
                    if let Some(&c) = v.iter().find(|&&c| c >= n) {
                        return Err(WalkError::IndexOutOfBounds {
                            what: "vertex coordinate",
                            index: c,
                            limit: n,
                        });
                    }
                    flat.push(if arity == 2 { v[0] * n + v[1] } else { v[0] });
                }
                MarkedSet::new(flat, positions)
            }
        }
    }

    pub fn generate_grid(&self) -> Result<MarkedSet> {
        self.generate(Topology::Grid(self.n))
    }
}

impl fmt::Display for ConfigSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConfigKind::DiagonalOffset(a) => write!(f, "diag:{a}"),
            ConfigKind::AntiDiagonal(a) => write!(f, "antidiag:{a}"),
            ConfigKind::DoubleDiagonal(a, b) => write!(f, "ddiag:{a},{b}"),
            ConfigKind::DoubleAntiDiagonal(a, b) => write!(f, "dantidiag:{a},{b}"),
            ConfigKind::Explicit(vs) => {
                let items: Vec<String> = vs
                    .iter()
                    .map(|v| {
                        let c: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                        format!("({})", c.join(","))
                    })
                    .collect();
                write!(f, "explicit:{}", items.join(";"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Exceptional,
    GeneralizedExceptional,
    Neither,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::Exceptional => "Exceptional",
            Label::GeneralizedExceptional => "GeneralizedExceptional",
            Label::Neither => "Neither",
        };
        f.write_str(s)
    }
}

/// Finite-horizon classification. Holds for steps `0..=horizon` only.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub horizon: usize,
    pub max_prob_deviation: f64,
    /// Last step up to which every state was a sign flip of the initial one.
    pub sign_flip_holds_through: usize,
}

/// Default horizon: 3N steps.
pub fn default_horizon(n: usize) -> usize {
    3 * n
}

pub fn classify(trace: &Trace, tol: f64) -> Result<Classification> {
    if !trace.has_all_snapshots() {
        return Err(WalkError::MissingSnapshots(format!(
            "classification needs a snapshot at every step 0..={}",
            trace.steps
        )));
    }
    let initial = &trace.snapshots[0].state;
    let mut holds_through = 0;
    for snap in &trace.snapshots[1..] {
        if !is_sign_flip_of(&snap.state, initial, tol)? {
            break;
        }
        holds_through = snap.step;
    }
    let p0 = trace.prob[0];
    let max_prob_deviation = trace.prob.iter().map(|p| (p - p0).abs()).fold(0.0, f64::max);
    let label = if holds_through == trace.steps {
        Label::Exceptional
    } else if max_prob_deviation <= tol {
        Label::GeneralizedExceptional
    } else {
        Label::Neither
    };
    Ok(Classification {
        label,
        horizon: trace.steps,
        max_prob_deviation,
        sign_flip_holds_through: holds_through,
    })
}

/// Return times of the evolved state to ± the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Periods {
    /// Smallest τ > 0 with state(τ) = state(0).
    pub period: Option<usize>,
    /// Smallest τ > 0 with state(τ) = −state(0).
    pub reversal: Option<usize>,
}

pub fn detect_period(trace: &Trace, tol: f64) -> Result<Periods> {
    if !trace.has_all_snapshots() {
        return Err(WalkError::MissingSnapshots(
            "period detection needs a snapshot at every step".into(),
        ));
    }
    let initial = &trace.snapshots[0].state;
    let mut out = Periods::default();
    for snap in &trace.snapshots[1..] {
        update_periods(&mut out, snap.step, &snap.state, initial, tol)?;
        if out.period.is_some() {
            break;
        }
    }
    Ok(out)
}

/// Period search by direct evolution without keeping snapshots.
pub fn find_period(spec: &WalkSpec, max_steps: usize, tol: f64) -> Result<Periods> {
    let mut walker = spec.walker();
    let initial = walker.state().clone();
    let mut out = Periods::default();
    for t in 1..=max_steps {
        let state = walker.advance();
        update_periods(&mut out, t, state, &initial, tol)?;
        if out.period.is_some() {
            break;
        }
    }
    Ok(out)
}

fn update_periods(
    out: &mut Periods,
    t: usize,
    state: &crate::state::WalkState,
    initial: &crate::state::WalkState,
    tol: f64,
) -> Result<()> {
    if out.period.is_none() && state.max_distance(initial, 1.0)? <= tol {
        out.period = Some(t);
    }
    if out.reversal.is_none() && state.max_distance(initial, -1.0)? <= tol {
        out.reversal = Some(t);
    }
    Ok(())
}
