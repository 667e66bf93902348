//! Walk specifications, stepping, traces and dense oracles.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coin::{CoinSpec, ConditionalCoin, PreparedCoin};
use crate::shift::{apply_shift_into, shift_matrix, ShiftKind};
use crate::state::{flat_index, MarkedSet, SpaceDescriptor, Topology, WalkState};
use crate::{Result, WalkError};

pub const UNITARY_LIMIT: usize = 4096;

/// Grid search presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// `(G, −I)`, single coin.
    A,
    /// `(G, F)`, single coin.
    B,
    /// Two coins: odd flips `(G, −I)` on coin 1, even flips `(G, F)` on coin 2.
    C,
}

impl FromStr for Algorithm {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Algorithm::A),
            "b" => Ok(Algorithm::B),
            "c" => Ok(Algorithm::C),
            other => Err(WalkError::Parse(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Algorithm::A => "a",
            Algorithm::B => "b",
            Algorithm::C => "c",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoinSchedule {
    /// Same conditional coin and shift every step.
    Single { coin: ConditionalCoin, shift: ShiftKind },
    /// Odd step ordinals flip coin register 0 and apply S₁; even ordinals
    /// flip register 1 and apply S₂.
    TwoCoin { odd: ConditionalCoin, even: ConditionalCoin },
}

/// Which per-step unitary to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Single,
    Odd,
    Even,
}

/// A full experiment definition.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSpec {
    space: SpaceDescriptor,
    schedule: CoinSchedule,
    marked: MarkedSet,
}

impl WalkSpec {
    pub fn new(space: SpaceDescriptor, schedule: CoinSchedule, marked: MarkedSet) -> Result<Self> {
        let positions = space.positions();
        let coin_dim = space.topology().coin_dim();
        let check_coin = |cc: &ConditionalCoin| -> Result<()> {
            if cc.dim() != coin_dim {
                return Err(WalkError::DimensionMismatch(format!(
                    "coin dimension {} on {}",
                    cc.dim(),
                    space.topology()
                )));
            }
            PreparedCoin::new(cc, positions).map(|_| ())
        };
        match &schedule {
            CoinSchedule::Single { coin, shift } => {
                if space.coin_dims().len() != 1 {
                    return Err(WalkError::InvalidSpace(
                        "single-coin schedule needs exactly one coin register".into(),
                    ));
                }
                shift.check(&space)?;
                check_coin(coin)?;
            }
            CoinSchedule::TwoCoin { odd, even } => {
                if space.coin_dims().len() != 2 || !matches!(space.topology(), Topology::Grid(_)) {
                    return Err(WalkError::InvalidSpace(
                        "two-coin schedule needs a grid with two coin registers".into(),
                    ));
                }
                check_coin(odd)?;
                check_coin(even)?;
            }
        }
        if !marked.fits(positions) {
            return Err(WalkError::InvalidMarkedSet(format!(
                "marked set exceeds {positions} positions"
            )));
        }
        Ok(Self {
            space,
            schedule,
            marked,
        })
    }

    /// Single-coin walk whose coin split follows `marked`.
    pub fn single(
        space: SpaceDescriptor,
        shift: ShiftKind,
        unmarked: CoinSpec,
        marked_coin: CoinSpec,
        marked: MarkedSet,
    ) -> Result<Self> {
        let coin = ConditionalCoin::new(unmarked, marked_coin, marked.clone())?;
        Self::new(space, CoinSchedule::Single { coin, shift }, marked)
    }

    /// Two-coin grid walk; each pair is `(unmarked, marked)`.
    pub fn two_coin(
        n: usize,
        odd: (CoinSpec, CoinSpec),
        even: (CoinSpec, CoinSpec),
        marked: MarkedSet,
    ) -> Result<Self> {
        let odd = ConditionalCoin::new(odd.0, odd.1, marked.clone())?;
        let even = ConditionalCoin::new(even.0, even.1, marked.clone())?;
        Self::new(
            SpaceDescriptor::grid_two_coin(n)?,
            CoinSchedule::TwoCoin { odd, even },
            marked,
        )
    }

    /// `(unmarked, marked)`-type walk on the N-cycle.
    pub fn cycle(
        n: usize,
        unmarked: CoinSpec,
        marked_coin: CoinSpec,
        shift: ShiftKind,
        marked: MarkedSet,
    ) -> Result<Self> {
        Self::single(SpaceDescriptor::cycle(n)?, shift, unmarked, marked_coin, marked)
    }

    pub fn preset(algorithm: Algorithm, n: usize, marked: MarkedSet) -> Result<Self> {
        let g = CoinSpec::GroverD(4);
        let neg = CoinSpec::NegIdentity(4);
        let f = CoinSpec::Fourier4;
        match algorithm {
            Algorithm::A => Self::single(SpaceDescriptor::grid(n)?, ShiftKind::GridFlipFlop, g, neg, marked),
            Algorithm::B => Self::single(SpaceDescriptor::grid(n)?, ShiftKind::GridFlipFlop, g, f, marked),
            Algorithm::C => Self::two_coin(n, (g, neg), (g, f), marked),
        }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn schedule(&self) -> &CoinSchedule {
        &self.schedule
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.marked
    }

    pub fn walker(&self) -> Walker {
        Walker::new(self)
    }

    pub fn run(&self, steps: usize, policy: SnapshotPolicy) -> Trace {
        run(self, steps, policy)
    }
}

/// Prepared per-step operators for one parity.
#[derive(Debug, Clone)]
struct StepOp {
    coin: PreparedCoin,
    slot: usize,
    shift: ShiftKind,
}

impl StepOp {
    fn for_step(spec: &WalkSpec, parity: Parity) -> Result<Self> {
        let positions = spec.space.positions();
        match (&spec.schedule, parity) {
            (CoinSchedule::Single { coin, shift }, Parity::Single) => Ok(Self {
                coin: PreparedCoin::new(coin, positions)?,
                slot: 0,
                shift: *shift,
            }),
            (CoinSchedule::TwoCoin { odd, .. }, Parity::Odd) => Ok(Self {
                coin: PreparedCoin::new(odd, positions)?,
                slot: 0,
                shift: ShiftKind::TwoCoinGrid(0),
            }),
            (CoinSchedule::TwoCoin { even, .. }, Parity::Even) => Ok(Self {
                coin: PreparedCoin::new(even, positions)?,
                slot: 1,
                shift: ShiftKind::TwoCoinGrid(1),
            }),
            _ => Err(WalkError::InvalidSpace(format!(
                "parity {parity:?} does not match the coin schedule"
            ))),
        }
    }

    /// Coin in place on `state`, then shift into `scratch`; swaps so that
    /// `state` holds the result.
    fn apply(&self, state: &mut WalkState, scratch: &mut WalkState) {
        self.coin
            .apply_in_place(state, self.slot)
            .expect("operators validated against the spec space");
        apply_shift_into(state, scratch, self.shift).expect("shift validated against the spec space");
        std::mem::swap(state, scratch);
    }
}

fn parity_of(schedule: &CoinSchedule, t: usize) -> Parity {
    match schedule {
        CoinSchedule::Single { .. } => Parity::Single,
        CoinSchedule::TwoCoin { .. } if t % 2 == 1 => Parity::Odd,
        CoinSchedule::TwoCoin { .. } => Parity::Even,
    }
}

/// Incremental evolution from the uniform initial state.
#[derive(Debug, Clone)]
pub struct Walker {
    ops: Vec<StepOp>,
    state: WalkState,
    scratch: WalkState,
    t: usize,
}

impl Walker {
    pub fn new(spec: &WalkSpec) -> Self {
        Self::from_state(spec, WalkState::uniform(&spec.space)).expect("uniform state matches the spec space")
    }

    pub fn from_state(spec: &WalkSpec, state: WalkState) -> Result<Self> {
        if state.space() != &spec.space {
            return Err(WalkError::DimensionMismatch(format!(
                "state space {} differs from spec space {}",
                state.space(),
                spec.space
            )));
        }
        let ops = match spec.schedule {
            CoinSchedule::Single { .. } => vec![StepOp::for_step(spec, Parity::Single)?],
            CoinSchedule::TwoCoin { .. } => vec![
                StepOp::for_step(spec, Parity::Odd)?,
                StepOp::for_step(spec, Parity::Even)?,
            ],
        };
        Ok(Self {
            ops,
            scratch: state.clone(),
            state,
            t: 0,
        })
    }

    /// Number of steps applied so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn state(&self) -> &WalkState {
        &self.state
    }

    pub fn advance(&mut self) -> &WalkState {
        self.t += 1;
        let op = if self.ops.len() == 1 {
            &self.ops[0]
        } else {
            &self.ops[(self.t + 1) % 2]
        };
        op.apply(&mut self.state, &mut self.scratch);
        &self.state
    }
}

/// One application of the step unitary with ordinal `t` (starting at 1).
pub fn step(state: &WalkState, spec: &WalkSpec, t: usize) -> Result<WalkState> {
    if state.space() != &spec.space {
        return Err(WalkError::DimensionMismatch(format!(
            "state space {} differs from spec space {}",
            state.space(),
            spec.space
        )));
    }
    let op = StepOp::for_step(spec, parity_of(&spec.schedule, t))?;
    let mut out = state.clone();
    let mut scratch = state.clone();
    op.apply(&mut out, &mut scratch);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotPolicy {
    None,
    All,
    Every(usize),
}

impl SnapshotPolicy {
    /// `All` for N ≤ 16, `None` otherwise.
    pub fn default_for(n: usize) -> Self {
        if n <= 16 {
            SnapshotPolicy::All
        } else {
            SnapshotPolicy::None
        }
    }

    fn keeps(&self, t: usize) -> bool {
        match *self {
            SnapshotPolicy::None => false,
            SnapshotPolicy::All => true,
            SnapshotPolicy::Every(k) => k > 0 && t.is_multiple_of(k),
        }
    }
}

impl FromStr for SnapshotPolicy {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(SnapshotPolicy::None),
            "all" => Ok(SnapshotPolicy::All),
            other => other
                .strip_prefix("every:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(SnapshotPolicy::Every)
                .ok_or_else(|| WalkError::Parse(format!("unknown snapshot policy `{other}`"))),
        }
    }
}

impl fmt::Display for SnapshotPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotPolicy::None => write!(f, "none"),
            SnapshotPolicy::All => write!(f, "all"),
            SnapshotPolicy::Every(k) => write!(f, "every:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub state: WalkState,
}

/// Per-step record for t = 0..=steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: usize,
    pub prob: Vec<f64>,
    pub coherence: Vec<f64>,
    pub norm_drift: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl Trace {
    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }

    /// `(t, prob)` of the first maximum of the marked probability.
    pub fn peak(&self) -> (usize, f64) {
        self.prob
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (t, p)| if p > best.1 { (t, p) } else { best })
    }

    /// True when every step 0..=steps has a snapshot, in order.
    pub fn has_all_snapshots(&self) -> bool {
        self.snapshots.len() == self.steps + 1
            && self.snapshots.iter().enumerate().all(|(t, s)| s.step == t)
    }
}

pub fn run(spec: &WalkSpec, steps: usize, policy: SnapshotPolicy) -> Trace {
    let mut walker = spec.walker();
    let mut trace = Trace {
        steps,
        prob: Vec::with_capacity(steps + 1),
        coherence: Vec::with_capacity(steps + 1),
        norm_drift: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
    };
    let mut record = |t: usize, state: &WalkState| {
        trace.prob.push(state.marked_probability(&spec.marked));
        trace.coherence.push(state.l1_coherence());
        trace.norm_drift.push((state.norm() - 1.0).abs());
        if policy.keeps(t) {
            trace.snapshots.push(Snapshot {
                step: t,
                state: state.clone(),
            });
        }
    };
    record(0, walker.state());
    for t in 1..=steps {
        record(t, walker.advance());
    }
    trace
}

/// Dense `S·C` for the requested parity, assembled from the shift table and
/// per-position coin blocks.
pub fn materialize_unitary(spec: &WalkSpec, parity: Parity) -> Result<DMatrix<Complex64>> {
    let space = &spec.space;
    let dim = space.dim();
    if dim > UNITARY_LIMIT {
        return Err(WalkError::DenseTooLarge {
            dim,
            limit: UNITARY_LIMIT,
        });
    }
    let op = StepOp::for_step(spec, parity)?;
    let dims = space.coin_dims();
    let slot = op.slot;
    let d = dims[slot];
    let mut coin = DMatrix::<Complex64>::zeros(dim, dim);
    let mut coins = vec![0usize; dims.len()];
    for cidx in 0..space.coin_volume() {
        let mut rest = cidx;
        for k in (0..dims.len()).rev() {
            coins[k] = rest % dims[k];
            rest /= dims[k];
        }
        for pos in 0..space.positions() {
            let col = flat_index(space, &coins, pos)?;
            let m = op.coin.matrix_at(pos);
            let mut target = coins.clone();
            for row in 0..d {
                target[slot] = row;
                coin[(flat_index(space, &target, pos)?, col)] = m.get(row, coins[slot]);
            }
        }
    }
    let shift = shift_matrix(space, op.shift)?.map(|x| Complex64::new(x, 0.0));
    Ok(shift * coin)
}

/// `|Uᵗ(coin 0, x)|² + |Uᵗ(coin 1, −x mod N)|²` for x = 0..N, where `Uᵗ(i)`
/// is the i-th row sum of the t-step unitary, i.e. √(2N) times the evolved
/// uniform amplitude.
pub fn row_sum_pairs(spec: &WalkSpec, t: usize) -> Result<Vec<f64>> {
    let n = match (spec.space.topology(), &spec.schedule) {
        (Topology::Cycle(n), CoinSchedule::Single { .. }) => n,
        _ => {
            return Err(WalkError::IncompatibleTopology(
                "row-sum pairing needs a single-coin cycle walk".into(),
            ))
        }
    };
    if spec.marked.as_slice() != [0] {
        return Err(WalkError::InvalidMarkedSet(
            "row-sum pairing needs marked set {0}".into(),
        ));
    }
    let mut walker = spec.walker();
    for _ in 0..t {
        walker.advance();
    }
    let scale = ((2 * n) as f64).sqrt();
    let amps = walker.state().amplitudes();
    Ok((0..n)
        .map(|x| {
            let a = amps[x] * scale;
            let b = amps[n + (n - x) % n] * scale;
            a.norm_sqr() + b.norm_sqr()
        })
        .collect())
}
