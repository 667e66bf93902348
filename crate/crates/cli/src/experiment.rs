//! Experiment definition files.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use walkbench_core::coin::CoinSpec;
use walkbench_core::config::ConfigSpec;
use walkbench_core::engine::{Algorithm, SnapshotPolicy, WalkSpec};
use walkbench_core::shift::ShiftKind;
use walkbench_core::state::{SpaceDescriptor, Topology};

/// Largest state dimension for which every snapshot may be kept.
pub const MAX_SNAPSHOT_DIM: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Grid,
    Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    A,
    B,
    C,
    Custom,
}

/// Coins for `algorithm: custom`. Either `unmarked`/`marked` for a single-coin
/// walk, or `odd`/`even` as `[unmarked, marked]` pairs for a two-coin grid walk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coins {
    pub unmarked: Option<String>,
    pub marked: Option<String>,
    pub odd: Option<[String; 2]>,
    pub even: Option<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub topology: TopologyKind,
    pub n: usize,
    pub algorithm: AlgorithmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coins: Option<Coins>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<String>,
    pub config: String,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<String>,
    /// Reserved. Evolution is deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// An experiment file resolved into core types.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub file: ExperimentFile,
    pub spec: WalkSpec,
    pub snapshots: SnapshotPolicy,
}

impl ExperimentFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("invalid experiment file: {e}"))
    }

    pub fn topology(&self) -> Topology {
        match self.topology {
            TopologyKind::Grid => Topology::Grid(self.n),
            TopologyKind::Cycle => Topology::Cycle(self.n),
        }
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let topology = self.topology();
        let marked = ConfigSpec::parse(&self.config, self.n)
            .and_then(|c| c.generate(topology))
            .map_err(|e| anyhow!("invalid `config`: {e}"))?;
        let shift = self
            .shift
            .as_deref()
            .map(|s| s.parse::<ShiftKind>().map_err(|e| anyhow!("invalid `shift`: {e}")))
            .transpose()?;
        let coins = self.coins.clone();

        let spec = match (self.algorithm, self.topology) {
            (AlgorithmKind::Custom, _) => {
                let coins = coins.ok_or_else(|| anyhow!("invalid `coins`: required for algorithm custom"))?;
                self.custom_spec(topology, coins, shift, marked)?
            }
            (_, TopologyKind::Cycle) => {
                bail!("invalid `algorithm`: presets a, b, c run on the grid; use custom on the cycle")
            }
            (preset, TopologyKind::Grid) => {
                if coins.is_some() {
                    bail!("invalid `coins`: only allowed with algorithm custom");
                }
                let algorithm = match preset {
                    AlgorithmKind::A => Algorithm::A,
                    AlgorithmKind::B => Algorithm::B,
                    _ => Algorithm::C,
                };
                let expected = if algorithm == Algorithm::C { None } else { Some(ShiftKind::GridFlipFlop) };
                if shift.is_some() && shift != expected {
                    bail!("invalid `shift`: algorithm {algorithm} has a fixed shift");
                }
                WalkSpec::preset(algorithm, self.n, marked).map_err(|e| anyhow!("invalid `n`: {e}"))?
            }
        };

        let snapshots = match &self.snapshots {
            Some(s) => s.parse().map_err(|e| anyhow!("invalid `snapshots`: {e}"))?,
            None => SnapshotPolicy::default_for(self.n),
        };
        Ok(Experiment { file: self.clone(), spec, snapshots })
    }

    fn custom_spec(
        &self,
        topology: Topology,
        coins: Coins,
        shift: Option<ShiftKind>,
        marked: walkbench_core::state::MarkedSet,
    ) -> Result<WalkSpec> {
        let coin = |key: &str, text: &str| -> Result<CoinSpec> {
            text.parse().map_err(|e| anyhow!("invalid `coins.{key}`: {e}"))
        };
        match coins {
            Coins { unmarked: Some(u), marked: Some(m), odd: None, even: None } => {
                let (u, m) = (coin("unmarked", &u)?, coin("marked", &m)?);
                let (space, default_shift) = match topology {
                    Topology::Grid(n) => (SpaceDescriptor::grid(n), ShiftKind::GridFlipFlop),
                    Topology::Cycle(n) => (SpaceDescriptor::cycle(n), ShiftKind::CycleFlipFlop),
                };
                let space = space.map_err(|e| anyhow!("invalid `n`: {e}"))?;
                WalkSpec::single(space, shift.unwrap_or(default_shift), u, m, marked)
                    .map_err(|e| anyhow!("invalid `coins` or `shift`: {e}"))
            }
            Coins { unmarked: None, marked: None, odd: Some(odd), even: Some(even) } => {
                if topology != Topology::Grid(self.n) {
                    bail!("invalid `coins`: odd/even pairs need the grid");
                }
                if shift.is_some() {
                    bail!("invalid `shift`: two-coin walks use the fixed two-coin shifts");
                }
                let odd = (coin("odd", &odd[0])?, coin("odd", &odd[1])?);
                let even = (coin("even", &even[0])?, coin("even", &even[1])?);
                WalkSpec::two_coin(self.n, odd, even, marked).map_err(|e| anyhow!("invalid `coins`: {e}"))
            }
            _ => bail!("invalid `coins`: give either unmarked and marked, or odd and even"),
        }
    }
}

impl Experiment {
    pub fn dim(&self) -> usize {
        self.spec.space().dim()
    }

    /// Refuses full snapshots on states larger than [`MAX_SNAPSHOT_DIM`].
    pub fn check_snapshot_budget(&self, policy: SnapshotPolicy) -> Result<()> {
        if policy == SnapshotPolicy::All && self.dim() > MAX_SNAPSHOT_DIM {
            bail!(
                "refusing snapshots=all: state dimension {} exceeds {MAX_SNAPSHOT_DIM}",
                self.dim()
            );
        }
        Ok(())
    }
}
