//! Walk states over coin ⊗ position spaces.
//!
//! Basis layout is coin-major: for a single coin the amplitude of
//! `|c, p⟩` lives at `c·P + p`, for two coins `|c₁, c₂, p⟩` lives at
//! `(c₁·d₂ + c₂)·P + p`. Grid vertex `(i, j)` is position `i·N + j`.
//! Grid coin directions are `[↑, ↓, ←, →] = [0, 1, 2, 3]`.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::{Result, WalkError};

pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// N×N torus with periodic boundaries.
    Grid(usize),
    /// N-cycle.
    Cycle(usize),
}

impl Topology {
    pub fn n(&self) -> usize {
        match *self {
            Topology::Grid(n) | Topology::Cycle(n) => n,
        }
    }

    /// Number of vertices: N² for the grid, N for the cycle.
    pub fn positions(&self) -> usize {
        match *self {
            Topology::Grid(n) => n * n,
            Topology::Cycle(n) => n,
        }
    }

    /// Natural coin dimension (number of movement directions).
    pub fn coin_dim(&self) -> usize {
        match self {
            Topology::Grid(_) => 4,
            Topology::Cycle(_) => 2,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Grid(n) => write!(f, "grid({n})"),
            Topology::Cycle(n) => write!(f, "cycle({n})"),
        }
    }
}

/// Topology plus the ordered list of coin registers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    topology: Topology,
    coin_dims: Vec<usize>,
}

impl SpaceDescriptor {
    pub fn new(topology: Topology, coin_dims: Vec<usize>) -> Result<Self> {
        if topology.n() < 2 {
            return Err(WalkError::InvalidSpace(format!(
                "{topology}: N must be at least 2"
            )));
        }
        if coin_dims.is_empty() || coin_dims.len() > 2 {
            return Err(WalkError::InvalidSpace(format!(
                "expected one or two coin registers, got {}",
                coin_dims.len()
            )));
        }
        let want = topology.coin_dim();
        if let Some(d) = coin_dims.iter().find(|&&d| d != want) {
            return Err(WalkError::InvalidSpace(format!(
                "{topology} requires coin dimension {want}, got {d}"
            )));
        }
        Ok(Self {
            topology,
            coin_dims,
        })
    }

    pub fn grid(n: usize) -> Result<Self> {
        Self::new(Topology::Grid(n), vec![4])
    }

    pub fn grid_two_coin(n: usize) -> Result<Self> {
        Self::new(Topology::Grid(n), vec![4, 4])
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(Topology::Cycle(n), vec![2])
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n(&self) -> usize {
        self.topology.n()
    }

    pub fn coin_dims(&self) -> &[usize] {
        &self.coin_dims
    }

    pub fn positions(&self) -> usize {
        self.topology.positions()
    }

    /// Product of all coin dimensions.
    pub fn coin_volume(&self) -> usize {
        self.coin_dims.iter().product()
    }

    /// Total Hilbert-space dimension D.
    pub fn dim(&self) -> usize {
        self.coin_volume() * self.positions()
    }

    /// Distance in the flat vector between consecutive values of coin `slot`.
    pub(crate) fn coin_stride(&self, slot: usize) -> usize {
        self.coin_dims[slot + 1..].iter().product::<usize>() * self.positions()
    }

    /// Position index of grid vertex `(i, j)`.
    pub fn vertex(&self, i: usize, j: usize) -> Result<usize> {
        let n = self.n();
        match self.topology {
            Topology::Grid(_) if i < n && j < n => Ok(i * n + j),
            Topology::Grid(_) => Err(WalkError::IndexOutOfBounds {
                what: "grid coordinate",
                index: i.max(j),
                limit: n,
            }),
            Topology::Cycle(_) => Err(WalkError::IncompatibleTopology(
                "grid coordinates on a cycle".into(),
            )),
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} coins {:?}", self.topology, self.coin_dims)
    }
}

/// Flat index of basis state `|coins…, pos⟩` in the coin-major layout.
pub fn flat_index(space: &SpaceDescriptor, coins: &[usize], pos: usize) -> Result<usize> {
    if coins.len() != space.coin_dims.len() {
        return Err(WalkError::DimensionMismatch(format!(
            "{} coin indices for {} coin registers",
            coins.len(),
            space.coin_dims.len()
        )));
    }
    let positions = space.positions();
    if pos >= positions {
        return Err(WalkError::IndexOutOfBounds {
            what: "position",
            index: pos,
            limit: positions,
        });
    }
    let mut coin = 0;
    for (&c, &d) in coins.iter().zip(&space.coin_dims) {
        if c >= d {
            return Err(WalkError::IndexOutOfBounds {
                what: "coin",
                index: c,
                limit: d,
            });
        }
        coin = coin * d + c;
    }
    Ok(coin * positions + pos)
}

/// Set of marked vertices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedSet {
    vertices: Vec<usize>,
}

impl MarkedSet {
    /// Builds a marked set over `positions` vertices. Duplicates and
    /// out-of-range indices are rejected.
    pub fn new<I: IntoIterator<Item = usize>>(vertices: I, positions: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for v in vertices {
            if v >= positions {
                return Err(WalkError::IndexOutOfBounds {
                    what: "marked vertex",
                    index: v,
                    limit: positions,
                });
            }
            if !seen.insert(v) {
                return Err(WalkError::InvalidMarkedSet(format!("duplicate vertex {v}")));
            }
        }
        Ok(Self {
            vertices: seen.into_iter().collect(),
        })
    }

    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.vertices
    }

    /// Dense membership table over `positions` vertices.
    pub fn mask(&self, positions: usize) -> Vec<bool> {
        let mut mask = vec![false; positions];
        for &v in &self.vertices {
            mask[v] = true;
        }
        mask
    }

    pub(crate) fn fits(&self, positions: usize) -> bool {
        self.vertices.last().is_none_or(|&v| v < positions)
    }
}

/// Pure state of the walker: one complex amplitude per basis state.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    space: SpaceDescriptor,
    amps: Vec<Complex64>,
}

impl WalkState {
    pub fn from_amplitudes(space: SpaceDescriptor, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != space.dim() {
            return Err(WalkError::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                space.dim()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(WalkError::InvalidSpace("non-finite amplitude".into()));
        }
        Ok(Self { space, amps })
    }

    /// Equal superposition over every basis state.
    pub fn uniform(space: &SpaceDescriptor) -> Self {
        let d = space.dim();
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self {
            space: space.clone(),
            amps: vec![a; d],
        }
    }

    /// Basis state `|index⟩` in the flat layout.
    pub fn basis(space: &SpaceDescriptor, index: usize) -> Result<Self> {
        let d = space.dim();
        if index >= d {
            return Err(WalkError::IndexOutOfBounds {
                what: "basis index",
                index,
                limit: d,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amps,
        })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn amplitude(&self, coins: &[usize], pos: usize) -> Result<Complex64> {
        Ok(self.amps[flat_index(&self.space, coins, pos)?])
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn marked_probability(&self, marked: &MarkedSet) -> f64 {
        marked_probability(self, marked)
    }

    pub fn l1_coherence(&self) -> f64 {
        l1_coherence(self)
    }

    pub fn is_sign_flip_of(&self, other: &WalkState, tol: f64) -> Result<bool> {
        is_sign_flip_of(self, other, tol)
    }

    /// Largest component-wise distance `|a_i − sign·b_i|` for a fixed global sign.
    pub fn max_distance(&self, other: &WalkState, sign: f64) -> Result<f64> {
        same_space(self, other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b * sign).norm())
            .fold(0.0, f64::max))
    }
}

/// Neumaier-compensated sum; D reaches 10⁶ and coherence squares the sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn norm(state: &WalkState) -> f64 {
    compensated_sum(state.amps.iter().map(|a| a.norm_sqr())).sqrt()
}

/// Probability of finding the walker on a marked vertex, summed over all
/// coin registers.
///
/// Panics if a marked vertex lies outside the state's position range.
pub fn marked_probability(state: &WalkState, marked: &MarkedSet) -> f64 {
    let positions = state.space.positions();
    assert!(
        marked.fits(positions),
        "marked set exceeds {positions} positions"
    );
    let volume = state.space.coin_volume();
    compensated_sum(
        (0..volume)
            .flat_map(|c| marked.iter().map(move |v| c * positions + v))
            .map(|i| state.amps[i].norm_sqr()),
    )
}

/// l1-norm coherence of the pure state, `(Σ|aᵢ|)² − Σ|aᵢ|²`.
pub fn l1_coherence(state: &WalkState) -> f64 {
    let l1 = compensated_sum(state.amps.iter().map(|a| a.norm()));
    let l2 = compensated_sum(state.amps.iter().map(|a| a.norm_sqr()));
    l1 * l1 - l2
}

/// True when `a` equals `b` up to an independent ±1 on every component.
pub fn is_sign_flip_of(a: &WalkState, b: &WalkState, tol: f64) -> Result<bool> {
    same_space(a, b)?;
    Ok(a
        .amps
        .iter()
        .zip(&b.amps)
        .all(|(x, y)| (x - y).norm().min((x + y).norm()) <= tol))
}

fn same_space(a: &WalkState, b: &WalkState) -> Result<()> {
    if a.space != b.space {
        return Err(WalkError::DimensionMismatch(format!(
            "states live in different spaces: {} vs {}",
            a.space, b.space
        )));
    }
    Ok(())
}
