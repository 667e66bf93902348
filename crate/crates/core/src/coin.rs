//! Coin operators and the marked/unmarked conditional coin.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::state::{MarkedSet, WalkState};
use crate::{Result, WalkError};

const MAX_COIN_DIM: usize = 4;

/// Symbolic coin description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoinSpec {
    /// Grover diffusion `2|γ⟩⟨γ| − I` in dimension d.
    GroverD(usize),
    /// 4-dimensional discrete Fourier transform.
    Fourier4,
    PauliX,
    Hadamard,
    /// General 2×2 unitary parameterised by `(ρ, θ, φ)`.
    GeneralQ { rho: f64, theta: f64, phi: f64 },
    NegIdentity(usize),
    Identity(usize),
}

impl CoinSpec {
    pub fn dim(&self) -> usize {
        match *self {
            CoinSpec::GroverD(d) | CoinSpec::NegIdentity(d) | CoinSpec::Identity(d) => d,
            CoinSpec::Fourier4 => 4,
            CoinSpec::PauliX | CoinSpec::Hadamard | CoinSpec::GeneralQ { .. } => 2,
        }
    }

    pub fn matrix(&self) -> Result<CoinMatrix> {
        build_coin_matrix(self)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d != 2 && d != 4 {
            return Err(WalkError::InvalidCoin(format!(
                "{self}: only dimensions 2 and 4 are supported"
            )));
        }
        if let CoinSpec::GeneralQ { rho, theta, phi } = *self {
            let ok = (0.0..=1.0).contains(&rho)
                && (0.0..=PI).contains(&theta)
                && (0.0..=2.0 * PI).contains(&phi);
            if !ok {
                return Err(WalkError::InvalidCoin(format!(
                    "q({rho},{theta},{phi}) outside ρ∈[0,1], θ∈[0,π], φ∈[0,2π]"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for CoinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoinSpec::GroverD(d) => write!(f, "grover{d}"),
            CoinSpec::Fourier4 => write!(f, "fourier4"),
            CoinSpec::PauliX => write!(f, "paulix"),
            CoinSpec::Hadamard => write!(f, "hadamard"),
            CoinSpec::GeneralQ { rho, theta, phi } => write!(f, "q({rho},{theta},{phi})"),
            CoinSpec::NegIdentity(d) => write!(f, "negid{d}"),
            CoinSpec::Identity(d) => write!(f, "id{d}"),
        }
    }
}

impl FromStr for CoinSpec {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || WalkError::Parse(format!("unknown coin `{s}`"));
        let spec = match s {
            "fourier4" => CoinSpec::Fourier4,
            "paulix" => CoinSpec::PauliX,
            "hadamard" => CoinSpec::Hadamard,
            _ => {
                if let Some(args) = s.strip_prefix("q(").and_then(|r| r.strip_suffix(')')) {
                    let parts = args
                        .split(',')
                        .map(|p| p.trim().parse::<f64>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad())?;
                    match parts[..] {
                        [rho, theta, phi] => CoinSpec::GeneralQ { rho, theta, phi },
                        _ => return Err(bad()),
                    }
                } else if let Some(d) = s.strip_prefix("grover") {
                    CoinSpec::GroverD(d.parse().map_err(|_| bad())?)
                } else if let Some(d) = s.strip_prefix("negid") {
                    CoinSpec::NegIdentity(d.parse().map_err(|_| bad())?)
                } else if let Some(d) = s.strip_prefix("id") {
                    CoinSpec::Identity(d.parse().map_err(|_| bad())?)
                } else {
                    return Err(bad());
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Dense d×d coin matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl CoinMatrix {
    fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `max |(C†C − I)_{ij}|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let dot: Complex64 = (0..d).map(|k| self.get(k, i).conj() * self.get(k, j)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &CoinMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Literal matrix for a coin description.
pub fn build_coin_matrix(spec: &CoinSpec) -> Result<CoinMatrix> {
    spec.validate()?;
    let re = |x: f64| Complex64::new(x, 0.0);
    let m = match *spec {
        CoinSpec::GroverD(d) => {
            let g = 2.0 / d as f64;
            CoinMatrix::from_fn(d, |r, c| re(if r == c { g - 1.0 } else { g }))
        }
        CoinSpec::Fourier4 => {
            // ω = i; entry (r, c) = i^{rc} / 2
            const POWERS: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
            CoinMatrix::from_fn(4, |r, c| {
                let (x, y) = POWERS[(r * c) % 4];
                Complex64::new(x / 2.0, y / 2.0)
            })
        }
        CoinSpec::PauliX => CoinMatrix::from_fn(2, |r, c| re(if r == c { 0.0 } else { 1.0 })),
        CoinSpec::Hadamard => CoinMatrix::from_fn(2, |r, c| {
            re(if r == 1 && c == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 })
        }),
        CoinSpec::GeneralQ { rho, theta, phi } => {
            let a = rho.sqrt();
            let b = (1.0 - rho).sqrt();
            let e = |x: f64| Complex64::from_polar(1.0, x);
            let rows = [
                [re(a), e(theta) * b],
                [e(phi) * b, -e(theta + phi) * a],
            ];
            CoinMatrix::from_fn(2, |r, c| rows[r][c])
        }
        CoinSpec::NegIdentity(d) => CoinMatrix::from_fn(d, |r, c| re(if r == c { -1.0 } else { 0.0 })),
        CoinSpec::Identity(d) => CoinMatrix::from_fn(d, |r, c| re(if r == c { 1.0 } else { 0.0 })),
    };
    Ok(m)
}

/// `C₀ ⊗ (I − Σ|v⟩⟨v|) + C₁ ⊗ Σ|v⟩⟨v|`: `unmarked` acts off the marked set,
/// `marked` acts on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalCoin {
    pub unmarked: CoinSpec,
    pub marked: CoinSpec,
    pub marked_set: MarkedSet,
}

impl ConditionalCoin {
    pub fn new(unmarked: CoinSpec, marked: CoinSpec, marked_set: MarkedSet) -> Result<Self> {
        unmarked.validate()?;
        marked.validate()?;
        if unmarked.dim() != marked.dim() {
            return Err(WalkError::DimensionMismatch(format!(
                "unmarked coin {unmarked} and marked coin {marked} differ in dimension"
            )));
        }
        Ok(Self {
            unmarked,
            marked,
            marked_set,
        })
    }

    pub fn dim(&self) -> usize {
        self.unmarked.dim()
    }
}

/// Coin ready for repeated application: matrices built, marked set expanded
/// to a per-position table.
#[derive(Debug, Clone)]
pub(crate) struct PreparedCoin {
    unmarked: CoinMatrix,
    marked: CoinMatrix,
    mask: Vec<bool>,
}

impl PreparedCoin {
    pub(crate) fn new(cc: &ConditionalCoin, positions: usize) -> Result<Self> {
        if !cc.marked_set.fits(positions) {
            return Err(WalkError::InvalidMarkedSet(format!(
                "marked set exceeds {positions} positions"
            )));
        }
        Ok(Self {
            unmarked: build_coin_matrix(&cc.unmarked)?,
            marked: build_coin_matrix(&cc.marked)?,
            mask: cc.marked_set.mask(positions),
        })
    }

    fn unconditional(spec: &CoinSpec, positions: usize) -> Result<Self> {
        let m = build_coin_matrix(spec)?;
        Ok(Self {
            unmarked: m.clone(),
            marked: m,
            mask: vec![false; positions],
        })
    }

    pub(crate) fn matrix_at(&self, pos: usize) -> &CoinMatrix {
        if self.mask[pos] {
            &self.marked
        } else {
            &self.unmarked
        }
    }

    /// Applies the coin in place to register `slot` of `state`.
    pub(crate) fn apply_in_place(&self, state: &mut WalkState, slot: usize) -> Result<()> {
        let space = state.space().clone();
        let dims = space.coin_dims();
        if slot >= dims.len() {
            return Err(WalkError::IndexOutOfBounds {
                what: "coin slot",
                index: slot,
                limit: dims.len(),
            });
        }
        let d = dims[slot];
        if d != self.unmarked.dim() {
            return Err(WalkError::DimensionMismatch(format!(
                "coin of dimension {} applied to register of dimension {d}",
                self.unmarked.dim()
            )));
        }
        let positions = space.positions();
        if self.mask.len() != positions {
            return Err(WalkError::DimensionMismatch(format!(
                "coin prepared for {} positions, state has {positions}",
                self.mask.len()
            )));
        }
        let stride = space.coin_stride(slot);
        let outer: usize = dims[..slot].iter().product();
        let amps = state.amps_mut();
        let mut buf = [Complex64::new(0.0, 0.0); MAX_COIN_DIM];
        for o in 0..outer {
            let block = o * d * stride;
            for r in 0..stride {
                let m = self.matrix_at(r % positions);
                let base = block + r;
                for k in 0..d {
                    buf[k] = amps[base + k * stride];
                }
                for row in 0..d {
                    let coeffs = &m.entries[row * d..(row + 1) * d];
                    amps[base + row * stride] =
                        coeffs.iter().zip(&buf[..d]).map(|(c, x)| c * x).sum();
                }
            }
        }
        Ok(())
    }
}

/// Applies the conditional coin to register `coin_slot`, leaving every
/// other tensor factor untouched.
pub fn apply_conditional_coin(
    state: &WalkState,
    cc: &ConditionalCoin,
    coin_slot: usize,
) -> Result<WalkState> {
    let prepared = PreparedCoin::new(cc, state.space().positions())?;
    let mut out = state.clone();
    prepared.apply_in_place(&mut out, coin_slot)?;
    Ok(out)
}

/// Applies the same coin at every position.
pub fn apply_coin(state: &WalkState, spec: &CoinSpec, coin_slot: usize) -> Result<WalkState> {
    let prepared = PreparedCoin::unconditional(spec, state.space().positions())?;
    let mut out = state.clone();
    prepared.apply_in_place(&mut out, coin_slot)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{flat_index, SpaceDescriptor};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grover_first_row() {
        let g = build_coin_matrix(&CoinSpec::GroverD(4)).unwrap();
        let row: Vec<_> = (0..4).map(|k| g.get(0, k)).collect();
        assert_eq!(row, vec![c(-0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        assert_eq!(g.get(3, 3), c(-0.5, 0.0));
    }

    #[test]
    fn fourier_second_row() {
        let f = build_coin_matrix(&CoinSpec::Fourier4).unwrap();
        let row: Vec<_> = (0..4).map(|k| f.get(1, k)).collect();
        assert_eq!(row, vec![c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)]);
        let row: Vec<_> = (0..4).map(|k| f.get(3, k)).collect();
        assert_eq!(row, vec![c(0.5, 0.0), c(0.0, -0.5), c(-0.5, 0.0), c(0.0, 0.5)]);
    }

    #[test]
    fn special_cases_coincide() {
        let x = build_coin_matrix(&CoinSpec::PauliX).unwrap();
        let g2 = build_coin_matrix(&CoinSpec::GroverD(2)).unwrap();
        assert!(x.max_abs_diff(&g2) <= 1e-15);

        let h = build_coin_matrix(&CoinSpec::Hadamard).unwrap();
        let q = build_coin_matrix(&CoinSpec::GeneralQ { rho: 0.5, theta: 0.0, phi: 0.0 }).unwrap();
        assert!(h.max_abs_diff(&q) <= 1e-15);
        let s = FRAC_1_SQRT_2;
        assert_eq!(h.entries(), &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    }

    #[test]
    fn named_coins_are_unitary() {
        for spec in [
            CoinSpec::GroverD(2),
            CoinSpec::GroverD(4),
            CoinSpec::Fourier4,
            CoinSpec::PauliX,
            CoinSpec::Hadamard,
            CoinSpec::NegIdentity(2),
            CoinSpec::NegIdentity(4),
            CoinSpec::Identity(4),
        ] {
            assert!(spec.matrix().unwrap().unitarity_error() <= 1e-12, "{spec}");
        }
    }

    #[test]
    fn text_forms_round_trip() {
        for text in ["grover4", "fourier4", "paulix", "hadamard", "negid4", "negid2", "id2", "q(0.3,1,2)"] {
            let spec: CoinSpec = text.parse().unwrap();
            let again: CoinSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        assert_eq!(
            "q(0.5, 0, 0)".parse::<CoinSpec>().unwrap(),
            CoinSpec::GeneralQ { rho: 0.5, theta: 0.0, phi: 0.0 }
        );
        assert!("grover3".parse::<CoinSpec>().is_err());
        assert!("q(1.5,0,0)".parse::<CoinSpec>().is_err());
        assert!("q(0.5,0)".parse::<CoinSpec>().is_err());
        assert!("sqrtx".parse::<CoinSpec>().is_err());
    }

    #[test]
    fn grover_fixes_uniform_grid_state() {
        let space = SpaceDescriptor::grid(4).unwrap();
        let u = WalkState::uniform(&space);
        let cc = ConditionalCoin::new(CoinSpec::GroverD(4), CoinSpec::NegIdentity(4), MarkedSet::empty())
            .unwrap();
        let out = apply_conditional_coin(&u, &cc, 0).unwrap();
        assert!(out.max_distance(&u, 1.0).unwrap() < 1e-15);
    }

    #[test]
    fn pauli_x_fixes_uniform_cycle_state() {
        let space = SpaceDescriptor::cycle(5).unwrap();
        let u = WalkState::uniform(&space);
        let cc = ConditionalCoin::new(CoinSpec::PauliX, CoinSpec::PauliX, MarkedSet::new([0], 5).unwrap())
            .unwrap();
        assert_eq!(apply_conditional_coin(&u, &cc, 0).unwrap(), u);
    }

    #[test]
    fn hadamard_on_marked_vertex() {
        let space = SpaceDescriptor::cycle(4).unwrap();
        let u = WalkState::uniform(&space);
        let cc = ConditionalCoin::new(CoinSpec::PauliX, CoinSpec::Hadamard, MarkedSet::new([0], 4).unwrap())
            .unwrap();
        let out = apply_conditional_coin(&u, &cc, 0).unwrap();
        let s8 = 8f64.sqrt();
        assert!((out.amplitude(&[0], 0).unwrap() - c(2f64.sqrt() / s8, 0.0)).norm() < 1e-15);
        assert!(out.amplitude(&[1], 0).unwrap().norm() < 1e-15);
        for x in 1..4 {
            for coin in 0..2 {
                assert!((out.amplitude(&[coin], x).unwrap() - c(1.0 / s8, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(ConditionalCoin::new(CoinSpec::GroverD(4), CoinSpec::Hadamard, MarkedSet::empty()).is_err());
        let cycle = WalkState::uniform(&SpaceDescriptor::cycle(3).unwrap());
        let cc = ConditionalCoin::new(CoinSpec::Fourier4, CoinSpec::GroverD(4), MarkedSet::empty()).unwrap();
        assert!(apply_conditional_coin(&cycle, &cc, 0).is_err());
        let grid = WalkState::uniform(&SpaceDescriptor::grid(3).unwrap());
        assert!(apply_conditional_coin(&grid, &cc, 1).is_err());
    }

    #[test]
    fn slot_one_acts_on_second_register_only() {
        let space = SpaceDescriptor::grid_two_coin(2).unwrap();
        let idx = flat_index(&space, &[2, 0], 3).unwrap();
        let b = WalkState::basis(&space, idx).unwrap();
        let cc = ConditionalCoin::new(CoinSpec::Fourier4, CoinSpec::Fourier4, MarkedSet::empty()).unwrap();
        let out = apply_conditional_coin(&b, &cc, 1).unwrap();
        for c2 in 0..4 {
            let a = out.amplitude(&[2, c2], 3).unwrap();
            assert!((a.norm() - 0.5).abs() < 1e-15);
        }
        assert!((out.norm() - 1.0).abs() < 1e-15);
    }

    fn random_state(space: &SpaceDescriptor, raw: &[(f64, f64)]) -> WalkState {
        let amps: Vec<_> = raw.iter().take(space.dim()).map(|&(r, i)| c(r, i)).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
        WalkState::from_amplitudes(space.clone(), amps.into_iter().map(|a| a / n).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn general_q_unitary(rho in 0.0f64..=1.0, theta in 0.0f64..=PI, phi in 0.0f64..=2.0 * PI) {
            let m = build_coin_matrix(&CoinSpec::GeneralQ { rho, theta, phi }).unwrap();
            prop_assert!(m.unitarity_error() <= 1e-12);
        }

        #[test]
        fn conditional_coin_preserves_norm(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 144),
            marked in prop::collection::btree_set(0usize..9, 0..5),
            slot in 0usize..2,
        ) {
            let space = SpaceDescriptor::grid_two_coin(3).unwrap();
            let s = random_state(&space, &raw);
            let cc = ConditionalCoin::new(
                CoinSpec::GroverD(4),
                CoinSpec::Fourier4,
                MarkedSet::new(marked, 9).unwrap(),
            ).unwrap();
            let out = apply_conditional_coin(&s, &cc, slot).unwrap();
            prop_assert!((out.norm() - s.norm()).abs() <= 1e-12);
        }

        #[test]
        fn equal_coins_ignore_marked_set(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            marked in prop::collection::btree_set(0usize..9, 0..9),
        ) {
            let space = SpaceDescriptor::grid(3).unwrap();
            let s = random_state(&space, &raw);
            let cc = ConditionalCoin::new(
                CoinSpec::Fourier4,
                CoinSpec::Fourier4,
                MarkedSet::new(marked, 9).unwrap(),
            ).unwrap();
            let a = apply_conditional_coin(&s, &cc, 0).unwrap();
            let b = apply_coin(&s, &CoinSpec::Fourier4, 0).unwrap();
            prop_assert!(a.max_distance(&b, 1.0).unwrap() <= 1e-15);
        }
    }
}
