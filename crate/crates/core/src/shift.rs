//! Shift operators: permutations of the `(coin, position)` basis.
//!
//! Grid flip-flop shift (indices modulo N):
//!
//! ```text
//! |↑,i,j⟩ → |↓,i,j−1⟩    |←,i,j⟩ → |→,i−1,j⟩
//! |↓,i,j⟩ → |↑,i,j+1⟩    |→,i,j⟩ → |←,i+1,j⟩
//! ```
//!
//! Cycle flip-flop: `|0,x⟩ → |1,x−1⟩`, `|1,x⟩ → |0,x+1⟩`.
//! Cycle moving: `|0,x⟩ → |0,x−1⟩`, `|1,x⟩ → |1,x+1⟩`.
//! The two-coin shifts apply the grid table to one register and leave the
//! other alone.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::state::{flat_index, SpaceDescriptor, Topology, WalkState, DOWN, LEFT, RIGHT, UP};
use crate::{Result, WalkError};

pub const SHIFT_MATRIX_LIMIT: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    GridFlipFlop,
    CycleMoving,
    CycleFlipFlop,
    /// Grid flip-flop acting on coin register `slot` (0 or 1) of a two-coin walk.
    TwoCoinGrid(usize),
}

impl ShiftKind {
    /// Coin register the shift reads its direction from.
    pub fn slot(&self) -> usize {
        match *self {
            ShiftKind::TwoCoinGrid(slot) => slot,
            _ => 0,
        }
    }

    pub fn check(&self, space: &SpaceDescriptor) -> Result<()> {
        let coins = space.coin_dims().len();
        let ok = match (self, space.topology()) {
            (ShiftKind::GridFlipFlop, Topology::Grid(_)) => coins == 1,
            (ShiftKind::TwoCoinGrid(slot), Topology::Grid(_)) => coins == 2 && *slot < 2,
            (ShiftKind::CycleMoving | ShiftKind::CycleFlipFlop, Topology::Cycle(_)) => coins == 1,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(WalkError::IncompatibleTopology(format!(
                "shift {self} cannot act on {space}"
            )))
        }
    }

    /// `(target coin, Δi, Δj)` for a walker whose acting coin is `coin`.
    /// On the cycle only `Δi` is used.
    fn moves(&self) -> &'static [(usize, isize, isize)] {
        const GRID: [(usize, isize, isize); 4] = [(DOWN, 0, -1), (UP, 0, 1), (RIGHT, -1, 0), (LEFT, 1, 0)];
        const CYCLE_FLIP: [(usize, isize, isize); 2] = [(1, -1, 0), (0, 1, 0)];
        const CYCLE_MOVE: [(usize, isize, isize); 2] = [(0, -1, 0), (1, 1, 0)];
        match self {
            ShiftKind::GridFlipFlop | ShiftKind::TwoCoinGrid(_) => &GRID,
            ShiftKind::CycleFlipFlop => &CYCLE_FLIP,
            ShiftKind::CycleMoving => &CYCLE_MOVE,
        }
    }
}

impl fmt::Display for ShiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftKind::GridFlipFlop => write!(f, "grid-flipflop"),
            ShiftKind::CycleMoving => write!(f, "cycle-moving"),
            ShiftKind::CycleFlipFlop => write!(f, "cycle-flipflop"),
            ShiftKind::TwoCoinGrid(slot) => write!(f, "two-coin-grid:{}", slot + 1),
        }
    }
}

impl FromStr for ShiftKind {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "grid-flipflop" => Ok(ShiftKind::GridFlipFlop),
            "cycle-moving" => Ok(ShiftKind::CycleMoving),
            "cycle-flipflop" => Ok(ShiftKind::CycleFlipFlop),
            "two-coin-grid:1" => Ok(ShiftKind::TwoCoinGrid(0)),
            "two-coin-grid:2" => Ok(ShiftKind::TwoCoinGrid(1)),
            other => Err(WalkError::Parse(format!("unknown shift `{other}`"))),
        }
    }
}

fn wrap(x: isize, n: usize) -> usize {
    x.rem_euclid(n as isize) as usize
}

/// Copies a rolled position block: `dst[p + Δ] = src[p]` with wraparound.
fn roll_block(src: &[Complex64], dst: &mut [Complex64], topology: Topology, di: isize, dj: isize) {
    match topology {
        Topology::Cycle(n) => {
            let k = wrap(di, n);
            dst[k..].copy_from_slice(&src[..n - k]);
            dst[..k].copy_from_slice(&src[n - k..]);
        }
        Topology::Grid(n) => {
            let k = wrap(dj, n);
            for i in 0..n {
                let row = &src[i * n..(i + 1) * n];
                let ti = wrap(i as isize + di, n);
                let out = &mut dst[ti * n..(ti + 1) * n];
                out[k..].copy_from_slice(&row[..n - k]);
                out[..k].copy_from_slice(&row[n - k..]);
            }
        }
    }
}

/// Permutes amplitudes according to `kind`.
pub fn apply_shift(state: &WalkState, kind: ShiftKind) -> Result<WalkState> {
    let mut out = state.clone();
    apply_shift_into(state, &mut out, kind)?;
    Ok(out)
}

/// Writes the shifted amplitudes of `src` into `dst` (same space).
pub(crate) fn apply_shift_into(src: &WalkState, dst: &mut WalkState, kind: ShiftKind) -> Result<()> {
    let space = src.space();
    kind.check(space)?;
    if dst.space() != space {
        return Err(WalkError::DimensionMismatch("shift target space differs".into()));
    }
    let slot = kind.slot();
    let dims = space.coin_dims();
    let d = dims[slot];
    let positions = space.positions();
    let stride = space.coin_stride(slot);
    let outer: usize = dims[..slot].iter().product();
    let inner = stride / positions;
    let moves = kind.moves();
    let topology = space.topology();
    let from = src.amplitudes();
    let to = dst.amps_mut();
    for o in 0..outer {
        for (c, &(tc, di, dj)) in moves.iter().enumerate().take(d) {
            for r in 0..inner {
                let s = o * d * stride + c * stride + r * positions;
                let t = o * d * stride + tc * stride + r * positions;
                roll_block(&from[s..s + positions], &mut to[t..t + positions], topology, di, dj);
            }
        }
    }
    Ok(())
}

/// Image of basis state `|coin, pos⟩` of the acting register, written out
/// case by case from the shift tables.
pub fn shift_target(topology: Topology, kind: ShiftKind, coin: usize, pos: usize) -> (usize, usize) {
    let n = topology.n();
    let dec = |x: usize| (x + n - 1) % n;
    let inc = |x: usize| (x + 1) % n;
    match kind {
        ShiftKind::GridFlipFlop | ShiftKind::TwoCoinGrid(_) => {
            let (i, j) = (pos / n, pos % n);
            match coin {
                UP => (DOWN, i * n + dec(j)),
                DOWN => (UP, i * n + inc(j)),
                LEFT => (RIGHT, dec(i) * n + j),
                RIGHT => (LEFT, inc(i) * n + j),
                _ => unreachable!("grid coin index {coin}"),
            }
        }
        ShiftKind::CycleFlipFlop => match coin {
            0 => (1, dec(pos)),
            _ => (0, inc(pos)),
        },
        ShiftKind::CycleMoving => match coin {
            0 => (0, dec(pos)),
            _ => (1, inc(pos)),
        },
    }
}

/// Dense 0/1 matrix `M` with `M[dst, src] = 1` for every basis state.
pub fn shift_matrix(space: &SpaceDescriptor, kind: ShiftKind) -> Result<DMatrix<f64>> {
    kind.check(space)?;
    let dim = space.dim();
    if dim > SHIFT_MATRIX_LIMIT {
        return Err(WalkError::DenseTooLarge {
            dim,
            limit: SHIFT_MATRIX_LIMIT,
        });
    }
    let slot = kind.slot();
    let dims = space.coin_dims();
    let mut m = DMatrix::zeros(dim, dim);
    let mut coins = vec![0usize; dims.len()];
    for cidx in 0..space.coin_volume() {
        let mut rest = cidx;
        for k in (0..dims.len()).rev() {
            coins[k] = rest % dims[k];
            rest /= dims[k];
        }
        for pos in 0..space.positions() {
            let src = flat_index(space, &coins, pos)?;
            let (tc, tp) = shift_target(space.topology(), kind, coins[slot], pos);
            let mut target = coins.clone();
            target[slot] = tc;
            let dst = flat_index(space, &target, tp)?;
            m[(dst, src)] = 1.0;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(space: &SpaceDescriptor, rng: &mut impl Rng) -> WalkState {
        let amps: Vec<Complex64> = (0..space.dim())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        WalkState::from_amplitudes(space.clone(), amps.into_iter().map(|a| a / n).collect()).unwrap()
    }

    fn dense_apply(m: &DMatrix<f64>, s: &WalkState) -> Vec<Complex64> {
        let a = s.amplitudes();
        (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| a[c] * m[(r, c)]).sum())
            .collect()
    }

    #[test]
    fn left_edge_wraps_to_right() {
        let space = SpaceDescriptor::grid(5).unwrap();
        let src = flat_index(&space, &[LEFT], space.vertex(0, 2).unwrap()).unwrap();
        let out = apply_shift(&WalkState::basis(&space, src).unwrap(), ShiftKind::GridFlipFlop).unwrap();
        let dst = flat_index(&space, &[RIGHT], space.vertex(4, 2).unwrap()).unwrap();
        assert_eq!(out.amplitudes()[dst], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn grid_table() {
        let space = SpaceDescriptor::grid(4).unwrap();
        let cases = [
            (UP, (1, 0), DOWN, (1, 3)),
            (DOWN, (1, 3), UP, (1, 0)),
            (LEFT, (0, 2), RIGHT, (3, 2)),
            (RIGHT, (3, 1), LEFT, (0, 1)),
        ];
        for (c, (i, j), tc, (ti, tj)) in cases {
            let src = flat_index(&space, &[c], space.vertex(i, j).unwrap()).unwrap();
            let out = apply_shift(&WalkState::basis(&space, src).unwrap(), ShiftKind::GridFlipFlop).unwrap();
            let dst = flat_index(&space, &[tc], space.vertex(ti, tj).unwrap()).unwrap();
            assert_eq!(out.amplitudes()[dst].re, 1.0, "coin {c} at ({i},{j})");
        }
    }

    #[test]
    fn cycle_flip_flop_moves_down_and_flips() {
        let space = SpaceDescriptor::cycle(6).unwrap();
        for x in 0..6 {
            let b = WalkState::basis(&space, flat_index(&space, &[0], x).unwrap()).unwrap();
            let out = apply_shift(&b, ShiftKind::CycleFlipFlop).unwrap();
            let want = flat_index(&space, &[1], (x + 5) % 6).unwrap();
            assert_eq!(out.amplitudes()[want].re, 1.0);
        }
    }

    #[test]
    fn two_coin_shift_leaves_other_register() {
        let space = SpaceDescriptor::grid_two_coin(3).unwrap();
        let v = space.vertex(0, 0).unwrap();
        let b = WalkState::basis(&space, flat_index(&space, &[UP, LEFT], v).unwrap()).unwrap();
        let s1 = apply_shift(&b, ShiftKind::TwoCoinGrid(0)).unwrap();
        let want = flat_index(&space, &[DOWN, LEFT], space.vertex(0, 2).unwrap()).unwrap();
        assert_eq!(s1.amplitudes()[want].re, 1.0);
        let s2 = apply_shift(&b, ShiftKind::TwoCoinGrid(1)).unwrap();
        let want = flat_index(&space, &[UP, RIGHT], space.vertex(2, 0).unwrap()).unwrap();
        assert_eq!(s2.amplitudes()[want].re, 1.0);
    }

    #[test]
    fn uniform_state_is_fixed() {
        for (space, kind) in [
            (SpaceDescriptor::grid(4).unwrap(), ShiftKind::GridFlipFlop),
            (SpaceDescriptor::cycle(5).unwrap(), ShiftKind::CycleMoving),
            (SpaceDescriptor::cycle(5).unwrap(), ShiftKind::CycleFlipFlop),
            (SpaceDescriptor::grid_two_coin(3).unwrap(), ShiftKind::TwoCoinGrid(1)),
        ] {
            let u = WalkState::uniform(&space);
            assert_eq!(apply_shift(&u, kind).unwrap(), u);
        }
    }

    #[test]
    fn incompatible_kinds_rejected() {
        let grid = WalkState::uniform(&SpaceDescriptor::grid(3).unwrap());
        assert!(apply_shift(&grid, ShiftKind::CycleMoving).is_err());
        assert!(apply_shift(&grid, ShiftKind::TwoCoinGrid(0)).is_err());
        let cycle = WalkState::uniform(&SpaceDescriptor::cycle(3).unwrap());
        assert!(apply_shift(&cycle, ShiftKind::GridFlipFlop).is_err());
    }

    #[test]
    fn dense_limit() {
        let big = SpaceDescriptor::grid(46).unwrap();
        let err = shift_matrix(&big, ShiftKind::GridFlipFlop).unwrap_err();
        assert!(err.to_string().contains("dense materialization refused"));
    }

    #[test]
    fn cycle2_flip_flop_matrix() {
        let space = SpaceDescriptor::cycle(2).unwrap();
        let m = shift_matrix(&space, ShiftKind::CycleFlipFlop).unwrap();
        // |0,0⟩→|1,1⟩, |0,1⟩→|1,0⟩, |1,0⟩→|0,1⟩, |1,1⟩→|0,0⟩
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0,
            ],
        );
        assert_eq!(m, want);
    }

    #[test]
    fn matrices_are_permutations() {
        for (space, kind) in [
            (SpaceDescriptor::grid(3).unwrap(), ShiftKind::GridFlipFlop),
            (SpaceDescriptor::cycle(5).unwrap(), ShiftKind::CycleMoving),
            (SpaceDescriptor::cycle(5).unwrap(), ShiftKind::CycleFlipFlop),
            (SpaceDescriptor::grid_two_coin(2).unwrap(), ShiftKind::TwoCoinGrid(0)),
            (SpaceDescriptor::grid_two_coin(2).unwrap(), ShiftKind::TwoCoinGrid(1)),
        ] {
            let m = shift_matrix(&space, kind).unwrap();
            let id = DMatrix::<f64>::identity(space.dim(), space.dim());
            assert_eq!(&m * m.transpose(), id, "{kind}");
        }
    }

    #[test]
    fn structured_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases = [
            (SpaceDescriptor::cycle(5).unwrap(), ShiftKind::CycleMoving),
            (SpaceDescriptor::cycle(5).unwrap(), ShiftKind::CycleFlipFlop),
            (SpaceDescriptor::grid(3).unwrap(), ShiftKind::GridFlipFlop),
            (SpaceDescriptor::grid_two_coin(3).unwrap(), ShiftKind::TwoCoinGrid(0)),
            (SpaceDescriptor::grid_two_coin(3).unwrap(), ShiftKind::TwoCoinGrid(1)),
        ];
        for (space, kind) in cases {
            let m = shift_matrix(&space, kind).unwrap();
            for _ in 0..100 {
                let s = random_state(&space, &mut rng);
                let fast = apply_shift(&s, kind).unwrap();
                let slow = dense_apply(&m, &s);
                let err = fast
                    .amplitudes()
                    .iter()
                    .zip(&slow)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-15, "{kind}: {err}");
            }
        }
    }

    #[test]
    fn moving_shift_full_loop() {
        let n = 7;
        let space = SpaceDescriptor::cycle(n).unwrap();
        let b = WalkState::basis(&space, flat_index(&space, &[0], 3).unwrap()).unwrap();
        let mut s = b.clone();
        for k in 1..=n {
            s = apply_shift(&s, ShiftKind::CycleMoving).unwrap();
            assert_eq!(s == b, k == n);
        }
    }

    proptest! {
        #[test]
        fn flip_flop_is_involution(
            raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36),
            cycle_raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 14),
        ) {
            let grid = SpaceDescriptor::grid(3).unwrap();
            let s = WalkState::from_amplitudes(grid, raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
            let twice = apply_shift(&apply_shift(&s, ShiftKind::GridFlipFlop).unwrap(), ShiftKind::GridFlipFlop).unwrap();
            prop_assert_eq!(twice, s.clone());

            let cycle = SpaceDescriptor::cycle(7).unwrap();
            let s = WalkState::from_amplitudes(cycle, cycle_raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
            let twice = apply_shift(&apply_shift(&s, ShiftKind::CycleFlipFlop).unwrap(), ShiftKind::CycleFlipFlop).unwrap();
            prop_assert_eq!(twice, s);
        }

        #[test]
        fn shift_preserves_norm_exactly(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64)) {
            let space = SpaceDescriptor::grid(4).unwrap();
            let s = WalkState::from_amplitudes(space, raw.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
            let out = apply_shift(&s, ShiftKind::GridFlipFlop).unwrap();
            let mut a: Vec<f64> = s.amplitudes().iter().map(|x| x.norm_sqr()).collect();
            let mut b: Vec<f64> = out.amplitudes().iter().map(|x| x.norm_sqr()).collect();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            prop_assert_eq!(a, b);
        }
    }
}
