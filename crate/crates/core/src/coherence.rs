//! Closed-form l1 coherence for the `(X, Q)` walk on the cycle.

use num_complex::Complex64;

use crate::coin::CoinSpec;
use crate::engine::{SnapshotPolicy, Trace, WalkSpec};
use crate::shift::ShiftKind;
use crate::state::MarkedSet;
use crate::{Result, WalkError};

/// Entries `p`, `q` derived from the parameters of a `Q(ρ, θ, φ)` coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PQParams {
    pub rho: f64,
    pub theta: f64,
    pub phi: f64,
    pub p: Complex64,
    pub q: Complex64,
}

impl PQParams {
    pub fn new(rho: f64, theta: f64, phi: f64) -> Result<Self> {
        CoinSpec::GeneralQ { rho, theta, phi }.validate()?;
        let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
        let p = b * Complex64::cis(phi) - a * Complex64::cis(theta + phi);
        let q = a + b * Complex64::cis(theta);
        let out = Self { rho, theta, phi, p, q };
        debug_assert!((out.p.norm_sqr() + out.q.norm_sqr() - 2.0).abs() < 1e-12);
        Ok(out)
    }

    pub fn hadamard() -> Self {
        Self::new(0.5, 0.0, 0.0).expect("valid parameters")
    }

    pub fn coin(&self) -> CoinSpec {
        CoinSpec::GeneralQ { rho: self.rho, theta: self.theta, phi: self.phi }
    }

    /// `|p| + |q|`
    pub fn l1_gain(&self) -> f64 {
        self.p.norm() + self.q.norm()
    }
}

/// `[(2N − 2t) + t(|p| + |q|)]² / (2N) − 1`, valid for `t < N`.
pub fn coherence_closed_form(n: usize, t: usize, params: &PQParams) -> Result<f64> {
    if t >= n {
        return Err(WalkError::FormulaRange { t, n });
    }
    let (n, t) = (n as f64, t as f64);
    let l1 = (2.0 * n - 2.0 * t) + t * params.l1_gain();
    Ok(l1 * l1 / (2.0 * n) - 1.0)
}

/// True iff every recorded coherence equals `dim − 1` within `tol`.
pub fn constant_coherence_check(trace: &Trace, dim: usize, tol: f64) -> bool {
    let target = dim as f64 - 1.0;
    trace.coherence.iter().all(|c| (c - target).abs() <= tol)
}

/// Simulated coherence of `(X, Q)` on `Cycle(n)` with marked vertex 0 and the
/// flip-flop shift, for `t = 0..=steps`.
pub fn simulated_coherence(n: usize, params: &PQParams, steps: usize) -> Result<Vec<f64>> {
    let marked = MarkedSet::new([0], n)?;
    let spec = WalkSpec::cycle(n, CoinSpec::PauliX, params.coin(), ShiftKind::CycleFlipFlop, marked)?;
    let mut walker = spec.walker();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(walker.state().l1_coherence());
    for t in 1..=steps {
        let state = walker.advance();
        if cfg!(debug_assertions) && t < n {
            check_intermediate(state.amplitudes(), n, t, params);
        }
        out.push(state.l1_coherence());
    }
    Ok(out)
}

/// Asserts that the `√(2N)`-scaled amplitudes at `|0,0⟩` and `|1,0⟩` are 1 and
/// their l1 norm is `(2N − 2t) + t(|p| + |q|)`.
fn check_intermediate(amps: &[Complex64], n: usize, t: usize, params: &PQParams) {
    let scale = (2.0 * n as f64).sqrt();
    let u = |i: usize| amps[i] * scale;
    debug_assert!((u(0) - 1.0).norm() < 1e-9, "U^{t}(1) = {}", u(0));
    debug_assert!((u(n) - 1.0).norm() < 1e-9, "U^{t}(N+1) = {}", u(n));
    let l1: f64 = amps.iter().map(|a| a.norm()).sum::<f64>() * scale;
    let expected = (2 * n - 2 * t) as f64 + t as f64 * params.l1_gain();
    debug_assert!((l1 - expected).abs() < 1e-9, "l1 {l1} vs {expected} at t = {t}");
}

/// Runs the `(X, Q)` walk for `steps` and returns the trace.
pub fn xq_trace(n: usize, params: &PQParams, steps: usize) -> Result<Trace> {
    let marked = MarkedSet::new([0], n)?;
    let spec = WalkSpec::cycle(n, CoinSpec::PauliX, params.coin(), ShiftKind::CycleFlipFlop, marked)?;
    Ok(spec.run(steps, SnapshotPolicy::None))
}
