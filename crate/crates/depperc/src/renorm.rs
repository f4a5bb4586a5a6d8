//! The renormalization map and its fixed-point iteration.
//!
//! One renormalization step replaces the marginal `p` by
//! `h(p) = q_long(p) * q_square(p)`, the product of the chain's exact
//! survival probabilities across the long diagonal rectangle (`ell = w + 1`,
//! `4w + 2` transitions) and the diagonal square (`ell = 0`, `2w`
//! transitions). Once an iterate beats its predecessor the sequence is
//! driven to 1, certifying percolation of every positively associated
//! 1-independent model above the starting marginal; the artifact's job is to
//! exhibit that certificate numerically, e.g. `h(0.77) > 0.77` at `w = 20`.

use crate::error::{Error, Result};
use crate::transfer::exact_survival;
use serde::Serialize;

/// Outcome of a fixed-point iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The trajectory rose above its start and reached `1 - eps`.
    EscapesToOne,
    /// Some iterate fell below the starting marginal. Descriptive only; no
    /// conclusion about non-percolation is drawn.
    Contracts,
    /// The iteration budget ran out first.
    Inconclusive,
}

/// One recorded iteration step.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RenormStep {
    /// Step index; `p` is the marginal entering the step.
    pub n: usize,
    pub p: f64,
    /// Survival across the long rectangle at this `p`.
    pub q_long: f64,
    /// Survival across the square at this `p`.
    pub q_square: f64,
}

/// A full iteration record.
#[derive(Clone, Debug, Serialize)]
pub struct RenormTrajectory {
    pub w: usize,
    pub p0: f64,
    pub steps: Vec<RenormStep>,
    /// The marginal after the last recorded step.
    pub final_p: f64,
    pub verdict: Verdict,
}

/// One application of the renormalization map at half-width `w`.
pub fn renorm_map(p: f64, w: usize) -> Result<f64> {
    let (q_long, q_square) = survival_pair(p, w)?;
    Ok(q_long * q_square)
}

/// Both survival factors of the map, computed concurrently.
pub fn survival_pair(p: f64, w: usize) -> Result<(f64, f64)> {
    let (long, square) = rayon::join(|| exact_survival(w, w + 1, p), || exact_survival(w, 0, p));
    Ok((long?, square?))
}

/// Iterate the map from `p0` until it exceeds `1 - eps` (escape), drops
/// below `p0` (contraction), or exhausts `max_iters`.
pub fn iterate(p0: f64, w: usize, max_iters: usize, eps: f64) -> Result<RenormTrajectory> {
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be >= 1".to_string()));
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::invalid(format!("p0 must lie in [0,1], got {p0}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let mut steps = Vec::new();
    let mut p = p0;
    let mut verdict = Verdict::Inconclusive;
    for n in 0..max_iters {
        if p > 1.0 - eps {
            verdict = Verdict::EscapesToOne;
            break;
        }
        let (q_long, q_square) = survival_pair(p, w)?;
        steps.push(RenormStep {
            n,
            p,
            q_long,
            q_square,
        });
        p = q_long * q_square;
        if p < p0 {
            verdict = Verdict::Contracts;
            break;
        }
    }
    if p > 1.0 - eps {
        verdict = Verdict::EscapesToOne;
    }
    Ok(RenormTrajectory {
        w,
        p0,
        steps,
        final_p: p,
        verdict,
    })
}

/// Default escape threshold.
pub const DEFAULT_EPS: f64 = 1e-3;
/// Default iteration budget.
pub const DEFAULT_MAX_ITERS: usize = 50;
