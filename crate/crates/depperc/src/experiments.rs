//! Monte Carlo experiments and table reproduction.
//!
//! Every experiment draws its randomness from [`LatentBits`] with one
//! substream per trial, so results are reproducible from the master seed and
//! independent of scheduling; trial counts aggregate as integers and
//! per-trial statistics are reduced in a fixed order.

use crate::chain::sample_next;
use crate::error::{Error, Result};
use crate::geometry::BoxGeometry;
use crate::latent::{channel, derive_seed, LatentBits};
use crate::oracle::branching_bound_formula;
use crate::renorm::survival_pair;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

/// Monte Carlo survival estimate with an exact binomial confidence interval.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub w: usize,
    pub ell: usize,
    pub p: f64,
    pub trials: u64,
    pub survivors: u64,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub seed: u64,
}

/// Exact (Clopper-Pearson) binomial confidence interval. The normal
/// approximation degrades badly for survival probabilities near 1, which is
/// exactly where the renormalization certificate lives.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial".to_string()));
    }
    if successes > trials {
        return Err(Error::invalid(format!(
            "{successes} successes out of {trials} trials"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!(
            "confidence must lie in (0,1), got {confidence}"
        )));
    }
    let alpha = 1.0 - confidence;
    let (s, n) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        Beta::new(s, n - s + 1.0)
            .map_err(|e| Error::invalid(format!("beta quantile: {e}")))?
            .inverse_cdf(alpha / 2.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        Beta::new(s + 1.0, n - s)
            .map_err(|e| Error::invalid(format!("beta quantile: {e}")))?
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok((low, high))
}

/// Estimate the chain's survival probability across the `(w, ell)` box from
/// a fully occupied bottom level, over independent seeded trials.
pub fn mc_survival(
    w: usize,
    ell: usize,
    p: f64,
    trials: u64,
    seed: u64,
    confidence: f64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial".to_string()));
    }
    let geom = BoxGeometry::new(w, ell)?;
    let master = LatentBits::new(seed, p)?;
    let survivors: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let bits = master.with_stream(trial);
            let mut current = geom.full_bottom();
            for _ in 1..geom.num_levels() {
                current = sample_next(&current, &geom, &bits).expect("in-box step");
                if current.is_empty() {
                    return 0u64;
                }
            }
            1u64
        })
        .sum();
    let (ci_low, ci_high) = clopper_pearson(survivors, trials, confidence)?;
    Ok(McEstimate {
        w,
        ell,
        p,
        trials,
        survivors,
        point_estimate: survivors as f64 / trials as f64,
        ci_low,
        ci_high,
        confidence,
        seed,
    })
}

/// One level of the blocked-fan branching experiment.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BranchingRow {
    /// Even-level index: the row reports level `2i`.
    pub i: u32,
    pub hits: u64,
    pub empirical: f64,
    pub bound: f64,
}

/// Simulate the blocked-fan model on the oriented n-dimensional lattice:
/// every even-level vertex opens all its incoming edges together and all its
/// outgoing edges together. Reports, for each even level `2i`, the fraction
/// of trials in which the cluster of the origin reaches that level, next to
/// the closed-form bound `(n(n+1)/2 p^2)^i`.
pub fn branching_experiment(
    n: u32,
    p: f64,
    i_max: u32,
    trials: u64,
    seed: u64,
) -> Result<Vec<BranchingRow>> {
    if !(1..=6).contains(&n) {
        return Err(Error::guard(format!(
            "dimension n must lie in 1..=6, got {n}"
        )));
    }
    if i_max > 6 {
        return Err(Error::guard(format!("i_max is capped at 6, got {i_max}")));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial".to_string()));
    }
    let master = LatentBits::new(seed, p)?;
    let dim = n as usize;
    let hit_counts: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let bits = master.with_stream(trial);
            let z = |chan: u64, coords: &[u16]| {
                let mut key = [0u64; 8];
                key[0] = chan;
                for (slot, &c) in key[1..].iter_mut().zip(coords) {
                    *slot = c as u64;
                }
                bits.bit(&key[..dim + 1])
            };
            let mut reached = vec![0u64; i_max as usize + 1];
            reached[0] = 1;
            let mut active: Vec<Vec<u16>> = vec![vec![0; dim]];
            for level in 0..2 * i_max as usize {
                let mut next: Vec<Vec<u16>> = Vec::new();
                for u in &active {
                    if level % 2 == 0 {
                        // Even source: its whole out-fan opens together.
                        if z(channel::BLOCK_OUT, u) {
                            for j in 0..dim {
                                let mut v = u.clone();
                                v[j] += 1;
                                next.push(v);
                            }
                        }
                    } else {
                        // Odd source: each edge is opened by its even
                        // target's in-bit.
                        for j in 0..dim {
                            let mut v = u.clone();
                            v[j] += 1;
                            if z(channel::BLOCK_IN, &v) {
                                next.push(v);
                            }
                        }
                    }
                }
                next.sort_unstable();
                next.dedup();
                active = next;
                if active.is_empty() {
                    break;
                }
                if (level + 1) % 2 == 0 {
                    reached[(level + 1) >> 1] = 1;
                }
            }
            reached
        })
        .reduce(
            || vec![0u64; i_max as usize + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(hit_counts
        .iter()
        .enumerate()
        .map(|(i, &hits)| BranchingRow {
            i: i as u32,
            hits,
            empirical: hits as f64 / trials as f64,
            bound: branching_bound_formula(n, p, i as u32),
        })
        .collect())
}

/// Levelwise-independent kernels available on the d-ary tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKernel {
    /// Independent Bernoulli(p) edges.
    Product,
    /// Even-level out-fans open together; odd-level edges open per target.
    SiblingBlock,
}

impl std::str::FromStr for TreeKernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(TreeKernel::Product),
            "sibling-block" => Ok(TreeKernel::SiblingBlock),
            other => Err(Error::invalid(format!(
                "unknown tree kernel {other:?}; expected product or sibling-block"
            ))),
        }
    }
}

/// Sample moments of the flow-weighted count of connected depth-n vertices.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TreeMomentReport {
    pub d: u32,
    pub p: f64,
    pub depth: u32,
    pub trials: u64,
    pub kernel: TreeKernel,
    /// Sample mean of `X = |connected level-n vertices| / (d p)^n`; the
    /// uniform unit flow makes its expectation exactly 1 for levelwise
    /// independent kernels.
    pub mean_x: f64,
    /// Sample mean of `X^2`.
    pub second_moment: f64,
    /// Flow used for the weighting; only the uniform flow is built in.
    pub flow: &'static str,
}

/// Simulate a levelwise-independent kernel on the d-ary tree and return the
/// first two sample moments of the flow-weighted connected count. No
/// depletion is applied: for these kernels the root-to-vertex connection
/// probability is exactly `p^depth` already.
pub fn tree_moments(
    d: u32,
    p: f64,
    depth: u32,
    trials: u64,
    seed: u64,
    kernel: TreeKernel,
) -> Result<TreeMomentReport> {
    if d < 2 {
        return Err(Error::invalid(format!("arity d must be >= 2, got {d}")));
    }
    if (d as f64).powi(depth as i32) > 1e6 {
        return Err(Error::guard(format!(
            "d^depth must stay <= 1e6, got {d}^{depth}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial".to_string()));
    }
    let master = LatentBits::new(seed, p)?;
    let weight = (d as f64 * p).powi(depth as i32);
    let xs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let bits = master.with_stream(trial);
            let mut active: Vec<u64> = vec![0];
            for layer in 0..depth as u64 {
                let mut next = Vec::with_capacity(active.len());
                for &u in &active {
                    match kernel {
                        TreeKernel::Product => {
                            for c in 0..d as u64 {
                                let child = u * d as u64 + c;
                                if bits.bit(&[channel::TREE_EDGE, layer, child]) {
                                    next.push(child);
                                }
                            }
                        }
                        TreeKernel::SiblingBlock => {
                            if layer.is_multiple_of(2) {
                                if bits.bit(&[channel::BLOCK_OUT, layer, u]) {
                                    for c in 0..d as u64 {
                                        next.push(u * d as u64 + c);
                                    }
                                }
                            } else {
                                for c in 0..d as u64 {
                                    let child = u * d as u64 + c;
                                    if bits.bit(&[channel::BLOCK_IN, layer + 1, child]) {
                                        next.push(child);
                                    }
                                }
                            }
                        }
                    }
                }
                active = next;
                if active.is_empty() {
                    break;
                }
            }
            if active.is_empty() {
                0.0
            } else {
                active.len() as f64 / weight
            }
        })
        .collect();
    // Fixed-order reduction keeps reruns byte-identical.
    let mean_x = xs.iter().sum::<f64>() / trials as f64;
    let second_moment = xs.iter().map(|x| x * x).sum::<f64>() / trials as f64;
    Ok(TreeMomentReport {
        d,
        p,
        depth,
        trials,
        kernel,
        mean_x,
        second_moment,
        flow: "uniform",
    })
}

/// One row of the exact survival table (half-width 20).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExactTableRow {
    pub p0: f64,
    pub q_long: f64,
    pub q_square: f64,
    pub p1: f64,
}

/// Exact survival table at `w = 20`: long rectangle and square factors and
/// the renormalized marginal, for the two reference marginals.
pub fn exact_survival_table() -> Result<Vec<ExactTableRow>> {
    const W: usize = 20;
    [0.767f64, 0.77]
        .iter()
        .map(|&p0| {
            let (q_long, q_square) = survival_pair(p0, W)?;
            Ok(ExactTableRow {
                p0,
                q_long,
                q_square,
                p1: q_long * q_square,
            })
        })
        .collect()
}

/// One row of the Monte Carlo survival table (half-width 50).
#[derive(Clone, Debug, Serialize)]
pub struct McTableRow {
    pub p0: f64,
    pub long: McEstimate,
    pub square: McEstimate,
    /// Product of the lower confidence bounds.
    pub p1_low: f64,
    /// Product of the upper confidence bounds.
    pub p1_high: f64,
}

/// Monte Carlo survival table at `w = 50` with exact confidence intervals.
pub fn mc_survival_table(trials: u64, seed: u64, confidence: f64) -> Result<Vec<McTableRow>> {
    const W: usize = 50;
    [0.76f64, 0.77]
        .iter()
        .enumerate()
        .map(|(row, &p0)| {
            let long = mc_survival(
                W,
                W + 1,
                p0,
                trials,
                derive_seed(seed, 2 * row as u64),
                confidence,
            )?;
            let square = mc_survival(
                W,
                0,
                p0,
                trials,
                derive_seed(seed, 2 * row as u64 + 1),
                confidence,
            )?;
            Ok(McTableRow {
                p0,
                p1_low: long.ci_low * square.ci_low,
                p1_high: long.ci_high * square.ci_high,
                long,
                square,
            })
        })
        .collect()
}
