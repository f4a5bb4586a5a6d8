//! Exact transfer-matrix computation of the level chain's distribution.
//!
//! The chain's law on a diagonal box is computed level by level, one target
//! column at a time. The augmented state for a sweep is the occupancy of
//! `w + 1` columns (a mix of the current and the next level) together with a
//! one-bit flag recording whether the interval currently being swept has
//! already placed an open vertex on the next level. Sweeping a column
//! redistributes the mass of every state across at most two successor
//! states, so a full survival computation costs `O(w * ell * 2^w)` updates
//! on a dense vector of `2^(w+2)` probabilities.
//!
//! Encoding: state index = occupancy shifted left by one, flag in bit 0.
//! Column `j` of the sweep occupies index bit `j + 1`. The flag is set at
//! the start of every level; that convention is what suppresses the
//! "rightmost successor alone is forbidden" rule for intervals whose
//! successor span is truncated by the left box boundary, and it is inert
//! everywhere else because the first column of an interval resets it.

use crate::error::{Error, Result};

/// Largest half-width for exact computation: the dense state vector has
/// `2^(w+2)` entries.
pub const MAX_DP_WIDTH: usize = 24;

/// Which kind of level a sweep runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// Source level of width `w + 1`; sweep columns `0..w`.
    Even,
    /// Source level of width `w` (stored shifted up by one); sweep columns
    /// `0..=w`, the last one reachable from a single parent.
    Odd,
}

/// Augmented sweep state: column occupancy plus the interval flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DpState {
    /// Occupancy of the `w + 1` sweep columns, bit `j` = column `j`.
    pub occupancy: u64,
    /// True when the interval under the sweep head has already placed an
    /// open vertex on the next level (or is continuing through the left
    /// boundary convention).
    pub run_seeded: bool,
}

impl DpState {
    /// Dense-vector index of this state.
    pub fn encode(&self, w: usize) -> Result<usize> {
        if self.occupancy >> (w + 1) != 0 {
            return Err(Error::invalid(format!(
                "occupancy {:#b} exceeds {} columns",
                self.occupancy,
                w + 1
            )));
        }
        Ok(((self.occupancy as usize) << 1) | self.run_seeded as usize)
    }

    /// Inverse of [`DpState::encode`].
    pub fn decode(index: usize) -> DpState {
        DpState {
            occupancy: (index >> 1) as u64,
            run_seeded: index & 1 == 1,
        }
    }
}

/// Dense probability vector over all augmented states of one sweep.
#[derive(Clone, Debug)]
pub struct LevelDistribution {
    w: usize,
    probs: Vec<f64>,
}

impl LevelDistribution {
    /// All-zero vector (not a distribution yet).
    pub fn zero(w: usize) -> Result<Self> {
        check_width(w)?;
        Ok(LevelDistribution {
            w,
            probs: vec![0.0; 1 << (w + 2)],
        })
    }

    /// Point mass on one augmented state.
    pub fn point_mass(w: usize, state: DpState) -> Result<Self> {
        let mut dist = LevelDistribution::zero(w)?;
        dist.probs[state.encode(w)?] = 1.0;
        Ok(dist)
    }

    /// Half-width this vector is sized for.
    pub fn w(&self) -> usize {
        self.w
    }

    /// Probability of one augmented state.
    pub fn prob(&self, state: DpState) -> Result<f64> {
        Ok(self.probs[state.encode(self.w)?])
    }

    /// Raw dense vector, indexed by [`DpState::encode`].
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total mass.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Marginal law of the lowest `num_cols` occupancy columns, flag and
    /// higher columns summed out.
    pub fn occupancy_marginal(&self, num_cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; 1 << num_cols];
        let mask = (1usize << num_cols) - 1;
        for (idx, &m) in self.probs.iter().enumerate() {
            out[(idx >> 1) & mask] += m;
        }
        out
    }
}

fn check_width(w: usize) -> Result<()> {
    if w == 0 {
        return Err(Error::invalid("half-width w must be >= 1".to_string()));
    }
    if w > MAX_DP_WIDTH {
        return Err(Error::guard(format!(
            "exact computation is limited to w <= {MAX_DP_WIDTH} (2^(w+2) state vector), got {w}"
        )));
    }
    Ok(())
}

/// Mass redistribution table for one column step: each input state
/// contributes `c1 * m` to `state ^ x1` and `c2 * m` to `state ^ x2`,
/// selected by (flag, column bit, next column bit).
#[derive(Clone, Copy)]
struct StepRule {
    x1: usize,
    c1: f64,
    x2: usize,
    c2: f64,
}

fn step_table(w: usize, t: usize, p: f64) -> [StepRule; 8] {
    let q = 1.0 - p;
    let col = 1usize << (t + 1);
    let flag = 1usize;
    debug_assert!(t <= w);
    let pass = StepRule {
        x1: 0,
        c1: 1.0,
        x2: 0,
        c2: 0.0,
    };
    [
        // flag clear, column clear, next clear: nothing reachable here.
        pass,
        // flag set, column clear: gap under the head, flag resets.
        StepRule {
            x1: flag,
            c1: 1.0,
            x2: 0,
            c2: 0.0,
        },
        // flag clear, column set, next clear: the interval ends with no open
        // vertex placed, so its rightmost successor is forced closed.
        StepRule {
            x1: col,
            c1: 1.0,
            x2: 0,
            c2: 0.0,
        },
        // flag set, column set: interval already seeded, plain Bernoulli.
        StepRule {
            x1: 0,
            c1: p,
            x2: col,
            c2: q,
        },
        // flag clear, column clear, next set: fresh interval starts above.
        StepRule {
            x1: col | flag,
            c1: p,
            x2: 0,
            c2: q,
        },
        // flag set, column clear, next set: fresh interval after a gap.
        StepRule {
            x1: col,
            c1: p,
            x2: flag,
            c2: q,
        },
        // flag clear, column set, next set: unseeded interval continues.
        StepRule {
            x1: flag,
            c1: p,
            x2: col,
            c2: q,
        },
        // flag set, column set, next set: same as the seeded case.
        StepRule {
            x1: 0,
            c1: p,
            x2: col,
            c2: q,
        },
    ]
}

/// One column step on raw vectors. `dst` must be zeroed. Bit `t + 2` of an
/// index is zero whenever it lies beyond the state space, which is exactly
/// the modified final-column behaviour of odd sweeps.
fn column_step_into(src: &[f64], dst: &mut [f64], w: usize, t: usize, p: f64) {
    let table = step_table(w, t, p);
    for (s, &m) in src.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let rule = &table[(s & 1) | ((s >> t) & 6)];
        dst[s ^ rule.x1] += rule.c1 * m;
        dst[s ^ rule.x2] += rule.c2 * m;
    }
}

/// Reindex after an even sweep: columns `0..w` hold the new odd level, which
/// moves up one slot behind a zero guard column, and the flag is set.
fn even_to_odd_into(src: &[f64], dst: &mut [f64], w: usize) {
    let keep = ((1usize << w) - 1) << 1; // index bits of columns 0..w-1
    for (s, &m) in src.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        dst[((s & keep) << 1) | 1] += m;
    }
}

/// Reindex after an odd sweep: all `w + 1` columns hold the new even level;
/// only the flag resets.
fn odd_to_even_into(src: &[f64], dst: &mut [f64]) {
    for (s, &m) in src.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        dst[s | 1] += m;
    }
}

/// One column step of the sweep, as a checked operation on distributions.
pub fn dp_column_step(
    dist: &LevelDistribution,
    t: usize,
    parity: Parity,
    p: f64,
    is_last_odd_column: bool,
) -> Result<LevelDistribution> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    let w = dist.w;
    match parity {
        Parity::Even => {
            if t >= w {
                return Err(Error::invalid(format!(
                    "even sweep column {t} out of range 0..{w}"
                )));
            }
            if is_last_odd_column {
                return Err(Error::invalid(
                    "is_last_odd_column only applies to odd sweeps".to_string(),
                ));
            }
        }
        Parity::Odd => {
            if t > w {
                return Err(Error::invalid(format!(
                    "odd sweep column {t} out of range 0..={w}"
                )));
            }
            if is_last_odd_column != (t == w) {
                return Err(Error::invalid(format!(
                    "is_last_odd_column must be set exactly at t = {w}"
                )));
            }
        }
    }
    let mut out = LevelDistribution::zero(w)?;
    column_step_into(&dist.probs, &mut out.probs, w, t, p);
    Ok(out)
}

/// Exact survival probability of the level chain across the `(w, ell)` box,
/// started from a fully occupied bottom level. Deterministic: a fixed sweep
/// order gives bit-identical results across runs.
pub fn exact_survival(w: usize, ell: usize, p: f64) -> Result<f64> {
    check_width(w)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    let n = 1usize << (w + 2);
    let mut a = vec![0.0f64; n];
    let mut b = vec![0.0f64; n];
    let full = DpState {
        occupancy: (1u64 << (w + 1)) - 1,
        run_seeded: true,
    };
    a[full.encode(w).expect("full state fits")] = 1.0;

    for level in 0..2 * (ell + w) {
        if level % 2 == 0 {
            for t in 0..w {
                b.fill(0.0);
                column_step_into(&a, &mut b, w, t, p);
                std::mem::swap(&mut a, &mut b);
            }
            b.fill(0.0);
            even_to_odd_into(&a, &mut b, w);
            std::mem::swap(&mut a, &mut b);
        } else {
            for t in 0..=w {
                b.fill(0.0);
                column_step_into(&a, &mut b, w, t, p);
                std::mem::swap(&mut a, &mut b);
            }
            b.fill(0.0);
            odd_to_even_into(&a, &mut b);
            std::mem::swap(&mut a, &mut b);
        }
    }

    // Mass on states with a nonempty occupancy.
    Ok(a.iter()
        .enumerate()
        .filter(|&(s, _)| s >> 1 != 0)
        .map(|(_, &m)| m)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_extremes_on_even_step() {
        let full = DpState {
            occupancy: 0b11,
            run_seeded: true,
        };
        let dist = LevelDistribution::point_mass(1, full).unwrap();

        let open = dp_column_step(&dist, 0, Parity::Even, 1.0, false).unwrap();
        assert_eq!(open.prob(full).unwrap(), 1.0);

        // At p = 0 the column closes; the flag stays set inside the
        // boundary-touching run so the remaining columns keep the product
        // law of a truncated successor span.
        let closed = dp_column_step(&dist, 0, Parity::Even, 0.0, false).unwrap();
        let expect = DpState {
            occupancy: 0b10,
            run_seeded: true,
        };
        assert_eq!(closed.prob(expect).unwrap(), 1.0);
        assert!((closed.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn even_sweep_reproduces_next_level_law() {
        // From the full bottom level of the (w=1, ell=0) box, the next level
        // is {empty: 1/2, middle: 1/2} at p = 1/2.
        let full = DpState {
            occupancy: 0b11,
            run_seeded: true,
        };
        let mut dist = LevelDistribution::point_mass(1, full).unwrap();
        dist = dp_column_step(&dist, 0, Parity::Even, 0.5, false).unwrap();
        let marginal = dist.occupancy_marginal(1);
        assert!((marginal[0] - 0.5).abs() < 1e-15);
        assert!((marginal[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mass_is_conserved_by_every_column_step() {
        let w = 3;
        for parity in [Parity::Even, Parity::Odd] {
            let cols = if parity == Parity::Even { w } else { w + 1 };
            for t in 0..cols {
                for idx in 0..(1usize << (w + 2)) {
                    let dist = LevelDistribution::point_mass(w, DpState::decode(idx)).unwrap();
                    let out =
                        dp_column_step(&dist, t, parity, 0.37, parity == Parity::Odd && t == w)
                            .unwrap();
                    assert!(
                        (out.total_mass() - 1.0).abs() < 1e-12,
                        "mass leak at parity {parity:?} t={t} state={idx}"
                    );
                }
            }
        }
    }

    #[test]
    fn column_step_rejects_out_of_range() {
        let dist = LevelDistribution::zero(2).unwrap();
        assert!(dp_column_step(&dist, 2, Parity::Even, 0.5, false).is_err());
        assert!(dp_column_step(&dist, 3, Parity::Odd, 0.5, true).is_err());
        assert!(dp_column_step(&dist, 2, Parity::Odd, 0.5, false).is_err());
        assert!(dp_column_step(&dist, 1, Parity::Odd, 0.5, true).is_err());
    }

    #[test]
    fn survival_extremes_and_tiny_box() {
        assert_eq!(exact_survival(3, 2, 1.0).unwrap(), 1.0);
        assert_eq!(exact_survival(3, 2, 0.0).unwrap(), 0.0);
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let q = exact_survival(1, 0, p).unwrap();
            assert!((q - p * p).abs() < 1e-12, "p={p}: q={q}");
        }
    }

    #[test]
    fn survival_guards() {
        assert!(exact_survival(0, 0, 0.5).is_err());
        assert!(exact_survival(25, 0, 0.5).is_err());
        assert!(exact_survival(3, 0, 1.5).is_err());
    }

    #[test]
    fn survival_monotone_in_length() {
        for ell in 0..4 {
            let longer = exact_survival(3, ell + 1, 0.7).unwrap();
            let shorter = exact_survival(3, ell, 0.7).unwrap();
            assert!(longer <= shorter + 1e-12);
        }
    }

    #[test]
    fn survival_deterministic() {
        let a = exact_survival(5, 3, 0.77).unwrap();
        let b = exact_survival(5, 3, 0.77).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
