//! The lower-bound level chain.
//!
//! States are finite level subsets. From a subset `W` the chain moves to a
//! random subset of the in-box successors of `W`, independently interval by
//! interval. For a maximal interval of length `len` whose successor span is
//! full (`len + 1` columns):
//!
//! * the empty successor set has probability `(1 - p)^len`,
//! * the span's rightmost column *alone* has probability zero,
//! * every other subset `S` of the span has the product probability
//!   `p^|S| (1 - p)^(span - |S|)`.
//!
//! Truncated spans (an even-level interval touching the box boundary) get the
//! plain product law on their span. The full row for a multi-interval state
//! is the product over intervals.
//!
//! The same transition law is realized as a coordinatewise-increasing
//! function of i.i.d. Bernoulli(p) vertex bits: an interval with a full span
//! yields the empty set when every bit outside the span's rightmost column is
//! zero, and otherwise yields exactly the set of 1-bits. That construction
//! drives the Monte Carlo sampler and every monotone coupling in the crate.

use crate::error::{Error, Result};
use crate::geometry::{interval_successors, BoxGeometry, LevelSubset};
use crate::latent::LatentBits;

/// Row-enumeration guard: explicit transition rows are only materialized for
/// sources of at most this width.
pub const MAX_ROW_WIDTH: usize = 20;

/// One row of the transition kernel: the distribution of the next level
/// subset given `source`.
#[derive(Clone, Debug)]
pub struct TransitionRow {
    source: LevelSubset,
    target_width: usize,
    target_level: usize,
    entries: Vec<(u64, f64)>,
}

impl TransitionRow {
    /// Source state.
    pub fn source(&self) -> &LevelSubset {
        &self.source
    }

    /// Width of the successor level.
    pub fn target_width(&self) -> usize {
        self.target_width
    }

    /// Index of the successor level.
    pub fn target_level(&self) -> usize {
        self.target_level
    }

    /// Entries `(bits, probability)`, sorted by bits. Only subsets of the
    /// successor set appear.
    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    /// Probability of a specific successor bitmask.
    pub fn prob_of(&self, bits: u64) -> f64 {
        match self.entries.binary_search_by_key(&bits, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    /// Sum of all entries (should be 1 up to rounding).
    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// Per-interval factor of the transition row, as local (mask, prob) pairs
/// with masks already positioned at the span's columns.
fn interval_row(
    interval: crate::geometry::Interval,
    level: usize,
    geom: &BoxGeometry,
    p: f64,
) -> Result<Vec<(u64, f64)>> {
    let span = interval_successors(interval, level, geom)?;
    let n = span.width();
    let q = 1.0 - p;
    let mut out = Vec::with_capacity(1 << n);
    for s in 0u64..(1 << n) {
        let ones = s.count_ones() as i32;
        let mut prob = p.powi(ones) * q.powi(n as i32 - ones);
        if span.full {
            if s == 0 {
                // All the mass of "rightmost alone" collapses onto the empty
                // set: (1-p)^len instead of (1-p)^(len+1).
                prob = q.powi(interval.len as i32);
            } else if s == 1 << (n - 1) {
                prob = 0.0;
            }
        }
        out.push((s << span.start, prob));
    }
    Ok(out)
}

/// Exact transition row out of `subset` at parameter `p`.
pub fn transition_prob(subset: &LevelSubset, geom: &BoxGeometry, p: f64) -> Result<TransitionRow> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    if subset.width() > MAX_ROW_WIDTH {
        return Err(Error::guard(format!(
            "row enumeration is limited to widths <= {MAX_ROW_WIDTH}, got {}",
            subset.width()
        )));
    }
    let level = subset.level_index();
    if level + 1 >= geom.num_levels() {
        return Err(Error::invalid("source sits on the top level".to_string()));
    }

    // Product over the per-interval factors; spans are disjoint, so the
    // convolution is a plain cross product of masks.
    let mut entries: Vec<(u64, f64)> = vec![(0, 1.0)];
    for interval in subset.intervals() {
        let factor = interval_row(interval, level, geom, p)?;
        let mut next = Vec::with_capacity(entries.len() * factor.len());
        for &(mask, prob) in &entries {
            for &(fmask, fprob) in &factor {
                next.push((mask | fmask, prob * fprob));
            }
        }
        entries = next;
    }
    entries.sort_unstable_by_key(|e| e.0);

    Ok(TransitionRow {
        source: *subset,
        target_width: geom.level_width(level + 1),
        target_level: level + 1,
        entries,
    })
}

/// One step of the monotone construction with an arbitrary bit source for the
/// successor level's columns. Shared by the seeded sampler and the
/// brute-force enumeration oracle.
pub fn monotone_step_with(
    subset: &LevelSubset,
    geom: &BoxGeometry,
    mut bit: impl FnMut(usize) -> bool,
) -> Result<LevelSubset> {
    let level = subset.level_index();
    if level + 1 >= geom.num_levels() {
        return Err(Error::invalid("subset sits on the top level".to_string()));
    }
    let mut out = 0u64;
    for interval in subset.intervals() {
        let span = interval_successors(interval, level, geom)?;
        let mut drawn = 0u64;
        for col in span.start..=span.end {
            if bit(col) {
                drawn |= 1 << col;
            }
        }
        if span.full && drawn & !(1 << span.end) == 0 {
            // Every column except the span's rightmost came up zero: the
            // interval dies regardless of the rightmost bit.
            continue;
        }
        out |= drawn;
    }
    LevelSubset::new(geom.level_width(level + 1), out, level + 1)
}

/// Sample the next state from the seeded bit field. Distributed according to
/// [`transition_prob`] at `bits.p()`, and coordinatewise increasing in the
/// bits of the successor columns.
pub fn sample_next(
    subset: &LevelSubset,
    geom: &BoxGeometry,
    bits: &LatentBits,
) -> Result<LevelSubset> {
    let next_level = subset.level_index() + 1;
    monotone_step_with(subset, geom, |col| bits.vertex_bit(next_level, col))
}

/// Run the chain from `initial` (on level 0) to the top of the box. The empty
/// set is absorbing. Returns one subset per level.
pub fn run_chain(
    initial: &LevelSubset,
    geom: &BoxGeometry,
    bits: &LatentBits,
) -> Result<Vec<LevelSubset>> {
    if initial.level_index() != 0 {
        return Err(Error::invalid("chain must start on level 0".to_string()));
    }
    if initial.width() != geom.level_width(0) {
        return Err(Error::invalid(format!(
            "initial width {} does not match level 0 width {}",
            initial.width(),
            geom.level_width(0)
        )));
    }
    let mut trajectory = Vec::with_capacity(geom.num_levels());
    trajectory.push(*initial);
    let mut current = *initial;
    for _ in 1..geom.num_levels() {
        current = sample_next(&current, geom, bits)?;
        trajectory.push(current);
    }
    Ok(trajectory)
}

/// Whether a trajectory survived to the top of its box.
pub fn survives(trajectory: &[LevelSubset]) -> bool {
    trajectory.last().map(|s| !s.is_empty()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxGeometry;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Brute-force one-step law from the monotone construction: enumerate all
    /// bit assignments on the successor level.
    fn one_step_law_by_bits(subset: &LevelSubset, geom: &BoxGeometry, p: f64) -> Vec<(u64, f64)> {
        let next_width = geom.level_width(subset.level_index() + 1);
        let mut law = std::collections::BTreeMap::new();
        for assigned in 0u64..(1 << next_width) {
            let ones = assigned.count_ones() as i32;
            let weight = p.powi(ones) * (1.0 - p).powi(next_width as i32 - ones);
            let next = monotone_step_with(subset, geom, |col| assigned >> col & 1 == 1).unwrap();
            *law.entry(next.bits()).or_insert(0.0) += weight;
        }
        law.into_iter().collect()
    }

    #[test]
    fn empty_source_is_absorbing() {
        let geom = BoxGeometry::new(2, 1).unwrap();
        let empty = LevelSubset::new(3, 0, 0).unwrap();
        let row = transition_prob(&empty, &geom, 0.37).unwrap();
        assert_eq!(row.entries(), &[(0, 1.0)]);
    }

    #[test]
    fn single_vertex_with_full_span() {
        // Odd-level singleton: two successors, rightmost-alone forbidden.
        let geom = BoxGeometry::new(1, 0).unwrap();
        let single = LevelSubset::new(1, 0b1, 1).unwrap();
        let row = transition_prob(&single, &geom, 0.5).unwrap();
        assert!(approx(row.prob_of(0b00), 0.5, 1e-15));
        assert!(approx(row.prob_of(0b01), 0.25, 1e-15)); // left successor alone
        assert!(approx(row.prob_of(0b10), 0.0, 1e-15)); // rightmost alone
        assert!(approx(row.prob_of(0b11), 0.25, 1e-15));
    }

    #[test]
    fn truncated_interval_gets_product_law() {
        // Full even level of width 2 has a single in-box successor.
        let geom = BoxGeometry::new(1, 0).unwrap();
        let full = LevelSubset::new(2, 0b11, 0).unwrap();
        let row = transition_prob(&full, &geom, 0.5).unwrap();
        assert!(approx(row.prob_of(0b0), 0.5, 1e-15));
        assert!(approx(row.prob_of(0b1), 0.5, 1e-15));
    }

    #[test]
    fn rows_match_monotone_construction() {
        let geom = BoxGeometry::new(3, 2).unwrap();
        for level in 0..4 {
            let width = geom.level_width(level);
            for bits in 0..(1u64 << width) {
                let subset = LevelSubset::new(width, bits, level).unwrap();
                for &p in &[0.2, 0.5, 0.77] {
                    let row = transition_prob(&subset, &geom, p).unwrap();
                    let law = one_step_law_by_bits(&subset, &geom, p);
                    for (mask, prob) in law {
                        assert!(
                            approx(row.prob_of(mask), prob, 1e-12),
                            "bits={bits:#b} level={level} p={p} mask={mask:#b}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn row_sums_at_the_widest_tested_levels() {
        // Even levels of width 12 (w = 11) and odd levels of width 12 (w = 12).
        for (w, level) in [(11usize, 0usize), (12, 1)] {
            let geom = BoxGeometry::new(w, 1).unwrap();
            let width = geom.level_width(level);
            assert_eq!(width, 12);
            for bits in 0..(1u64 << width) {
                let subset = LevelSubset::new(width, bits, level).unwrap();
                for &p in &[0.1, 0.5, 0.9] {
                    let row = transition_prob(&subset, &geom, p).unwrap();
                    assert!(
                        (row.total_mass() - 1.0).abs() < 1e-12,
                        "width 12 bits {bits:#b} p {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn row_enumeration_guard_trips() {
        let geom = BoxGeometry::new(21, 1).unwrap();
        let wide = LevelSubset::new(22, 1, 0).unwrap();
        assert!(matches!(
            transition_prob(&wide, &geom, 0.5),
            Err(crate::Error::Guard(_))
        ));
    }

    #[test]
    fn row_sums_and_support() {
        let geom = BoxGeometry::new(4, 2).unwrap();
        for level in 0..3 {
            let width = geom.level_width(level);
            for bits in 0..(1u64 << width) {
                let subset = LevelSubset::new(width, bits, level).unwrap();
                let succ = subset.successors(&geom).unwrap().bits();
                for &p in &[0.1, 0.5, 0.9] {
                    let row = transition_prob(&subset, &geom, p).unwrap();
                    assert!(approx(row.total_mass(), 1.0, 1e-12));
                    for &(mask, prob) in row.entries() {
                        assert!((0.0..=1.0 + 1e-15).contains(&prob));
                        if prob > 0.0 {
                            assert_eq!(mask & !succ, 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn multi_interval_row_is_product_of_interval_rows() {
        let geom = BoxGeometry::new(7, 1).unwrap();
        // Two intervals on the even bottom level: [1,2] and [5].
        let subset = LevelSubset::new(8, 0b0010_0110, 0).unwrap();
        let whole = transition_prob(&subset, &geom, 0.6).unwrap();
        let left =
            transition_prob(&LevelSubset::new(8, 0b0000_0110, 0).unwrap(), &geom, 0.6).unwrap();
        let right =
            transition_prob(&LevelSubset::new(8, 0b0010_0000, 0).unwrap(), &geom, 0.6).unwrap();
        for &(mask, prob) in whole.entries() {
            let lm = mask & left.source().successors(&geom).unwrap().bits();
            let rm = mask & right.source().successors(&geom).unwrap().bits();
            assert!(
                approx(prob, left.prob_of(lm) * right.prob_of(rm), 1e-12),
                "mask={mask:#b}"
            );
        }
    }

    #[test]
    fn sampler_extremes() {
        let geom = BoxGeometry::new(3, 1).unwrap();
        let subset = LevelSubset::new(4, 0b1011, 0).unwrap();
        let all_ones = LatentBits::new(3, 1.0).unwrap();
        let next = sample_next(&subset, &geom, &all_ones).unwrap();
        assert_eq!(next.bits(), subset.successors(&geom).unwrap().bits());
        let all_zeros = LatentBits::new(3, 0.0).unwrap();
        assert!(sample_next(&subset, &geom, &all_zeros).unwrap().is_empty());
    }

    #[test]
    fn sampler_monotone_in_single_bit_flip() {
        let geom = BoxGeometry::new(4, 1).unwrap();
        let subset = LevelSubset::new(5, 0b11011, 0).unwrap();
        let width = geom.level_width(1);
        for assigned in 0u64..(1 << width) {
            let base = monotone_step_with(&subset, &geom, |c| assigned >> c & 1 == 1).unwrap();
            for flip in 0..width {
                if assigned >> flip & 1 == 1 {
                    continue;
                }
                let raised = assigned | (1 << flip);
                let bigger = monotone_step_with(&subset, &geom, |c| raised >> c & 1 == 1).unwrap();
                assert_eq!(base.bits() & !bigger.bits(), 0);
            }
        }
    }

    #[test]
    fn chain_is_absorbing_and_full_at_p_one() {
        let geom = BoxGeometry::new(2, 1).unwrap();
        let bits = LatentBits::new(11, 0.5).unwrap();
        let empty = LevelSubset::new(3, 0, 0).unwrap();
        let traj = run_chain(&empty, &geom, &bits).unwrap();
        assert!(traj.iter().all(|s| s.is_empty()));

        let ones = LatentBits::new(11, 1.0).unwrap();
        let full = geom.full_bottom();
        let traj = run_chain(&full, &geom, &ones).unwrap();
        for (i, s) in traj.iter().enumerate() {
            assert_eq!(s.bits(), (1u64 << geom.level_width(i)) - 1);
        }
    }

    #[test]
    fn survival_frequency_small_box() {
        // Exact survival for (w=1, ell=0, p=0.5) is p^2 = 1/4.
        let geom = BoxGeometry::new(1, 0).unwrap();
        let master = LatentBits::new(2024, 0.5).unwrap();
        let trials = 200_000u64;
        let full = geom.full_bottom();
        let hits = (0..trials)
            .filter(|&t| {
                let bits = master.with_stream(t);
                survives(&run_chain(&full, &geom, &bits).unwrap())
            })
            .count() as f64;
        let freq = hits / trials as f64;
        assert!((freq - 0.25).abs() < 0.004, "freq={freq}");
    }
}
