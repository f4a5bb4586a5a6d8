//! Property tests for the structural invariants that hold at every width.

use depperc::geometry::{BoxGeometry, LevelSubset};
use depperc::{chain, transition_prob};
use proptest::prelude::*;

proptest! {
    /// Maximal intervals are disjoint, separated by gaps, and reassemble
    /// the subset exactly.
    #[test]
    fn interval_decomposition_roundtrip(width in 1usize..=32, raw in any::<u64>()) {
        let bits = raw & ((1u64 << width) - 1);
        let subset = LevelSubset::new(width, bits, 0).unwrap();
        let intervals = subset.intervals();
        let mut rebuilt = 0u64;
        let mut last_end: Option<usize> = None;
        for interval in &intervals {
            prop_assert!(interval.len >= 1);
            if let Some(end) = last_end {
                prop_assert!(interval.start > end + 1, "intervals not maximal");
            }
            let mask = ((1u64 << interval.len) - 1) << interval.start;
            prop_assert_eq!(rebuilt & mask, 0);
            rebuilt |= mask;
            last_end = Some(interval.end());
        }
        prop_assert_eq!(rebuilt, bits);
    }

    /// Transition rows are probability distributions supported on subsets
    /// of the successor set.
    #[test]
    fn transition_rows_normalize(
        w in 1usize..=6,
        level in 0usize..=3,
        raw in any::<u64>(),
        p in 0.0f64..=1.0,
    ) {
        let geom = BoxGeometry::new(w, 2).unwrap();
        let width = geom.level_width(level);
        let bits = raw & ((1u64 << width) - 1);
        let subset = LevelSubset::new(width, bits, level).unwrap();
        let row = transition_prob(&subset, &geom, p).unwrap();
        prop_assert!((row.total_mass() - 1.0).abs() < 1e-12);
        let succ = subset.successors(&geom).unwrap().bits();
        for &(mask, prob) in row.entries() {
            if prob > 0.0 {
                prop_assert_eq!(mask & !succ, 0);
            }
        }
    }

    /// The sampled step lands inside the successor set, and raising any
    /// single latent bit never removes a vertex from the output.
    #[test]
    fn sampled_step_contained_and_monotone(
        w in 1usize..=6,
        level in 0usize..=2,
        raw in any::<u64>(),
        assigned in any::<u64>(),
        flip in 0usize..7,
    ) {
        let geom = BoxGeometry::new(w, 2).unwrap();
        let width = geom.level_width(level);
        let bits = raw & ((1u64 << width) - 1);
        let subset = LevelSubset::new(width, bits, level).unwrap();
        let next_width = geom.level_width(level + 1);
        let assigned = assigned & ((1u64 << next_width) - 1);
        let base = chain::monotone_step_with(&subset, &geom, |c| assigned >> c & 1 == 1).unwrap();
        prop_assert_eq!(base.bits() & !subset.successors(&geom).unwrap().bits(), 0);
        let flip = flip % next_width;
        let raised = assigned | (1u64 << flip);
        let bigger = chain::monotone_step_with(&subset, &geom, |c| raised >> c & 1 == 1).unwrap();
        prop_assert_eq!(base.bits() & !bigger.bits(), 0);
    }
}
