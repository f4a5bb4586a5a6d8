//! Diagonal-box geometry and level subsets.
//!
//! A diagonal box is a union of `ell + 1` overlapping radius-`w` diamonds
//! along the (1,1) direction of the square lattice. Oriented along that
//! direction it carries a strict level structure: `2(ell + w) + 1` levels,
//! even levels of width `w + 1` and odd levels of width `w`, with every edge
//! going from one level to the next. All chains, kernels, and transfer
//! sweeps in this crate run on this geometry.
//!
//! Columns index the vertices of a level left to right (increasing first
//! lattice coordinate) after rotating the box upright. The adjacency is then
//!
//! * odd column `j` is reached from even columns `j` and `j + 1` below,
//! * even column `j` is reached from odd columns `j - 1` and `j` below,
//!
//! truncated at the box boundary.

use crate::error::{Error, Result};

/// Widest level representable in one machine word.
pub const MAX_WIDTH: usize = 63;

/// Diagonal box parameters with derived level structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxGeometry {
    w: usize,
    ell: usize,
}

impl BoxGeometry {
    /// A box with half-width `w >= 1` and length `ell >= 0`.
    pub fn new(w: usize, ell: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::invalid(
                "half-width w must be >= 1 (odd levels would be empty)",
            ));
        }
        if w + 1 > MAX_WIDTH {
            return Err(Error::guard(format!(
                "half-width w = {w} exceeds the one-word level cap {}",
                MAX_WIDTH - 1
            )));
        }
        Ok(BoxGeometry { w, ell })
    }

    /// Half-width `w`.
    pub fn w(&self) -> usize {
        self.w
    }

    /// Box length `ell`.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Total number of levels, `2(ell + w) + 1`.
    pub fn num_levels(&self) -> usize {
        2 * (self.ell + self.w) + 1
    }

    /// Width of level `i`: `w + 1` on even levels, `w` on odd ones.
    pub fn level_width(&self, level: usize) -> usize {
        if level.is_multiple_of(2) {
            self.w + 1
        } else {
            self.w
        }
    }

    /// Fully occupied bottom level.
    pub fn full_bottom(&self) -> LevelSubset {
        LevelSubset::new(self.w + 1, (1u64 << (self.w + 1)) - 1, 0).unwrap()
    }
}

/// Level widths of the `(w, ell)` box, bottom to top.
pub fn box_levels(w: usize, ell: usize) -> Result<Vec<usize>> {
    let geom = BoxGeometry::new(w, ell)?;
    Ok((0..geom.num_levels())
        .map(|i| geom.level_width(i))
        .collect())
}

/// Occupancy of one level: bit `j` set means column `j` is occupied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LevelSubset {
    width: usize,
    bits: u64,
    level_index: usize,
}

/// A maximal run of consecutive occupied columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    /// Leftmost column of the run.
    pub start: usize,
    /// Number of columns in the run.
    pub len: usize,
}

impl Interval {
    /// Rightmost (highest-indexed) column of the run.
    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }
}

/// In-box successor set of a single interval: the columns of the next level
/// reachable from it, plus whether that set is full (one more column than the
/// interval, i.e. untruncated by the box boundary).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccessorSpan {
    /// Leftmost reachable column on the next level.
    pub start: usize,
    /// Rightmost reachable column on the next level.
    pub end: usize,
    /// True when the span has `len + 1` columns; its rightmost column is then
    /// reachable from the interval's right endpoint only.
    pub full: bool,
}

impl SuccessorSpan {
    /// Number of columns in the span (always at least one).
    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }

    /// Span as a bitmask on the next level.
    pub fn mask(&self) -> u64 {
        ((1u64 << self.width()) - 1) << self.start
    }
}

impl LevelSubset {
    /// A subset of a level of the given width. Fails if `bits` has columns
    /// beyond `width` or the width exceeds one machine word.
    pub fn new(width: usize, bits: u64, level_index: usize) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::invalid(format!(
                "level width must be in 1..={MAX_WIDTH}, got {width}"
            )));
        }
        if width < 64 && bits >> width != 0 {
            return Err(Error::invalid(format!(
                "bits {bits:#b} exceed level width {width}"
            )));
        }
        Ok(LevelSubset {
            width,
            bits,
            level_index,
        })
    }

    /// Empty subset of the same level.
    pub fn empty_like(&self) -> LevelSubset {
        LevelSubset {
            width: self.width,
            bits: 0,
            level_index: self.level_index,
        }
    }

    /// Level width.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Occupancy bitmask.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Index of the level within its box.
    pub fn level_index(&self) -> usize {
        self.level_index
    }

    /// Whether no column is occupied.
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Number of occupied columns.
    pub fn count(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Maximal runs of occupied columns, left to right.
    pub fn intervals(&self) -> Vec<Interval> {
        interval_decompose(self)
    }

    /// In-box successors on the next level of `geom`.
    pub fn successors(&self, geom: &BoxGeometry) -> Result<LevelSubset> {
        successors(self, geom)
    }
}

/// Decompose a subset into its maximal intervals, left to right.
pub fn interval_decompose(subset: &LevelSubset) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut bits = subset.bits;
    while bits != 0 {
        let start = bits.trailing_zeros() as usize;
        let len = (bits >> start).trailing_ones() as usize;
        out.push(Interval { start, len });
        if start + len >= 64 {
            break;
        }
        bits &= !(((1u64 << len) - 1) << start);
    }
    out
}

/// In-box successor span of one interval sitting on `level` of `geom`.
pub fn interval_successors(
    interval: Interval,
    level: usize,
    geom: &BoxGeometry,
) -> Result<SuccessorSpan> {
    if level + 1 >= geom.num_levels() {
        return Err(Error::invalid(format!(
            "level {level} is the top of the box; no successor level"
        )));
    }
    let w = geom.w();
    let (start, end, full) = if level.is_multiple_of(2) {
        // Even source level of width w+1; odd targets 0..w-1. Column j above
        // is reached from columns j and j+1, so the span is
        // [start-1, end] clipped to the level.
        let s = interval.start.saturating_sub(1);
        let e = interval.end().min(w - 1);
        (s, e, interval.start >= 1 && interval.end() < w)
    } else {
        // Odd source level of width w; even targets 0..w. Column j above is
        // reached from columns j-1 and j, so the span [start, end+1] always
        // fits: odd intervals are never truncated.
        (interval.start, interval.end() + 1, true)
    };
    debug_assert!(end >= start);
    Ok(SuccessorSpan { start, end, full })
}

/// In-box successors of a whole subset: the union of the per-interval spans.
/// The spans of distinct maximal intervals are disjoint.
pub fn successors(subset: &LevelSubset, geom: &BoxGeometry) -> Result<LevelSubset> {
    let level = subset.level_index;
    if level + 1 >= geom.num_levels() {
        return Err(Error::invalid(format!(
            "subset sits on the top level {level}; no successors"
        )));
    }
    debug_assert_eq!(subset.width, geom.level_width(level));
    let mut bits = 0u64;
    for interval in subset.intervals() {
        bits |= interval_successors(interval, level, geom)?.mask();
    }
    LevelSubset::new(geom.level_width(level + 1), bits, level + 1)
}
