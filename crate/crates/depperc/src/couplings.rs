//! Level kernels, monotone couplings, and a stochastic-domination checker.
//!
//! A level kernel samples the edges between two consecutive levels of a
//! diagonal box as an increasing function of i.i.d. latent bits, so every
//! kernel here is positively associated by construction, and vertex-disjoint
//! edges always use disjoint bits (1-independence). The built-in kinds:
//!
//! * `Product(p)` — every edge carries its own Bernoulli(p) bit.
//! * `SitePair(p)` — an edge is open iff a source-side and a target-side
//!   site bit are both 1; marginal `p^2`.
//! * `SiblingBlock(p)` — all outgoing edges of an even-level vertex share
//!   one bit, all incoming edges of an even-level vertex share another;
//!   marginal `p`. The strongly correlated comparison case.
//! * `TruncatedSquare(p)` — the contraction of site percolation on the
//!   truncated square lattice: each vertex has two corner sites, each shared
//!   by one perpendicular pair of its edges, and an edge is open iff the two
//!   corner sites facing it are both open; marginal `p^2`.
//!
//! The two coupling constructions sandwich the level chain's transition law
//! between the `SitePair` law (below) and any built-in kernel's law (above),
//! realizing both comparisons on a common probability space so that the
//! subset relation holds surely, not just in distribution.

use crate::chain::TransitionRow;
use crate::error::{Error, Result};
use crate::geometry::{interval_successors, BoxGeometry, LevelSubset};
use crate::latent::{channel, LatentBits};

/// Guard on explicit distributions handed to the domination checker.
pub const MAX_SUPPORT: usize = 4096;

/// Built-in positively associated, 1-independent level kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelKernel {
    /// Independent Bernoulli(p) edges.
    Product(f64),
    /// Edge open iff source site bit and target site bit are both 1.
    SitePair(f64),
    /// Whole out-fans (even source levels) or in-fans (even target levels)
    /// open together.
    SiblingBlock(f64),
    /// Contracted truncated-square construction; perpendicular edge pairs at
    /// a vertex share a corner site.
    TruncatedSquare(f64),
}

impl LevelKernel {
    /// The latent site/edge parameter.
    pub fn site_p(&self) -> f64 {
        match *self {
            LevelKernel::Product(p)
            | LevelKernel::SitePair(p)
            | LevelKernel::SiblingBlock(p)
            | LevelKernel::TruncatedSquare(p) => p,
        }
    }

    /// Declared marginal: the probability that a given edge is open.
    pub fn marginal(&self) -> f64 {
        match *self {
            LevelKernel::Product(p) | LevelKernel::SiblingBlock(p) => p,
            LevelKernel::SitePair(p) | LevelKernel::TruncatedSquare(p) => p * p,
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.site_p();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "kernel parameter must lie in [0,1], got {p}"
            )));
        }
        Ok(())
    }
}

/// Directed in-box edge between consecutive levels, by column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct LayerEdge {
    layer: usize,
    src: usize,
    dst: usize,
}

impl LayerEdge {
    /// Vertical edges keep the lattice x-coordinate; on even layers those
    /// point one column left, on odd layers straight up.
    fn is_vertical(&self) -> bool {
        if self.layer.is_multiple_of(2) {
            self.dst + 1 == self.src
        } else {
            self.dst == self.src
        }
    }
}

/// Latent keys of one edge under one kernel (one key per required bit).
fn edge_keys(kernel: LevelKernel, e: LayerEdge) -> Vec<[u64; 5]> {
    let (layer, src, dst) = (e.layer as u64, e.src as u64, e.dst as u64);
    match kernel {
        LevelKernel::Product(_) => vec![[channel::EDGE, layer, src, dst, 0]],
        LevelKernel::SitePair(_) => vec![
            [channel::SITE_SRC, layer, src, 0, 0],
            [channel::SITE_DST, layer, dst, 0, 0],
        ],
        LevelKernel::SiblingBlock(_) => {
            if e.layer.is_multiple_of(2) {
                vec![[channel::BLOCK_OUT, layer, src, 0, 0]]
            } else {
                vec![[channel::BLOCK_IN, layer, dst, 0, 0]]
            }
        }
        LevelKernel::TruncatedSquare(_) => {
            let (sp, dp) = if e.is_vertical() {
                (0, 1)
            } else {
                let par = (e.layer % 2) as u64;
                (par, par)
            };
            vec![
                [channel::PORT, layer, 0, src, sp],
                [channel::PORT, layer, 1, dst, dp],
            ]
        }
    }
}

fn edge_open(kernel: LevelKernel, e: LayerEdge, bits: &LatentBits) -> bool {
    let p = kernel.site_p();
    edge_keys(kernel, e).iter().all(|key| bits.bit_with(key, p))
}

/// All in-box edges leaving `active`, grouped implicitly by interval.
fn edges_from(active: &LevelSubset, geom: &BoxGeometry) -> Result<Vec<LayerEdge>> {
    let layer = active.level_index();
    let mut out = Vec::new();
    for interval in active.intervals() {
        let span = interval_successors(interval, layer, geom)?;
        for dst in span.start..=span.end {
            for src in parent_cols(layer, dst) {
                if src >= interval.start && src <= interval.end() {
                    out.push(LayerEdge { layer, src, dst });
                }
            }
        }
    }
    Ok(out)
}

/// The at most two source columns feeding `dst` on the next level.
fn parent_cols(layer: usize, dst: usize) -> impl Iterator<Item = usize> {
    let (a, b) = if layer.is_multiple_of(2) {
        (Some(dst), Some(dst + 1))
    } else {
        (dst.checked_sub(1), Some(dst))
    };
    a.into_iter().chain(b)
}

/// One breadth-first step of a kernel: the set of next-level columns joined
/// to `active` by an open edge. Monotone in `active` and in the latent bits.
pub fn kernel_step(
    kernel: LevelKernel,
    active: &LevelSubset,
    geom: &BoxGeometry,
    bits: &LatentBits,
) -> Result<LevelSubset> {
    kernel.validate()?;
    let layer = active.level_index();
    if layer + 1 >= geom.num_levels() {
        return Err(Error::invalid(
            "active set sits on the top level".to_string(),
        ));
    }
    let mut out = 0u64;
    for e in edges_from(active, geom)? {
        if edge_open(kernel, e, bits) {
            out |= 1 << e.dst;
        }
    }
    LevelSubset::new(geom.level_width(layer + 1), out, layer + 1)
}

/// A monotone pair of next-level subsets: `lower` is a subset of `upper` by
/// construction on every sample.
#[derive(Clone, Copy, Debug)]
pub struct CoupledStep {
    pub lower: LevelSubset,
    pub upper: LevelSubset,
}

/// Monotone coupling of the `SitePair` one-step law (lower) under the level
/// chain's law (upper), both at the site parameter `bits.p()`. The lower
/// component has edge marginal `p^2`, the upper is distributed per
/// [`crate::chain::transition_prob`] at `p`.
pub fn couple_sitepair_below_chain(
    subset: &LevelSubset,
    geom: &BoxGeometry,
    bits: &LatentBits,
) -> Result<CoupledStep> {
    let layer = subset.level_index();
    if layer + 1 >= geom.num_levels() {
        return Err(Error::invalid("subset sits on the top level".to_string()));
    }
    let src_bit = |u: usize| bits.bit(&[channel::SITE_SRC, layer as u64, u as u64, 0, 0]);
    let dst_bit = |v: usize| bits.bit(&[channel::SITE_DST, layer as u64, v as u64, 0, 0]);

    let mut lower = 0u64;
    let mut upper = 0u64;
    for interval in subset.intervals() {
        let span = interval_successors(interval, layer, geom)?;
        for dst in span.start..=span.end {
            let parent_open = parent_cols(layer, dst)
                .any(|u| u >= interval.start && u <= interval.end() && src_bit(u));
            if dst_bit(dst) && parent_open {
                lower |= 1 << dst;
            }
        }
        if !span.full {
            for dst in span.start..=span.end {
                if dst_bit(dst) {
                    upper |= 1 << dst;
                }
            }
        } else {
            // Source columns u_1..u_len and span columns v_1..v_(len+1);
            // no open source bit at all kills the whole interval.
            let len = interval.len;
            let first_open_src = (1..=len)
                .find(|&j| src_bit(interval.start + j - 1))
                .unwrap_or(len + 2);
            for j in 1..=len + 1 {
                let v = span.start + j - 1;
                let open = if j <= first_open_src {
                    j == first_open_src
                } else {
                    dst_bit(v)
                };
                if open {
                    upper |= 1 << v;
                }
            }
        }
    }
    let width = geom.level_width(layer + 1);
    Ok(CoupledStep {
        lower: LevelSubset::new(width, lower, layer + 1)?,
        upper: LevelSubset::new(width, upper, layer + 1)?,
    })
}

/// Probability that the horizontal edge out of a source is open given that
/// the vertical edge out of the same source is open.
fn same_source_conditional(kernel: LevelKernel, layer: usize) -> f64 {
    let p = kernel.site_p();
    match kernel {
        LevelKernel::Product(_) | LevelKernel::SitePair(_) => p,
        LevelKernel::SiblingBlock(_) => {
            if layer.is_multiple_of(2) {
                1.0
            } else {
                p
            }
        }
        LevelKernel::TruncatedSquare(_) => {
            if layer.is_multiple_of(2) {
                p
            } else {
                p * p
            }
        }
    }
}

/// Monotone coupling of the level chain's law (lower, at the kernel's
/// marginal) under a built-in kernel's one-step law (upper).
///
/// For an interval whose successor span is full, the construction scans the
/// vertical edges for the first open one and continues with horizontal
/// edges, thinned once by an auxiliary acceptance bit whose rate is the
/// kernel marginal over the same-source conditional probability. For a
/// truncated span, each successor is paired with a distinct parent edge.
pub fn couple_chain_below_kernel(
    kernel: LevelKernel,
    subset: &LevelSubset,
    geom: &BoxGeometry,
    bits: &LatentBits,
) -> Result<CoupledStep> {
    kernel.validate()?;
    let layer = subset.level_index();
    if layer + 1 >= geom.num_levels() {
        return Err(Error::invalid("subset sits on the top level".to_string()));
    }
    let open = |src: usize, dst: usize| edge_open(kernel, LayerEdge { layer, src, dst }, bits);

    let mut lower = 0u64;
    let mut upper = 0u64;
    for interval in subset.intervals() {
        let span = interval_successors(interval, layer, geom)?;
        for dst in span.start..=span.end {
            if parent_cols(layer, dst)
                .any(|u| u >= interval.start && u <= interval.end() && open(u, dst))
            {
                upper |= 1 << dst;
            }
        }
        if !span.full {
            // Distinct-parent pairing; truncated spans only occur on even
            // layers, where the natural choice is the same column (span
            // clipped on the left) or the next one (clipped on the right).
            for dst in span.start..=span.end {
                let u = if interval.start == 0 { dst } else { dst + 1 };
                debug_assert!(u >= interval.start && u <= interval.end());
                if open(u, dst) {
                    lower |= 1 << dst;
                }
            }
        } else {
            let len = interval.len;
            let vertical = |j: usize| {
                // (u_j, v_j) keeps the lattice x-coordinate.
                open(interval.start + j - 1, span.start + j - 1)
            };
            let first = (1..=len).find(|&j| vertical(j)).unwrap_or(len + 1);
            if first <= len {
                lower |= 1 << (span.start + first - 1);
                let accept_p = kernel.marginal() / same_source_conditional(kernel, layer);
                let accept = bits.bit_with(
                    &[channel::COUPLER, layer as u64, interval.start as u64, 0, 0],
                    accept_p,
                );
                for j in first + 1..=len + 1 {
                    let v = span.start + j - 1;
                    // Horizontal edge (u_(j-1), v_j).
                    let horizontal = open(interval.start + j - 2, v);
                    let keep = if j == first + 1 {
                        horizontal && accept
                    } else {
                        horizontal
                    };
                    if keep {
                        lower |= 1 << v;
                    }
                }
            }
        }
    }
    let width = geom.level_width(layer + 1);
    Ok(CoupledStep {
        lower: LevelSubset::new(width, lower, layer + 1)?,
        upper: LevelSubset::new(width, upper, layer + 1)?,
    })
}

/// Exact one-step law of a kernel from `subset`, by enumerating every latent
/// bit the step reads. Only feasible for small intervals.
pub fn exact_kernel_row(
    kernel: LevelKernel,
    subset: &LevelSubset,
    geom: &BoxGeometry,
) -> Result<FiniteDistribution> {
    kernel.validate()?;
    let layer = subset.level_index();
    let edges = edges_from(subset, geom)?;
    let mut keys: Vec<[u64; 5]> = Vec::new();
    for &e in &edges {
        for key in edge_keys(kernel, e) {
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }
    if keys.len() > 22 {
        return Err(Error::guard(format!(
            "exact kernel row would enumerate 2^{} latent assignments",
            keys.len()
        )));
    }
    let p = kernel.site_p();
    let q = 1.0 - p;
    let width = geom.level_width(layer + 1);
    let mut law = std::collections::BTreeMap::new();
    for assignment in 0u64..(1 << keys.len()) {
        let ones = assignment.count_ones() as i32;
        let weight = p.powi(ones) * q.powi(keys.len() as i32 - ones);
        if weight == 0.0 {
            continue;
        }
        let lookup = |key: &[u64; 5]| {
            let idx = keys.iter().position(|k| k == key).expect("key collected");
            assignment >> idx & 1 == 1
        };
        let mut out = 0u64;
        for &e in &edges {
            if edge_keys(kernel, e).iter().all(&lookup) {
                out |= 1 << e.dst;
            }
        }
        *law.entry(out).or_insert(0.0) += weight;
    }
    FiniteDistribution::from_entries(width, law.into_iter().collect())
}

/// Edges as `(source column, target column)` pairs together with the
/// probability vector over `{0,1}^edges` (bit `e` of a configuration is the
/// status of edge `e`).
pub type EdgeJointLaw = (Vec<(usize, usize)>, Vec<f64>);

/// Exact joint law of the edge statuses out of `subset` under a kernel, by
/// enumerating every latent bit involved. Feeds the exhaustive independence
/// and association checkers.
pub fn exact_edge_joint_law(
    kernel: LevelKernel,
    subset: &LevelSubset,
    geom: &BoxGeometry,
) -> Result<EdgeJointLaw> {
    kernel.validate()?;
    let edges = edges_from(subset, geom)?;
    if edges.len() > 10 {
        return Err(Error::guard(format!(
            "joint edge law capped at 10 edges, got {}",
            edges.len()
        )));
    }
    let mut keys: Vec<[u64; 5]> = Vec::new();
    for &e in &edges {
        for key in edge_keys(kernel, e) {
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
    }
    let p = kernel.site_p();
    let q = 1.0 - p;
    let mut law = vec![0.0; 1 << edges.len()];
    for assignment in 0u64..(1 << keys.len()) {
        let ones = assignment.count_ones() as i32;
        let weight = p.powi(ones) * q.powi(keys.len() as i32 - ones);
        if weight == 0.0 {
            continue;
        }
        let mut config = 0usize;
        for (idx, &e) in edges.iter().enumerate() {
            let open = edge_keys(kernel, e).iter().all(|key| {
                let slot = keys.iter().position(|k| k == key).expect("key collected");
                assignment >> slot & 1 == 1
            });
            if open {
                config |= 1 << idx;
            }
        }
        law[config] += weight;
    }
    Ok((edges.iter().map(|e| (e.src, e.dst)).collect(), law))
}

/// An explicit distribution over level subsets of one width.
#[derive(Clone, Debug)]
pub struct FiniteDistribution {
    width: usize,
    support: Vec<u64>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Build from `(bits, probability)` entries; duplicates are merged and
    /// zero entries dropped. The probabilities must sum to 1 within 1e-9.
    pub fn from_entries(width: usize, entries: Vec<(u64, f64)>) -> Result<Self> {
        let mut merged = std::collections::BTreeMap::new();
        for (bits, prob) in entries {
            if prob < -1e-12 {
                return Err(Error::invalid(format!("negative probability {prob}")));
            }
            if width < 64 && bits >> width != 0 {
                return Err(Error::invalid(format!(
                    "support entry {bits:#b} exceeds width {width}"
                )));
            }
            *merged.entry(bits).or_insert(0.0) += prob;
        }
        let (support, probs): (Vec<u64>, Vec<f64>) =
            merged.into_iter().filter(|&(_, p)| p > 0.0).unzip();
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "probabilities sum to {mass}, not 1"
            )));
        }
        Ok(FiniteDistribution {
            width,
            support,
            probs,
        })
    }

    /// The chain's transition row as an explicit distribution.
    pub fn from_transition_row(row: &TransitionRow) -> Result<Self> {
        FiniteDistribution::from_entries(row.target_width(), row.entries().to_vec())
    }

    /// Point mass on one subset.
    pub fn point_mass(width: usize, bits: u64) -> Result<Self> {
        FiniteDistribution::from_entries(width, vec![(bits, 1.0)])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of one subset.
    pub fn prob_of(&self, bits: u64) -> f64 {
        match self.support.binary_search(&bits) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// Total variation distance to another distribution of the same width.
    pub fn total_variation(&self, other: &FiniteDistribution) -> f64 {
        let mut keys: Vec<u64> = self
            .support
            .iter()
            .chain(other.support.iter())
            .copied()
            .collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|&k| (self.prob_of(k) - other.prob_of(k)).abs())
            .sum::<f64>()
    }
}

/// Decide stochastic domination `a` below `b` in the coordinatewise order,
/// via max-flow feasibility on the bipartite comparability graph: unit flow
/// exists iff a monotone coupling exists.
pub fn check_domination(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<bool> {
    if a.width != b.width {
        return Err(Error::invalid(format!(
            "width mismatch: {} vs {}",
            a.width, b.width
        )));
    }
    if a.support.len() > MAX_SUPPORT || b.support.len() > MAX_SUPPORT {
        return Err(Error::guard(format!(
            "domination check supports are capped at {MAX_SUPPORT} states"
        )));
    }
    let na = a.support.len();
    let nb = b.support.len();
    let source = na + nb;
    let sink = source + 1;
    let mut flow = FlowNetwork::new(sink + 1);
    for (i, (&x, &px)) in a.support.iter().zip(&a.probs).enumerate() {
        flow.add_edge(source, i, px);
        for (j, &y) in b.support.iter().enumerate() {
            if x & !y == 0 {
                flow.add_edge(i, na + j, 2.0);
            }
        }
    }
    for (j, &py) in b.probs.iter().enumerate() {
        flow.add_edge(na + j, sink, py);
    }
    let value = flow.max_flow(source, sink);
    Ok(value >= 1.0 - 1e-10)
}

struct FlowEdge {
    to: usize,
    rev: usize,
    cap: f64,
}

struct FlowNetwork {
    adj: Vec<Vec<FlowEdge>>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork {
            adj: (0..n).map(|_| Vec::new()).collect(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: f64) {
        let (fl, tl) = (self.adj[from].len(), self.adj[to].len());
        self.adj[from].push(FlowEdge { to, rev: tl, cap });
        self.adj[to].push(FlowEdge {
            to: from,
            rev: fl,
            cap: 0.0,
        });
    }

    /// Edmonds-Karp with a residual tolerance; capacities here are
    /// probabilities, so path counts stay tiny.
    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        const EPS: f64 = 1e-12;
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(source);
            let mut seen = vec![false; n];
            seen[source] = true;
            while let Some(u) = queue.pop_front() {
                for (i, e) in self.adj[u].iter().enumerate() {
                    if !seen[e.to] && e.cap > EPS {
                        seen[e.to] = true;
                        prev[e.to] = Some((u, i));
                        queue.push_back(e.to);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck = f64::INFINITY;
            let mut v = sink;
            while let Some((u, i)) = prev[v] {
                bottleneck = bottleneck.min(self.adj[u][i].cap);
                v = u;
            }
            let mut v = sink;
            while let Some((u, i)) = prev[v] {
                let rev = self.adj[u][i].rev;
                self.adj[u][i].cap -= bottleneck;
                self.adj[v][rev].cap += bottleneck;
                v = u;
            }
            total += bottleneck;
        }
    }
}

/// Axis-aligned window of lattice vertices `[x0, x0+nx) x [y0, y0+ny)`.
#[derive(Clone, Copy, Debug)]
pub struct LatticeWindow {
    pub x0: i64,
    pub y0: i64,
    pub nx: usize,
    pub ny: usize,
}

/// Bond configuration on a window, produced by the truncated-square
/// contraction.
#[derive(Clone, Debug)]
pub struct WindowBonds {
    window: LatticeWindow,
    horizontal: Vec<bool>,
    vertical: Vec<bool>,
}

impl WindowBonds {
    pub fn window(&self) -> LatticeWindow {
        self.window
    }

    /// Edge from `(x, y)` to `(x+1, y)`, window-relative coordinates.
    pub fn horizontal_open(&self, x: usize, y: usize) -> bool {
        assert!(x + 1 < self.window.nx && y < self.window.ny);
        self.horizontal[y * (self.window.nx - 1) + x]
    }

    /// Edge from `(x, y)` to `(x, y+1)`, window-relative coordinates.
    pub fn vertical_open(&self, x: usize, y: usize) -> bool {
        assert!(x < self.window.nx && y + 1 < self.window.ny);
        self.vertical[y * self.window.nx + x]
    }

    /// All edges, as `(x, y, vertical, open)` rows.
    pub fn edges(&self) -> Vec<(usize, usize, bool, bool)> {
        let mut out = Vec::new();
        for y in 0..self.window.ny {
            for x in 0..self.window.nx.saturating_sub(1) {
                out.push((x, y, false, self.horizontal_open(x, y)));
            }
        }
        for y in 0..self.window.ny.saturating_sub(1) {
            for x in 0..self.window.nx {
                out.push((x, y, true, self.vertical_open(x, y)));
            }
        }
        out
    }
}

/// Corner-site bit of vertex `(x, y)`; each vertex carries two, one per
/// diagonal pair of incident faces.
fn corner_site(bits: &LatentBits, p: f64, x: i64, y: i64, port: u64) -> bool {
    bits.bit_with(&[channel::PORT, x as u64, y as u64, port, 0], p)
}

/// Whether the horizontal edge `(x,y)-(x+1,y)` is open: both endpoint
/// corners facing the edge's square face must be open. The facing corner
/// pair alternates with the checkerboard parity of the left endpoint.
fn ts_horizontal(bits: &LatentBits, p: f64, x: i64, y: i64) -> bool {
    let port = (x + y).rem_euclid(2) as u64;
    corner_site(bits, p, x, y, port) && corner_site(bits, p, x + 1, y, port)
}

/// Whether the vertical edge `(x,y)-(x,y+1)` is open: the bottom vertex
/// contributes its first corner, the top vertex its second.
fn ts_vertical(bits: &LatentBits, p: f64, x: i64, y: i64) -> bool {
    corner_site(bits, p, x, y, 0) && corner_site(bits, p, x, y + 1, 1)
}

/// Sample the truncated-square contraction on a window: i.i.d. Bernoulli(p)
/// corner sites, an edge open iff both facing corners are open. Bond
/// marginals are `p^2`; the law is positively associated and 1-independent,
/// with perpendicular edge pairs at a vertex positively correlated.
pub fn truncated_square_sample(window: LatticeWindow, p: f64, seed: u64) -> Result<WindowBonds> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    if window.nx == 0 || window.ny == 0 {
        return Err(Error::invalid(
            "window must contain at least one vertex".to_string(),
        ));
    }
    let bits = LatentBits::new(seed, p)?;
    let mut horizontal = Vec::with_capacity(window.ny * window.nx.saturating_sub(1));
    for y in 0..window.ny as i64 {
        for x in 0..window.nx.saturating_sub(1) as i64 {
            horizontal.push(ts_horizontal(&bits, p, window.x0 + x, window.y0 + y));
        }
    }
    let mut vertical = Vec::with_capacity(window.nx * window.ny.saturating_sub(1));
    for y in 0..window.ny.saturating_sub(1) as i64 {
        for x in 0..window.nx as i64 {
            vertical.push(ts_vertical(&bits, p, window.x0 + x, window.y0 + y));
        }
    }
    Ok(WindowBonds {
        window,
        horizontal,
        vertical,
    })
}
