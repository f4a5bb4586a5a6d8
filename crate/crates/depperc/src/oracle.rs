//! Brute-force ground truth on tiny instances.
//!
//! Everything in this module is exhaustive: survival probabilities by
//! enumerating every latent bit assignment of the monotone chain
//! construction, positive association by checking the FKG inequality over
//! all pairs of increasing events, k-independence by checking product
//! factorization over all pairs of distant edge sets, and the equivalence of
//! those two properties with the information-propagation condition (every
//! F-increasing event supported on F is nonnegatively correlated with every
//! closure-increasing event). These checkers are the oracles the fast paths
//! are tested against.

use crate::chain::monotone_step_with;
use crate::couplings::FiniteDistribution;
use crate::error::{Error, Result};
use crate::geometry::BoxGeometry;

/// Hard cap on explicit joint tables: up-set enumeration grows like the
/// Dedekind numbers.
pub const MAX_TABLE_EDGES: usize = 5;

/// Enumeration guard for [`brute_force_survival`].
pub const MAX_LATENT_BITS: usize = 24;

// ---------------------------------------------------------------------------
// Up-sets
// ---------------------------------------------------------------------------

/// All up-sets (increasing events) of `{0,1}^n`, each as a bitmask over the
/// `2^n` configurations: bit `c` set means configuration `c` belongs to the
/// event. `n <= 5`.
pub fn up_sets(n: usize) -> Vec<u64> {
    assert!(
        n <= MAX_TABLE_EDGES,
        "up-set enumeration capped at {MAX_TABLE_EDGES} coordinates"
    );
    if n == 0 {
        return vec![0b0, 0b1];
    }
    let half = up_sets(n - 1);
    let shift = 1usize << (n - 1);
    let mut out = Vec::new();
    // Split on the top coordinate: the slice at 0 must be contained in the
    // slice at 1.
    for &lo in &half {
        for &hi in &half {
            if lo & !hi == 0 {
                out.push(lo | (hi << shift));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Joint tables and small graphs
// ---------------------------------------------------------------------------

/// Explicit probability table over `{0,1}^E` for a tiny edge set.
/// Configuration `c` has edge `e` open iff bit `e` of `c` is set.
#[derive(Clone, Debug)]
pub struct JointTable {
    probs: Vec<f64>,
}

impl JointTable {
    /// A table over `log2(probs.len())` edges. Probabilities must be
    /// nonnegative and sum to 1 within 1e-9.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if !probs.len().is_power_of_two() || probs.len() < 2 {
            return Err(Error::invalid(format!(
                "table length {} is not a power of two",
                probs.len()
            )));
        }
        let n = probs.len().trailing_zeros() as usize;
        if n > MAX_TABLE_EDGES {
            return Err(Error::guard(format!(
                "tables are capped at {MAX_TABLE_EDGES} edges, got {n}"
            )));
        }
        if probs.iter().any(|&p| p < -1e-12) {
            return Err(Error::invalid("negative probability in table".to_string()));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("table mass {mass} is not 1")));
        }
        Ok(JointTable { probs })
    }

    /// Independent Bernoulli(p) edges.
    pub fn product(n_edges: usize, p: f64) -> Result<Self> {
        let mut probs = vec![0.0; 1 << n_edges];
        for (c, slot) in probs.iter_mut().enumerate() {
            let ones = (c as u64).count_ones() as i32;
            *slot = p.powi(ones) * (1.0 - p).powi(n_edges as i32 - ones);
        }
        JointTable::new(probs)
    }

    /// All edges equal to one shared Bernoulli(p) bit.
    pub fn fully_correlated(n_edges: usize, p: f64) -> Result<Self> {
        let mut probs = vec![0.0; 1 << n_edges];
        probs[0] = 1.0 - p;
        probs[(1 << n_edges) - 1] = p;
        JointTable::new(probs)
    }

    /// Number of edges.
    pub fn n_edges(&self) -> usize {
        self.probs.len().trailing_zeros() as usize
    }

    /// Raw probabilities, indexed by configuration.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of an event given as a configuration mask.
    pub fn event_prob(&self, mut event: u64) -> f64 {
        let mut total = 0.0;
        while event != 0 {
            let c = event.trailing_zeros() as usize;
            total += self.probs[c];
            event &= event - 1;
        }
        total
    }

    /// P[edge `target` open | edges fixed as in `given`], or None if the
    /// conditioning event has zero mass.
    pub fn conditional_open_prob(&self, target: usize, given: &[(usize, bool)]) -> Option<f64> {
        let mut base = 0.0;
        let mut joint = 0.0;
        'config: for (c, &p) in self.probs.iter().enumerate() {
            for &(e, open) in given {
                if (c >> e & 1 == 1) != open {
                    continue 'config;
                }
            }
            base += p;
            if c >> target & 1 == 1 {
                joint += p;
            }
        }
        if base <= 0.0 {
            None
        } else {
            Some(joint / base)
        }
    }
}

/// Tiny graph carrying pairwise edge-to-edge distances, where the distance
/// between edges is the least vertex distance between their endpoints.
#[derive(Clone, Debug)]
pub struct SmallGraph {
    edge_dist: Vec<Vec<u32>>,
}

impl SmallGraph {
    /// Build from a vertex-edge list; distances come from breadth-first
    /// search on the vertices.
    pub fn from_edges(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if edges.len() > MAX_TABLE_EDGES {
            return Err(Error::guard(format!(
                "graphs are capped at {MAX_TABLE_EDGES} edges"
            )));
        }
        for &(u, v) in edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::invalid("edge endpoint out of range".to_string()));
            }
        }
        let mut adj = vec![Vec::new(); num_vertices];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let vdist: Vec<Vec<u32>> = (0..num_vertices)
            .map(|s| {
                let mut d = vec![u32::MAX; num_vertices];
                d[s] = 0;
                let mut queue = std::collections::VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    for &v in &adj[u] {
                        if d[v] == u32::MAX {
                            d[v] = d[u] + 1;
                            queue.push_back(v);
                        }
                    }
                }
                d
            })
            .collect();
        let edge_dist = edges
            .iter()
            .map(|&(a, b)| {
                edges
                    .iter()
                    .map(|&(c, d)| {
                        [vdist[a][c], vdist[a][d], vdist[b][c], vdist[b][d]]
                            .into_iter()
                            .min()
                            .unwrap()
                    })
                    .collect()
            })
            .collect();
        Ok(SmallGraph { edge_dist })
    }

    /// Build directly from a symmetric distance matrix with zero diagonal.
    pub fn from_edge_distances(edge_dist: Vec<Vec<u32>>) -> Result<Self> {
        let n = edge_dist.len();
        if n > MAX_TABLE_EDGES {
            return Err(Error::guard(format!(
                "graphs are capped at {MAX_TABLE_EDGES} edges"
            )));
        }
        for (i, row) in edge_dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid("distance matrix is not square".to_string()));
            }
            if row[i] != 0 {
                return Err(Error::invalid(
                    "distance matrix diagonal must be zero".to_string(),
                ));
            }
            for (j, &d) in row.iter().enumerate() {
                if edge_dist[j][i] != d {
                    return Err(Error::invalid(
                        "distance matrix must be symmetric".to_string(),
                    ));
                }
            }
        }
        Ok(SmallGraph { edge_dist })
    }

    /// The 4-cycle on vertices 0..3 with edges 01, 12, 23, 30.
    pub fn four_cycle() -> SmallGraph {
        SmallGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_dist.len()
    }

    /// Distance between two edges by index.
    pub fn edge_distance(&self, e: usize, f: usize) -> u32 {
        self.edge_dist[e][f]
    }

    /// Least distance between two edge sets given as bitmasks.
    pub fn set_distance(&self, f1: u64, f2: u64) -> u32 {
        let mut best = u32::MAX;
        for e in 0..self.n_edges() {
            if f1 >> e & 1 == 0 {
                continue;
            }
            for f in 0..self.n_edges() {
                if f2 >> f & 1 == 1 {
                    best = best.min(self.edge_dist[e][f]);
                }
            }
        }
        best
    }

    /// k-closure of an edge set: all edges at distance strictly less than
    /// `k`; the set itself for `k = 0` (empty sets stay empty).
    pub fn closure(&self, f: u64, k: u32) -> u64 {
        if k == 0 || f == 0 {
            return f;
        }
        let mut out = 0u64;
        for e in 0..self.n_edges() {
            let de = (0..self.n_edges())
                .filter(|&g| f >> g & 1 == 1)
                .map(|g| self.edge_dist[e][g])
                .min()
                .unwrap_or(u32::MAX);
            if de < k {
                out |= 1 << e;
            }
        }
        out
    }
}

fn check_compatible(table: &JointTable, graph: &SmallGraph) -> Result<()> {
    if table.n_edges() != graph.n_edges() {
        return Err(Error::invalid(format!(
            "table has {} edges but graph has {}",
            table.n_edges(),
            graph.n_edges()
        )));
    }
    Ok(())
}

/// Lift an up-set over the coordinates in `coords_mask` to a configuration
/// mask over all edges.
fn lift_up_set(up_set: u64, coords_mask: u64, n_edges: usize) -> u64 {
    let mut out = 0u64;
    for c in 0..(1usize << n_edges) {
        let mut local = 0u64;
        let mut slot = 0;
        for e in 0..n_edges {
            if coords_mask >> e & 1 == 1 {
                local |= ((c as u64 >> e) & 1) << slot;
                slot += 1;
            }
        }
        if up_set >> local & 1 == 1 {
            out |= 1 << c;
        }
    }
    out
}

const FKG_TOL: f64 = 1e-12;

/// Exhaustive FKG check: every ordered pair of increasing events is
/// nonnegatively correlated.
pub fn check_positive_association(table: &JointTable) -> Result<bool> {
    let n = table.n_edges();
    let ups = up_sets(n);
    let with_probs: Vec<(u64, f64)> = ups.iter().map(|&u| (u, table.event_prob(u))).collect();
    for &(a, pa) in &with_probs {
        for &(b, pb) in &with_probs {
            if table.event_prob(a & b) < pa * pb - FKG_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustive k-independence check: every pair of disjoint edge sets at
/// distance at least `k` has a product-factorizing joint law.
pub fn check_k_independence(table: &JointTable, graph: &SmallGraph, k: u32) -> Result<bool> {
    check_compatible(table, graph)?;
    let n = table.n_edges();
    for f1 in 1u64..(1 << n) {
        let rest = !f1 & ((1 << n) - 1);
        let mut f2 = rest;
        // Nonempty submasks of the complement.
        while f2 != 0 {
            if graph.set_distance(f1, f2) >= k && !factorizes(table, f1, f2) {
                return Ok(false);
            }
            f2 = (f2 - 1) & rest;
        }
    }
    Ok(true)
}

fn factorizes(table: &JointTable, f1: u64, f2: u64) -> bool {
    let n = table.n_edges();
    // Marginal of a pattern on a mask.
    let marginal = |mask: u64, pattern: u64| -> f64 {
        (0..1usize << n)
            .filter(|&c| c as u64 & mask == pattern)
            .map(|c| table.probs()[c])
            .sum()
    };
    for c in 0..1u64 << n {
        let a = c & f1;
        let b = c & f2;
        let joint = marginal(f1 | f2, a | b);
        if (joint - marginal(f1, a) * marginal(f2, b)).abs() > FKG_TOL {
            return false;
        }
    }
    true
}

/// Exhaustive check of the information-propagation condition: for every
/// edge set `F`, every F-increasing event `A` supported on `F`, and every
/// event `B` increasing in the coordinates of the k-closure of `F`,
/// `P[A and B] >= P[A] P[B]` up to tolerance.
///
/// Events `B` decompose over the configurations of the edges outside the
/// closure, and the worst `B` optimizes each slice independently, so the
/// check minimizes slice by slice instead of enumerating the full
/// (doubly exponential) family.
pub fn check_information_propagation(
    table: &JointTable,
    graph: &SmallGraph,
    k: u32,
) -> Result<bool> {
    check_compatible(table, graph)?;
    let n = table.n_edges();
    let all = (1u64 << n) - 1;
    for f in 1u64..=all {
        let cl = graph.closure(f, k);
        let rest = all & !cl;
        let cl_size = cl.count_ones() as usize;
        let f_size = f.count_ones() as usize;
        let a_events: Vec<(u64, f64)> = up_sets(f_size)
            .into_iter()
            .map(|u| {
                let mask = lift_up_set(u, f, n);
                (mask, table.event_prob(mask))
            })
            .collect();
        let b_lifts: Vec<u64> = up_sets(cl_size)
            .into_iter()
            .map(|u| lift_up_set(u, cl, n))
            .collect();
        let rest_patterns: Vec<u64> = {
            let rest_edges: Vec<usize> = (0..n).filter(|&e| rest >> e & 1 == 1).collect();
            (0..1u64 << rest_edges.len())
                .map(|bits| {
                    rest_edges
                        .iter()
                        .enumerate()
                        .filter(|&(slot, _)| bits >> slot & 1 == 1)
                        .map(|(_, &e)| 1u64 << e)
                        .sum()
                })
                .collect()
        };
        for &(a_mask, pa) in &a_events {
            let mut worst = 0.0;
            for &tau in &rest_patterns {
                // Configurations agreeing with tau outside the closure.
                let mut c_mask = 0u64;
                for c in 0..1u64 << n {
                    if c & rest == tau {
                        c_mask |= 1 << c;
                    }
                }
                let mut slice_min = 0.0f64;
                for &b_lift in &b_lifts {
                    let bc = b_lift & c_mask;
                    let defect = table.event_prob(a_mask & bc) - pa * table.event_prob(bc);
                    slice_min = slice_min.min(defect);
                }
                worst += slice_min;
            }
            if worst < -FKG_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Survival by enumeration
// ---------------------------------------------------------------------------

/// Exact survival probability of the level chain on the `(w, ell)` box by
/// enumerating every assignment of the construction's latent vertex bits.
/// Independent of the transfer-matrix path.
pub fn brute_force_survival(w: usize, ell: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    let geom = BoxGeometry::new(w, ell)?;
    // Offsets of each level's bits within the assignment word; level 0 owns
    // no bits (the chain starts there deterministically).
    let mut offsets = Vec::with_capacity(geom.num_levels() - 1);
    let mut acc = 0usize;
    for level in 1..geom.num_levels() {
        offsets.push(acc);
        acc += geom.level_width(level);
    }
    let total_bits = acc;
    if total_bits > MAX_LATENT_BITS {
        return Err(Error::guard(format!(
            "box needs {total_bits} latent bits, enumeration capped at {MAX_LATENT_BITS}"
        )));
    }

    let q = 1.0 - p;
    let mut survival = 0.0;
    for assignment in 0u64..(1 << total_bits) {
        let ones = assignment.count_ones() as i32;
        let weight = p.powi(ones) * q.powi(total_bits as i32 - ones);
        if weight == 0.0 {
            continue;
        }
        let mut current = geom.full_bottom();
        for level in 1..geom.num_levels() {
            let base = offsets[level - 1];
            current =
                monotone_step_with(&current, &geom, |col| assignment >> (base + col) & 1 == 1)?;
            if current.is_empty() {
                break;
            }
        }
        if !current.is_empty() {
            survival += weight;
        }
    }
    Ok(survival)
}

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

/// Closed-form stochastic-domination bounds for positively associated,
/// k-independent models on graphs of maximum degree `delta`: such a model
/// with marginals `p` sits between Bernoulli(rho(p)) and Bernoulli(sigma(p)).
/// `rho(p) = (1 - (1-p)^(1/(2(delta-1)^k + 1)))^2` and
/// `sigma(p) = 1 - rho(1-p)`; both are increasing homeomorphisms of [0,1].
pub fn domination_bound(p: f64, delta: u32, k: u32) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0,1], got {p}")));
    }
    if delta < 2 {
        return Err(Error::invalid(format!(
            "maximum degree must be >= 2, got {delta}"
        )));
    }
    if k < 1 {
        return Err(Error::invalid(
            "dependence range k must be >= 1".to_string(),
        ));
    }
    let exponent = 2.0 * f64::from(delta - 1).powi(k as i32) + 1.0;
    let rho = |p: f64| {
        let thinned = 1.0 - (1.0 - p).powf(1.0 / exponent);
        thinned * thinned
    };
    Ok((rho(p), 1.0 - rho(1.0 - p)))
}

/// Reachability bound for the blocked-fan branching model on the oriented
/// n-dimensional lattice: the chance that level `2i` is reached is at most
/// `(n(n+1)/2 * p^2)^i`, capped at 1.
pub fn branching_bound_formula(n: u32, p: f64, i: u32) -> f64 {
    let rate = f64::from(n) * f64::from(n + 1) / 2.0 * p * p;
    rate.powi(i as i32).min(1.0)
}

// ---------------------------------------------------------------------------
// Independent domination oracle and table generators
// ---------------------------------------------------------------------------

/// Strassen domination decided by enumerating the up-sets of the poset
/// induced on the union of the two supports: `a` is dominated by `b` iff
/// `a(U) <= b(U)` for every up-set `U`. Exponential in the support size;
/// the independent cross-check for the max-flow route.
pub fn dominates_by_up_sets(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<bool> {
    if a.width() != b.width() {
        return Err(Error::invalid("width mismatch".to_string()));
    }
    let mut union: Vec<u64> = a.support().iter().chain(b.support()).copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.len() > 20 {
        return Err(Error::guard(
            "up-set domination oracle capped at 20 support points".to_string(),
        ));
    }
    let m = union.len();
    'subset: for s in 0u64..(1 << m) {
        // Up-set in the induced order: nothing above a member is missing.
        for i in 0..m {
            if s >> i & 1 == 0 {
                continue;
            }
            for j in 0..m {
                if s >> j & 1 == 0 && union[i] & !union[j] == 0 {
                    continue 'subset;
                }
            }
        }
        let mass = |dist: &FiniteDistribution| -> f64 {
            (0..m)
                .filter(|&i| s >> i & 1 == 1)
                .map(|i| dist.prob_of(union[i]))
                .sum()
        };
        if mass(a) > mass(b) + 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn xorshift(state: &mut u64) -> u64 {
    let mut x = *state;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    *state = x;
    x
}

/// A random monotone-factor table: each edge is a monotone Boolean function
/// (an OR of AND clauses) of a handful of independent latent bits.
/// Positively associated by construction; k-independence varies with the
/// clause overlap.
pub fn random_monotone_table(n_edges: usize, seed: u64) -> Result<JointTable> {
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
    let n_latent = 3 + (xorshift(&mut state) % 4) as usize; // 3..=6
    let thetas: Vec<f64> = (0..n_latent)
        .map(|_| 0.2 + 0.6 * (xorshift(&mut state) >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    let clauses: Vec<Vec<u64>> = (0..n_edges)
        .map(|_| {
            let k = 1 + (xorshift(&mut state) % 2) as usize;
            (0..k)
                .map(|_| {
                    let mask = xorshift(&mut state) & ((1 << n_latent) - 1);
                    if mask == 0 {
                        1
                    } else {
                        mask
                    }
                })
                .collect()
        })
        .collect();
    let mut probs = vec![0.0; 1 << n_edges];
    for x in 0u64..(1 << n_latent) {
        let mut weight = 1.0;
        for (j, &theta) in thetas.iter().enumerate() {
            weight *= if x >> j & 1 == 1 { theta } else { 1.0 - theta };
        }
        let mut config = 0usize;
        for (e, edge_clauses) in clauses.iter().enumerate() {
            if edge_clauses.iter().any(|&clause| clause & !x == 0) {
                config |= 1 << e;
            }
        }
        probs[config] += weight;
    }
    JointTable::new(probs)
}

/// Blend a table with an anticorrelated pair measure; for visible blend
/// weights this breaks positive association.
pub fn anticorrelated_blend(
    table: &JointTable,
    edge_a: usize,
    edge_b: usize,
    lambda: f64,
) -> Result<JointTable> {
    let n = table.n_edges();
    if edge_a >= n || edge_b >= n || edge_a == edge_b {
        return Err(Error::invalid("blend edges out of range".to_string()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid("blend weight must lie in [0,1]".to_string()));
    }
    let mismatch: Vec<usize> = (0..1usize << n)
        .filter(|&c| (c >> edge_a & 1) != (c >> edge_b & 1))
        .collect();
    let anti = 1.0 / mismatch.len() as f64;
    let mut probs: Vec<f64> = table.probs().iter().map(|&p| (1.0 - lambda) * p).collect();
    for c in mismatch {
        probs[c] += lambda * anti;
    }
    JointTable::new(probs)
}

/// Site-induced bond model on the 4-cycle: i.i.d. Bernoulli(theta) vertex
/// bits, an edge open iff both endpoints are open. Positively associated and
/// 1-independent by construction, but adjacent edges are correlated (so not
/// 0-independent).
pub fn site_induced_cycle_table(theta: f64) -> Result<JointTable> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::invalid(format!(
            "theta must lie in [0,1], got {theta}"
        )));
    }
    let mut probs = vec![0.0; 16];
    for sites in 0u32..16 {
        let mut weight = 1.0;
        for v in 0..4 {
            weight *= if sites >> v & 1 == 1 {
                theta
            } else {
                1.0 - theta
            };
        }
        let mut config = 0usize;
        for (e, (u, v)) in [(0u32, 1u32), (1, 2), (2, 3), (3, 0)]
            .into_iter()
            .enumerate()
        {
            if sites >> u & 1 == 1 && sites >> v & 1 == 1 {
                config |= 1 << e;
            }
        }
        probs[config] += weight;
    }
    JointTable::new(probs)
}

/// The equal-endpoint-labels model on the 4-cycle: i.i.d. fair labels on the
/// vertices, an edge open iff its endpoints match. 1-independent but not
/// positively associated.
pub fn four_cycle_match_table() -> (JointTable, SmallGraph) {
    let graph = SmallGraph::four_cycle();
    let mut probs = vec![0.0; 16];
    for labels in 0u32..16 {
        let bit = |v: u32| labels >> v & 1;
        let mut config = 0usize;
        for (e, (u, v)) in [(0u32, 1u32), (1, 2), (2, 3), (3, 0)]
            .into_iter()
            .enumerate()
        {
            if bit(u) == bit(v) {
                config |= 1 << e;
            }
        }
        probs[config] += 1.0 / 16.0;
    }
    (JointTable::new(probs).unwrap(), graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn up_set_counts_are_dedekind() {
        assert_eq!(up_sets(0).len(), 2);
        assert_eq!(up_sets(1).len(), 3);
        assert_eq!(up_sets(2).len(), 6);
        assert_eq!(up_sets(3).len(), 20);
        assert_eq!(up_sets(4).len(), 168);
        assert_eq!(up_sets(5).len(), 7581);
    }

    #[test]
    fn up_sets_are_upward_closed() {
        for &u in &up_sets(3) {
            for c in 0u64..8 {
                if u >> c & 1 == 0 {
                    continue;
                }
                for d in 0u64..8 {
                    if c & !d == 0 {
                        assert_eq!(u >> d & 1, 1, "up-set {u:#b} missing {d:#b} above {c:#b}");
                    }
                }
            }
        }
    }

    #[test]
    fn product_measure_is_pa_and_independent() {
        let table = JointTable::product(4, 0.37).unwrap();
        assert!(check_positive_association(&table).unwrap());
        let graph = SmallGraph::four_cycle();
        assert!(check_k_independence(&table, &graph, 0).unwrap());
        assert!(check_information_propagation(&table, &graph, 0).unwrap());
        assert!(check_information_propagation(&table, &graph, 1).unwrap());
    }

    #[test]
    fn fully_correlated_is_pa_but_not_1_independent() {
        let table = JointTable::fully_correlated(4, 0.6).unwrap();
        assert!(check_positive_association(&table).unwrap());
        let graph = SmallGraph::four_cycle();
        assert!(!check_k_independence(&table, &graph, 1).unwrap());
    }

    #[test]
    fn four_cycle_match_model_classification() {
        let (table, graph) = four_cycle_match_table();
        assert!(check_k_independence(&table, &graph, 1).unwrap());
        assert!(!check_positive_association(&table).unwrap());
        assert!(!check_information_propagation(&table, &graph, 1).unwrap());

        // The conditioning witness: the open boundary alone leaves the edge
        // at its marginal, adding the far closed edge forces it shut.
        assert_eq!(table.conditional_open_prob(0, &[]), Some(0.5));
        assert_eq!(
            table.conditional_open_prob(0, &[(3, true), (1, true)]),
            Some(0.5)
        );
        assert_eq!(
            table.conditional_open_prob(0, &[(3, true), (1, true), (2, false)]),
            Some(0.0)
        );
    }

    #[test]
    fn brute_force_tiny_box() {
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let q = brute_force_survival(1, 0, p).unwrap();
            assert!((q - p * p).abs() < 1e-12, "p={p}: q={q}");
        }
        assert_eq!(brute_force_survival(2, 1, 1.0).unwrap(), 1.0);
        assert!(
            brute_force_survival(4, 4, 0.5).is_err(),
            "guard should trip"
        );
    }

    #[test]
    fn brute_force_monotone_in_p() {
        let mut last = 0.0;
        for i in 0..=10 {
            let q = brute_force_survival(2, 0, i as f64 / 10.0).unwrap();
            assert!(q + 1e-12 >= last);
            last = q;
        }
    }

    #[test]
    fn domination_bound_formulas() {
        let (rho, sigma) = domination_bound(0.0, 3, 1).unwrap();
        assert_eq!((rho, sigma), (0.0, 0.0));
        let (rho, sigma) = domination_bound(1.0, 3, 1).unwrap();
        assert_eq!((rho, sigma), (1.0, 1.0));

        // 1 - p = 0.512 = 0.8^3 with exponent 3, so rho = 0.2^2.
        let (rho, _) = domination_bound(0.488, 2, 1).unwrap();
        assert!((rho - 0.04).abs() < 1e-12);

        for (delta, k) in [(2u32, 1u32), (4, 1), (4, 2)] {
            let mut last = -1.0;
            for i in 0..=100 {
                let p = i as f64 / 100.0;
                let (rho, sigma) = domination_bound(p, delta, k).unwrap();
                assert!(rho > last, "rho not strictly increasing at p={p}");
                last = rho;
                assert!(rho <= p + 1e-12 && p <= sigma + 1e-12);
                let (rho_flip, _) = domination_bound(1.0 - p, delta, k).unwrap();
                assert!((sigma - (1.0 - rho_flip)).abs() < 1e-12);
            }
        }
        assert!(domination_bound(0.5, 1, 1).is_err());
        assert!(domination_bound(0.5, 3, 0).is_err());
    }

    #[test]
    fn branching_bound_values() {
        assert_eq!(branching_bound_formula(3, 0.5, 0), 1.0);
        assert_eq!(branching_bound_formula(4, 0.0, 2), 0.0);
        let p = 2f64.sqrt() / 4.0;
        let b = branching_bound_formula(3, p, 2);
        assert!((b - 0.5625).abs() < 1e-12);
    }

    #[test]
    fn monotone_tables_are_pa() {
        for seed in 0..20 {
            let table = random_monotone_table(3, seed).unwrap();
            assert!(
                check_positive_association(&table).unwrap(),
                "monotone-factor table {seed} must be positively associated"
            );
        }
    }

    #[test]
    fn site_induced_cycle_is_pa_and_1_independent_only() {
        let table = site_induced_cycle_table(0.6).unwrap();
        let graph = SmallGraph::four_cycle();
        assert!(check_positive_association(&table).unwrap());
        assert!(check_k_independence(&table, &graph, 1).unwrap());
        assert!(!check_k_independence(&table, &graph, 0).unwrap());
        assert!(check_information_propagation(&table, &graph, 1).unwrap());
        assert!(!check_information_propagation(&table, &graph, 0).unwrap());
    }

    #[test]
    fn blended_table_breaks_pa() {
        let base = JointTable::product(3, 0.5).unwrap();
        let blended = anticorrelated_blend(&base, 0, 2, 0.5).unwrap();
        assert!(!check_positive_association(&blended).unwrap());
    }
}
