//! Counter-based latent randomness.
//!
//! Every sampler in this crate is a deterministic monotone function of a
//! field of i.i.d. Bernoulli(p) bits. [`LatentBits`] realizes that field as a
//! keyed hash: `bit(key)` is a pure function of `(seed, key)`, so trials are
//! reproducible and embarrassingly parallel without shared state. Keys are
//! small integer tuples (channel, level, column, ...); distinct keys give
//! independent bits.
//!
//! The underlying uniform is exposed as well so that common-random-number
//! couplings across a `p` grid share one uniform per site and differ only in
//! the threshold.

/// Key channels. Each consumer of latent bits owns a channel so that keys
/// never collide across samplers sharing a seed.
pub mod channel {
    /// Per-vertex bit of the level chain's monotone construction.
    pub const VERTEX: u64 = 1;
    /// Source-side site bit of the two-site edge kernel.
    pub const SITE_SRC: u64 = 2;
    /// Target-side site bit of the two-site edge kernel.
    pub const SITE_DST: u64 = 3;
    /// Independent per-edge bit of the product kernel.
    pub const EDGE: u64 = 4;
    /// Shared bit opening all outgoing edges of a vertex.
    pub const BLOCK_OUT: u64 = 5;
    /// Shared bit opening all incoming edges of a vertex.
    pub const BLOCK_IN: u64 = 6;
    /// Corner-site bit of the contracted truncated-square construction.
    pub const PORT: u64 = 7;
    /// Auxiliary acceptance variable used inside monotone couplings.
    pub const COUPLER: u64 = 8;
    /// Per-edge bit on the d-ary tree.
    pub const TREE_EDGE: u64 = 9;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. Stable across platforms, good avalanche.
#[inline]
fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^= x >> 31;
    x
}

/// A derived seed for an independent experiment cell.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    mix(seed ^ mix(salt ^ GOLDEN))
}

/// A seeded, reproducible field of i.i.d. Bernoulli(p) bits indexed by
/// integer keys.
#[derive(Clone, Copy, Debug)]
pub struct LatentBits {
    seed: u64,
    p: f64,
}

impl LatentBits {
    /// New field with the given seed and success probability.
    pub fn new(seed: u64, p: f64) -> crate::Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(crate::Error::invalid(format!(
                "bit probability must lie in [0,1], got {p}"
            )));
        }
        Ok(LatentBits { seed, p })
    }

    /// The marginal probability of each bit.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// The seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent substream (per trial, per experiment, ...).
    pub fn with_stream(&self, stream: u64) -> Self {
        LatentBits {
            seed: mix(self.seed ^ mix(stream ^ GOLDEN)),
            p: self.p,
        }
    }

    /// Same field, different threshold. Shares uniforms with `self`, so bits
    /// are coupled monotonically across thresholds.
    pub fn with_p(&self, p: f64) -> crate::Result<Self> {
        LatentBits::new(self.seed, p)
    }

    /// Uniform on [0,1) attached to `key`, independent across keys.
    pub fn uniform(&self, key: &[u64]) -> f64 {
        let mut state = self.seed ^ GOLDEN;
        for &part in key {
            state = mix(state ^ part.wrapping_mul(GOLDEN));
        }
        // 53 mantissa bits of the mixed state.
        (mix(state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Bernoulli(p) bit attached to `key`.
    #[inline]
    pub fn bit(&self, key: &[u64]) -> bool {
        self.uniform(key) < self.p
    }

    /// Bernoulli bit with an explicit threshold (used by kernels whose site
    /// parameter differs from the chain's marginal).
    #[inline]
    pub fn bit_with(&self, key: &[u64], p: f64) -> bool {
        self.uniform(key) < p
    }

    /// Bit of the level chain's construction: one bit per lattice vertex,
    /// keyed by level and column.
    #[inline]
    pub fn vertex_bit(&self, level: usize, col: usize) -> bool {
        self.bit(&[channel::VERTEX, level as u64, col as u64])
    }
}
