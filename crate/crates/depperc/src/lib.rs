//! Toolkit for positively associated, 1-independent percolation models.
//!
//! The crate computes survival probabilities of a monotone level chain on
//! diagonal boxes of the oriented square lattice, both exactly (a
//! transfer-matrix sweep over an exponential state space) and by
//! reproducible Monte Carlo; iterates the renormalization map whose escape
//! to 1 certifies percolation above a given marginal; constructs the
//! monotone couplings that sandwich the chain between simpler kernels,
//! together with an exact stochastic-domination decision procedure; and
//! ships brute-force checkers for positive association, k-independence, and
//! their joint reformulation on explicit tiny models.
//!
//! Modules:
//!
//! * [`geometry`] — diagonal boxes, level subsets, interval decomposition.
//! * [`latent`] — counter-based reproducible Bernoulli fields.
//! * [`chain`] — the level chain: exact transition rows and the monotone
//!   sampler.
//! * [`transfer`] — exact survival probabilities by column-wise sweeps.
//! * [`renorm`] — the renormalization map and its fixed-point iteration.
//! * [`couplings`] — level kernels, monotone couplings, domination checks.
//! * [`oracle`] — exhaustive ground truth on tiny instances.
//! * [`experiments`] — Monte Carlo estimators and table reproduction.
//!
//! The `depperc` binary exposes all of it on the command line; see the book
//! under `book/` for a guided tour.

pub mod chain;
pub mod couplings;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod latent;
pub mod oracle;
pub mod renorm;
pub mod transfer;

pub use chain::{run_chain, sample_next, survives, transition_prob, TransitionRow};
pub use couplings::{
    check_domination, couple_chain_below_kernel, couple_sitepair_below_chain, exact_edge_joint_law,
    exact_kernel_row, kernel_step, truncated_square_sample, CoupledStep, FiniteDistribution,
    LatticeWindow, LevelKernel, WindowBonds,
};
pub use error::{Error, Result};
pub use experiments::{
    branching_experiment, clopper_pearson, exact_survival_table, mc_survival, mc_survival_table,
    tree_moments, BranchingRow, ExactTableRow, McEstimate, McTableRow, TreeKernel,
    TreeMomentReport,
};
pub use geometry::{
    box_levels, interval_decompose, successors, BoxGeometry, Interval, LevelSubset,
};
pub use latent::LatentBits;
pub use oracle::{
    branching_bound_formula, brute_force_survival, check_information_propagation,
    check_k_independence, check_positive_association, domination_bound, JointTable, SmallGraph,
};
pub use renorm::{iterate, renorm_map, RenormStep, RenormTrajectory, Verdict};
pub use transfer::{dp_column_step, exact_survival, DpState, LevelDistribution, Parity};

// The book's code listings double as doc-tests so the guide cannot drift
// from the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(geometry, "../../../book/src/geometry.md");
    chapter!(level_chain, "../../../book/src/level-chain.md");
    chapter!(transfer_matrix, "../../../book/src/transfer-matrix.md");
    chapter!(renormalization, "../../../book/src/renormalization.md");
    chapter!(couplings, "../../../book/src/couplings.md");
    chapter!(finite_checks, "../../../book/src/finite-checks.md");
    chapter!(monte_carlo, "../../../book/src/monte-carlo.md");
    chapter!(cli, "../../../book/src/cli.md");
}
