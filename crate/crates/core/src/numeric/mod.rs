//! Numerical building blocks: SPD factorization, the standard normal, and the
//! box-constrained optimizer used for likelihoods and acquisitions.

mod linalg;
mod normal;
mod optimize;
pub mod rng;

pub use linalg::{cholesky, solve_spd, symmetric_eigenvalues, CholeskyFactor, Matrix, MAX_JITTER};
pub use normal::{norm_cdf, norm_pdf};
pub use optimize::{maximize_box, pattern_search, polish_starts, search_box, BoxOptimizerConfig, BoxOptimum};
pub use rng::{derive_seed, seeded_rng, Rng};

/// Pairwise (cascade) summation; fixed association order independent of
/// threading.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}
