//! Shared inputs for the benchmarks.

use netfolio::synthetic::BlockMarket;
use netfolio::{sample_covariance, CovarianceEstimate, CorrelationNetwork, ReturnPanel};

/// A two-block synthetic panel with `n_assets` columns and `n_obs` rows.
pub fn panel(n_assets: usize, n_obs: usize, seed: u64) -> ReturnPanel {
    BlockMarket {
        n_assets,
        n_obs,
        first_block: n_assets / 2,
        ..BlockMarket::default()
    }
    .generate(seed)
}

/// Sample covariance of the first `n_obs` rows.
pub fn covariance(n_assets: usize, n_obs: usize, seed: u64) -> CovarianceEstimate {
    let p = panel(n_assets, n_obs, seed);
    sample_covariance(p.returns()).expect("synthetic panel has variance")
}

pub fn network(n_assets: usize, seed: u64) -> CorrelationNetwork {
    let p = panel(n_assets, 2 * n_assets + 10, seed);
    let cov = sample_covariance(p.returns()).expect("synthetic panel has variance");
    netfolio::correlation_from_covariance(&cov, p.tickers()).expect("positive variances")
}
