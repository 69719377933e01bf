//! Network-based portfolio selection.
//!
//! The crate builds Pearson correlation networks from covariance estimates,
//! condenses them into a threshold-integrated clustering coefficient per
//! asset, and turns those into an interconnectedness risk matrix `H` that can
//! replace the covariance matrix in any of the long-only allocation problems
//! (minimum variance, mean-variance, equal risk contribution, maximum
//! diversification). A rolling-window engine runs these strategies out of
//! sample and [`metrics`] summarises the resulting return series.

pub mod backtest;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod market_data;
pub mod metrics;
pub mod network;
pub mod optimizers;
pub mod synthetic;

pub use backtest::{
    build_inputs, full_suite, run_backtest, run_suite, BacktestConfig, BacktestResult,
    EstimatorKind, RiskModelKind, Strategy, StrategySpec,
};
pub use error::{Error, ErrorKind, Result};
pub use estimation::{
    constant_correlation_covariance, sample_covariance, sample_mean, shrink_covariance,
    shrinkage_intensity, CovarianceEstimate, CovarianceKind, LedoitWolfTerms, MeanEstimate,
};
pub use market_data::{
    load_prices_csv, load_returns_csv, log_returns, rolling_windows, CsvLayout, PriceTable,
    ReturnPanel, WindowPair, WindowSchedule, WindowUnit,
};
pub use metrics::{MetricsConfig, PerformanceReport, SummaryTable};
pub use network::{
    correlation_from_covariance, integrated_clustering, interconnectedness_matrix, risk_matrix_h,
    threshold_graph, watts_clustering, ClusteringNormalization, ClusteringVector,
    CorrelationNetwork, RiskModel, ThresholdGraph,
};
pub use optimizers::{
    equal_weights, solve_erc, solve_gmv, solve_mdp, solve_mv, Allocation, SolverConfig,
    SolverReport,
};

pub use nalgebra::{DMatrix, DVector};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
