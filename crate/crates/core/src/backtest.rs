//! Rolling-window out-of-sample engine.
//!
//! For every window the in-sample rows feed the estimator and risk model
//! named by a [`StrategySpec`], the allocation problem is solved, and the
//! weights are bought and held over the out-of-sample rows. Asset
//! log-returns are converted to simple returns `g = eᣴ − 1` for the
//! cross-sectional aggregation; between rebalances weights drift as
//! `w ← w ∘ (1 + g) / (1 + r_p)`.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    constant_correlation_covariance, sample_covariance, sample_mean, shrink_covariance,
    shrinkage_intensity, CovarianceEstimate, MeanEstimate,
};
use crate::market_data::{ReturnPanel, WindowPair, WindowSchedule};
use crate::network::{
    correlation_from_covariance, integrated_clustering_with, interconnectedness_matrix,
    risk_matrix_h, ClusteringNormalization, ClusteringVector, CorrelationNetwork, RiskModel,
};
use crate::optimizers::{
    equal_weights, solve_erc, solve_gmv, solve_mdp, solve_mv, Allocation, SolverConfig,
};

pub use crate::network::RiskModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    MeanVariance { lambda: f64 },
    Gmv,
    Erc,
    Mdp,
    EqualWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Sample,
    Shrinkage,
}

/// One row of the strategy grid: problem, covariance estimator, risk model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub strategy: Strategy,
    pub estimator: EstimatorKind,
    pub risk_model: RiskModelKind,
}

impl StrategySpec {
    pub fn new(strategy: Strategy, estimator: EstimatorKind, risk_model: RiskModelKind) -> Self {
        Self {
            strategy,
            estimator,
            risk_model,
        }
    }

    pub fn equal_weight() -> Self {
        Self::new(
            Strategy::EqualWeight,
            EstimatorKind::Sample,
            RiskModelKind::Standard,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if let Strategy::MeanVariance { lambda } = self.strategy {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::Config(format!(
                    "{self}: λ = {lambda} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Parse a label, using `default_lambda` for a bare `MV`.
    pub fn parse_with_lambda(label: &str, default_lambda: Option<f64>) -> Result<Self> {
        let label = label.trim();
        if label.eq_ignore_ascii_case("EW") {
            return Ok(Self::equal_weight());
        }
        let bad = || Error::Config(format!("unrecognised strategy label `{label}`"));
        let (model, rest) = if let Some(r) = label.strip_prefix("NB-") {
            (RiskModelKind::Network, r)
        } else if let Some(r) = label.strip_prefix("S-") {
            (RiskModelKind::Standard, r)
        } else {
            return Err(bad());
        };
        let (est, problem) = rest.split_once(' ').ok_or_else(bad)?;
        let estimator = match est.to_ascii_lowercase().as_str() {
            "sample" => EstimatorKind::Sample,
            "shrinkage" => EstimatorKind::Shrinkage,
            _ => return Err(bad()),
        };
        let problem = problem.trim();
        let strategy = match problem.to_ascii_uppercase().as_str() {
            "GMV" => Strategy::Gmv,
            "ERC" => Strategy::Erc,
            "MDP" => Strategy::Mdp,
            "MV" => Strategy::MeanVariance {
                lambda: default_lambda.ok_or_else(|| {
                    Error::Config(format!("`{label}` needs a trade-off, e.g. `MV(0.5)`"))
                })?,
            },
            _ => {
                let inner = problem
                    .strip_prefix("MV(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let lambda = inner.trim().parse::<f64>().map_err(|_| bad())?;
                Strategy::MeanVariance { lambda }
            }
        };
        Ok(Self::new(strategy, estimator, model))
    }

    /// Label with characters unsafe in file names replaced.
    pub fn file_stem(&self) -> String {
        self.to_string()
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                    c
                } else {
                    '_'
                }
            })
            .collect::<String>()
            .trim_end_matches('_')
            .to_string()
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strategy == Strategy::EqualWeight {
            return f.write_str("EW");
        }
        let model = match self.risk_model {
            RiskModelKind::Standard => "S",
            RiskModelKind::Network => "NB",
        };
        let est = match self.estimator {
            EstimatorKind::Sample => "sample",
            EstimatorKind::Shrinkage => "shrinkage",
        };
        write!(f, "{model}-{est} ")?;
        match self.strategy {
            Strategy::MeanVariance { lambda } => write!(f, "MV({lambda})"),
            Strategy::Gmv => f.write_str("GMV"),
            Strategy::Erc => f.write_str("ERC"),
            Strategy::Mdp => f.write_str("MDP"),
            Strategy::EqualWeight => unreachable!(),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_lambda(s, None)
    }
}

/// The 17 configurations of the comparison grid, mean-variance at `lambda`.
pub fn full_suite(lambda: f64) -> Vec<StrategySpec> {
    let problems = [
        Strategy::MeanVariance { lambda },
        Strategy::Mdp,
        Strategy::Erc,
        Strategy::Gmv,
    ];
    let mut out = Vec::with_capacity(17);
    for strategy in problems {
        for (model, est) in [
            (RiskModelKind::Standard, EstimatorKind::Sample),
            (RiskModelKind::Standard, EstimatorKind::Shrinkage),
            (RiskModelKind::Network, EstimatorKind::Sample),
            (RiskModelKind::Network, EstimatorKind::Shrinkage),
        ] {
            out.push(StrategySpec::new(strategy, est, model));
        }
    }
    out.push(StrategySpec::equal_weight());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub schedule: WindowSchedule,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub clustering: ClusteringNormalization,
    /// Reset to the window optimum every day instead of letting weights drift.
    #[serde(default)]
    pub rebalance_daily: bool,
}

impl BacktestConfig {
    pub fn new(schedule: WindowSchedule) -> Self {
        Self {
            schedule,
            solver: SolverConfig::default(),
            clustering: ClusteringNormalization::Average,
            rebalance_daily: false,
        }
    }
}

/// Network artefacts produced on the way to `H`.
#[derive(Debug, Clone)]
pub struct NetworkInputs {
    pub network: CorrelationNetwork,
    pub clustering: ClusteringVector,
    pub interconnectedness: DMatrix<f64>,
}

/// Everything estimated from one in-sample window for one spec.
#[derive(Debug, Clone)]
pub struct ModelInputs {
    pub mean: MeanEstimate,
    pub covariance: CovarianceEstimate,
    pub network: Option<NetworkInputs>,
    pub risk: RiskModel,
}

/// Sample, constant-correlation and shrunk covariances for one window.
pub fn estimate_covariances(
    window: &DMatrix<f64>,
    tickers: &[String],
) -> Result<(CovarianceEstimate, CovarianceEstimate, CovarianceEstimate)> {
    let sample = sample_covariance(window)?;
    if let Some(&i) = sample.zero_variance().first() {
        return Err(Error::ZeroVariance {
            ticker: tickers[i].clone(),
        });
    }
    let target = constant_correlation_covariance(&sample)?;
    let kappa = shrinkage_intensity(window, &sample, &target)?;
    let shrunk = shrink_covariance(&sample, &target, kappa)?;
    Ok((sample, target, shrunk))
}

pub fn prepare_inputs(
    window: &DMatrix<f64>,
    tickers: &[String],
    spec: &StrategySpec,
    clustering: ClusteringNormalization,
) -> Result<ModelInputs> {
    let mean = sample_mean(window)?;
    let sample = sample_covariance(window)?;
    if let Some(&i) = sample.zero_variance().first() {
        return Err(Error::ZeroVariance {
            ticker: tickers[i].clone(),
        });
    }
    let covariance = match spec.estimator {
        EstimatorKind::Sample => sample.clone(),
        EstimatorKind::Shrinkage => {
            let target = constant_correlation_covariance(&sample)?;
            let kappa = shrinkage_intensity(window, &sample, &target)?;
            shrink_covariance(&sample, &target, kappa)?
        }
    };
    let (risk, network) = match spec.risk_model {
        RiskModelKind::Standard => (RiskModel::standard(&covariance), None),
        RiskModelKind::Network => {
            let network = correlation_from_covariance(&covariance, tickers)?;
            let clustering = integrated_clustering_with(&network, clustering);
            let interconnectedness = interconnectedness_matrix(&clustering);
            let risk = risk_matrix_h(&interconnectedness, &sample.vols)?;
            (
                risk,
                Some(NetworkInputs {
                    network,
                    clustering,
                    interconnectedness,
                }),
            )
        }
    };
    Ok(ModelInputs {
        mean,
        covariance,
        network,
        risk,
    })
}

/// Mean and risk model for `spec` on an in-sample window.
pub fn build_inputs(
    window: &DMatrix<f64>,
    tickers: &[String],
    spec: &StrategySpec,
) -> Result<(MeanEstimate, RiskModel)> {
    let inputs = prepare_inputs(window, tickers, spec, ClusteringNormalization::Average)?;
    Ok((inputs.mean, inputs.risk))
}

/// Solve `spec` on one in-sample window.
pub fn allocate(
    window: &DMatrix<f64>,
    tickers: &[String],
    spec: &StrategySpec,
    cfg: &BacktestConfig,
) -> Result<Allocation> {
    spec.validate()?;
    if spec.strategy == Strategy::EqualWeight {
        return equal_weights(window.ncols());
    }
    let inputs = prepare_inputs(window, tickers, spec, cfg.clustering)?;
    match spec.strategy {
        Strategy::Gmv => solve_gmv(&inputs.risk, &cfg.solver),
        Strategy::Erc => solve_erc(&inputs.risk, &cfg.solver),
        Strategy::Mdp => solve_mdp(&inputs.risk, &cfg.solver),
        Strategy::MeanVariance { lambda } => {
            solve_mv(&inputs.risk, &inputs.mean, lambda, &cfg.solver)
        }
        Strategy::EqualWeight => unreachable!(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    pub spec: StrategySpec,
    pub tickers: Vec<String>,
    pub windows: Vec<(WindowPair, Allocation)>,
    pub dates: Vec<NaiveDate>,
    /// Daily simple portfolio returns.
    pub oos_returns: Vec<f64>,
    /// Wealth path starting from 1 before the first out-of-sample day.
    pub cumulative: Vec<f64>,
}

impl BacktestResult {
    /// Wealth multiple accumulated within each window.
    pub fn window_growth(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.windows.len());
        let mut pos = 0;
        for (w, _) in &self.windows {
            let len = w.out_of_sample.len();
            out.push(
                self.oos_returns[pos..pos + len]
                    .iter()
                    .map(|r| 1.0 + r)
                    .product(),
            );
            pos += len;
        }
        out
    }
}

fn window_error(panel: &ReturnPanel, w: &WindowPair, err: Error) -> Error {
    Error::Window {
        index: w.index,
        start: panel.dates()[w.in_sample.start].to_string(),
        end: panel.dates()[w.out_of_sample.end - 1].to_string(),
        source: Box::new(err),
    }
}

/// Buy-and-hold the allocation over the rows in `range`; appends to `out`.
fn hold(
    panel: &ReturnPanel,
    range: std::ops::Range<usize>,
    weights: &DVector<f64>,
    rebalance_daily: bool,
    out: &mut Vec<f64>,
) -> Result<()> {
    let r = panel.returns();
    let mut w = weights.clone();
    for t in range {
        let g = DVector::from_fn(w.len(), |i, _| r[(t, i)].exp_m1());
        let rp = w.dot(&g);
        if !(rp > -1.0) {
            return Err(Error::Data(format!(
                "portfolio lost all value on {}",
                panel.dates()[t]
            )));
        }
        out.push(rp);
        if !rebalance_daily {
            w = w.component_mul(&g.add_scalar(1.0)) / (1.0 + rp);
        }
    }
    Ok(())
}

/// Run `spec` over a precomputed window schedule.
pub fn run_on_windows(
    panel: &ReturnPanel,
    windows: &[WindowPair],
    spec: &StrategySpec,
    cfg: &BacktestConfig,
) -> Result<BacktestResult> {
    spec.validate()?;
    if windows.is_empty() {
        return Err(Error::Config("no complete window fits the panel".into()));
    }
    let allocations: Vec<Allocation> = windows
        .par_iter()
        .map(|w| {
            allocate(&panel.rows(w.in_sample.clone()), panel.tickers(), spec, cfg)
                .map_err(|e| window_error(panel, w, e))
        })
        .collect::<Result<_>>()?;

    let mut dates = Vec::new();
    let mut oos_returns = Vec::new();
    for (w, a) in windows.iter().zip(&allocations) {
        dates.extend_from_slice(&panel.dates()[w.out_of_sample.clone()]);
        hold(
            panel,
            w.out_of_sample.clone(),
            &a.weights,
            cfg.rebalance_daily,
            &mut oos_returns,
        )
        .map_err(|e| window_error(panel, w, e))?;
    }
    let cumulative = oos_returns
        .iter()
        .scan(1.0, |acc, r| {
            *acc *= 1.0 + r;
            Some(*acc)
        })
        .collect();
    Ok(BacktestResult {
        spec: *spec,
        tickers: panel.tickers().to_vec(),
        windows: windows.iter().cloned().zip(allocations).collect(),
        dates,
        oos_returns,
        cumulative,
    })
}

pub fn run_backtest(
    panel: &ReturnPanel,
    spec: &StrategySpec,
    cfg: &BacktestConfig,
) -> Result<BacktestResult> {
    cfg.solver.validate()?;
    let windows = cfg.schedule.windows(panel)?;
    run_on_windows(panel, &windows, spec, cfg)
}

/// Run every spec on a shared window schedule. The outer error covers the
/// schedule; each spec succeeds or fails on its own.
pub fn run_suite(
    panel: &ReturnPanel,
    specs: &[StrategySpec],
    cfg: &BacktestConfig,
) -> Result<Vec<Result<BacktestResult>>> {
    if specs.is_empty() {
        return Err(Error::Config("empty strategy list".into()));
    }
    cfg.solver.validate()?;
    let windows = cfg.schedule.windows(panel)?;
    Ok(specs
        .par_iter()
        .map(|spec| run_on_windows(panel, &windows, spec, cfg))
        .collect())
}
