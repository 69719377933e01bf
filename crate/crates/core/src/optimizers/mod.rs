//! Long-only, fully invested allocation problems on the unit simplex.
//!
//! Every solver takes a [`RiskModel`] whose matrix may be a covariance
//! estimate or the network matrix `H`; nothing here depends on which.

mod erc;
mod qp;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::MeanEstimate;
use crate::network::RiskModel;

pub use erc::{erc_objective, risk_contributions, solve_erc};
pub use qp::{kkt_residual, solve_simplex_qp, QpSolution};

/// Weights below this are treated as numerical dust.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub kkt_tolerance: f64,
    pub max_iterations: usize,
    /// Maximum relative spread `(max − min) / mean` of risk contributions.
    pub erc_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-8,
            max_iterations: 10_000,
            erc_tolerance: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kkt_tolerance > 0.0 && self.erc_tolerance > 0.0 && self.max_iterations > 0) {
            return Err(Error::Config(format!(
                "solver tolerances and iteration cap must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub weights: DVector<f64>,
    pub objective_value: f64,
    pub report: SolverReport,
}

/// Zero out dust and renormalise onto the simplex.
pub(crate) fn clean_weights(mut x: DVector<f64>) -> DVector<f64> {
    x.apply(|v| {
        if *v < WEIGHT_FLOOR {
            *v = 0.0
        }
    });
    let s = x.sum();
    if s > 0.0 {
        x /= s;
    }
    x
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    let n = m.nrows();
    if m.ncols() != n || n == 0 {
        return Err(Error::Contract(format!(
            "risk matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("risk matrix has non-finite entries".into()));
    }
    Ok(n)
}

/// Minimum `xᵀMx` on the simplex.
pub fn solve_gmv(risk: &RiskModel, cfg: &SolverConfig) -> Result<Allocation> {
    let n = check_square(&risk.matrix)?;
    let sol = solve_simplex_qp(&(&risk.matrix * 2.0), &DVector::zeros(n), cfg, "gmv")?;
    let weights = clean_weights(sol.x);
    let objective_value = crate::linalg::quad_form(&risk.matrix, &weights);
    Ok(Allocation {
        weights,
        objective_value,
        report: sol.report,
    })
}

/// Minimum `λ xᵀMx − (1 − λ) μᵀx` on the simplex.
pub fn solve_mv(
    risk: &RiskModel,
    mu: &MeanEstimate,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Allocation> {
    let n = check_square(&risk.matrix)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Contract(format!(
            "risk aversion λ = {lambda} outside [0, 1]"
        )));
    }
    if mu.mu.len() != n {
        return Err(Error::Contract(format!(
            "mean vector has length {} for {n} assets",
            mu.mu.len()
        )));
    }
    let q = &risk.matrix * (2.0 * lambda);
    let c = &mu.mu * -(1.0 - lambda);
    let sol = solve_simplex_qp(&q, &c, cfg, "mean-variance")?;
    let weights = clean_weights(sol.x);
    let objective_value = lambda * crate::linalg::quad_form(&risk.matrix, &weights)
        - (1.0 - lambda) * mu.mu.dot(&weights);
    Ok(Allocation {
        weights,
        objective_value,
        report: sol.report,
    })
}

/// `Σ x_i √M_ii / √(xᵀMx)`.
pub fn diversification_ratio(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let num: f64 = (0..x.len()).map(|i| x[i] * m[(i, i)].sqrt()).sum();
    num / crate::linalg::quad_form(m, x).sqrt()
}

/// Maximum diversification ratio on the simplex.
///
/// Solved through the correlation reduction: with `R = D^{-1/2} M D^{-1/2}`
/// and `D = diag(M)`, the minimum-variance weights `y` on `R` map to
/// `x ∝ y_i / √M_ii`, and `DR(x) = 1 / √(yᵀRy)`. The numerator volatilities
/// are `√M_ii`; for `M = H` these are `σ_i / ‖σ‖₂`, and the common factor
/// `‖σ‖₂` cancels in the ratio.
pub fn solve_mdp(risk: &RiskModel, cfg: &SolverConfig) -> Result<Allocation> {
    let n = check_square(&risk.matrix)?;
    let m = &risk.matrix;
    if let Some(i) = (0..n).find(|&i| !(m[(i, i)] > 0.0)) {
        return Err(Error::Contract(format!(
            "maximum diversification needs a positive diagonal; entry {i} is {}",
            m[(i, i)]
        )));
    }
    let d: Vec<f64> = (0..n).map(|i| m[(i, i)].sqrt()).collect();
    let r = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            m[(i, j)] / (d[i] * d[j])
        }
    });
    let sol = solve_simplex_qp(&(r * 2.0), &DVector::zeros(n), cfg, "max-diversification")?;
    let y = clean_weights(sol.x);
    let x = DVector::from_fn(n, |i, _| y[i] / d[i]);
    let weights = clean_weights(&x / x.sum());
    let objective_value = diversification_ratio(m, &weights);
    Ok(Allocation {
        weights,
        objective_value,
        report: sol.report,
    })
}

/// `1/N` everywhere; the last weight absorbs rounding so the budget is exact.
pub fn equal_weights(n: usize) -> Result<Allocation> {
    if n == 0 {
        return Err(Error::Contract("equal weights need at least one asset".into()));
    }
    let w = 1.0 / n as f64;
    let mut weights = DVector::from_element(n, w);
    weights[n - 1] = 1.0 - w * (n - 1) as f64;
    Ok(Allocation {
        weights,
        objective_value: 0.0,
        report: SolverReport {
            iterations: 0,
            kkt_residual: 0.0,
            converged: true,
        },
    })
}
