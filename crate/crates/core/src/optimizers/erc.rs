//! Equal risk contribution.
//!
//! The long-only ERC portfolio is `x = y / Σy` where `y > 0` minimises the
//! strictly convex function `½ yᵀMy − (1/N) Σ ln y_i`. Its stationarity
//! condition `y_i (My)_i = 1/N` is exactly equality of risk contributions,
//! so a damped Newton method on it drives the least-squares spread objective
//! to zero. A damped multiplicative fixed point is kept as a fallback.

use nalgebra::{DMatrix, DVector};

use super::{clean_weights, Allocation, SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::network::RiskModel;

/// `σ_i(x) = x_i (Mx)_i`.
pub fn risk_contributions(m: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    x.component_mul(&(m * x))
}

/// `Σ_i Σ_j (σ_i(x) − σ_j(x))²`.
pub fn erc_objective(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let rc = risk_contributions(m, x);
    let mut total = 0.0;
    for a in rc.iter() {
        for b in rc.iter() {
            total += (a - b) * (a - b);
        }
    }
    total
}

/// `(max − min) / mean` of the risk contributions; infinite if the mean is not positive.
fn relative_spread(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let rc = risk_contributions(m, x);
    let mean = rc.mean();
    if !(mean > 0.0) {
        return f64::INFINITY;
    }
    (rc.max() - rc.min()) / mean
}

fn barrier_value(m: &DMatrix<f64>, y: &DVector<f64>, b: f64) -> f64 {
    0.5 * y.dot(&(m * y)) - b * y.iter().map(|v| v.ln()).sum::<f64>()
}

fn newton(m: &DMatrix<f64>, cfg: &SolverConfig) -> Option<(DVector<f64>, usize)> {
    let n = m.nrows();
    let b = 1.0 / n as f64;
    let mut y = DVector::from_fn(n, |i, _| 1.0 / m[(i, i)].sqrt());
    // Start on the scale where Σ y_i (My)_i = 1.
    y *= (1.0 / y.dot(&(m * &y))).sqrt();
    let mut f = barrier_value(m, &y, b);
    for it in 1..=cfg.max_iterations {
        let g = m * &y - y.map(|v| b / v);
        let mut h = m.clone();
        for i in 0..n {
            h[(i, i)] += b / (y[i] * y[i]);
        }
        let d = -h.cholesky()?.solve(&g);
        let decrement = -g.dot(&d);
        if !decrement.is_finite() {
            return None;
        }
        if decrement < 1e-28 {
            return Some((y, it));
        }
        let mut alpha = 1.0;
        loop {
            let cand = &y + &d * alpha;
            if cand.iter().all(|&v| v > 0.0) {
                let fc = barrier_value(m, &cand, b);
                if fc <= f - 1e-4 * alpha * decrement {
                    y = cand;
                    f = fc;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                // No further progress possible in floating point.
                return Some((y, it));
            }
        }
    }
    Some((y, cfg.max_iterations))
}

fn fixed_point(m: &DMatrix<f64>, cfg: &SolverConfig) -> (DVector<f64>, usize) {
    let n = m.nrows();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for it in 1..=cfg.max_iterations {
        let rc = risk_contributions(m, &x);
        let target = rc.mean();
        if !(target > 0.0) || rc.iter().any(|&r| !(r > 0.0)) {
            return (x, it);
        }
        x = DVector::from_fn(n, |i, _| x[i] * (target / rc[i]).sqrt());
        x /= x.sum();
        if relative_spread(m, &x) <= 0.01 * cfg.erc_tolerance {
            return (x, it);
        }
    }
    (x, cfg.max_iterations)
}

pub fn solve_erc(risk: &RiskModel, cfg: &SolverConfig) -> Result<Allocation> {
    cfg.validate()?;
    let m = &risk.matrix;
    let n = m.nrows();
    if m.ncols() != n || n == 0 {
        return Err(Error::Contract(format!(
            "risk matrix must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(i) = (0..n).find(|&i| !(m[(i, i)] > 0.0 && m[(i, i)].is_finite())) {
        return Err(Error::Contract(format!(
            "equal risk contribution needs a positive diagonal; entry {i} is {}",
            m[(i, i)]
        )));
    }
    let scaled = m / m.diagonal().max();

    let mut candidates = Vec::new();
    if let Some((y, it)) = newton(&scaled, cfg) {
        candidates.push((clean_weights(&y / y.sum()), it));
    }
    let needs_fallback = candidates
        .first()
        .is_none_or(|(x, _)| relative_spread(&scaled, x) > cfg.erc_tolerance);
    if needs_fallback {
        let (x, it) = fixed_point(&scaled, cfg);
        candidates.push((clean_weights(x), it));
    }
    let (x, iterations) = candidates
        .into_iter()
        .min_by(|a, b| relative_spread(&scaled, &a.0).total_cmp(&relative_spread(&scaled, &b.0)))
        .expect("at least one candidate");
    let spread = relative_spread(&scaled, &x);
    if !(spread <= cfg.erc_tolerance) {
        return Err(Error::NotConverged {
            solver: "erc",
            iterations,
            residual: spread,
            best: x.iter().copied().collect(),
        });
    }
    Ok(Allocation {
        objective_value: erc_objective(m, &x),
        weights: x,
        report: SolverReport {
            iterations,
            kkt_residual: spread,
            converged: true,
        },
    })
}
