//! Convex quadratic programs on the unit simplex.
//!
//! `min ½ xᵀQx + cᵀx  s.t.  x ≥ 0, Σx = 1` is solved by accelerated
//! projected gradient (FISTA with function-value restarts). Every few
//! iterations the current support is handed to an active-set polish that
//! solves the equality-constrained KKT system on the support exactly and
//! adds or drops indices until the multipliers check out. The polished point
//! is accepted as soon as its KKT residual is within tolerance.
//!
//! The problem is rescaled so that `max(|Q|, |c|) = 1` before solving, so the
//! residual and the tolerance are scale free.

use nalgebra::{DMatrix, DVector};

use super::{SolverConfig, SolverReport};
use crate::error::{Error, Result};
use crate::linalg::project_simplex;

const POLISH_EVERY: usize = 10;

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub report: SolverReport,
}

fn objective(q: &DMatrix<f64>, c: &DVector<f64>, x: &DVector<f64>) -> f64 {
    0.5 * x.dot(&(q * x)) + c.dot(x)
}

/// Simplex KKT residual of `x` for `½ xᵀQx + cᵀx`.
///
/// With `g = Qx + c` and `ν = xᵀg`, the residual is the largest of
/// `|g_i − ν|` over the support and `(ν − g_i)⁺` off it.
pub fn kkt_residual(q: &DMatrix<f64>, c: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let g = q * x + c;
    let nu = x.dot(&g);
    g.iter()
        .zip(x.iter())
        .map(|(&gi, &xi)| {
            if xi > 0.0 {
                (gi - nu).abs()
            } else {
                (nu - gi).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Solve the equality-constrained problem restricted to `support`.
fn solve_on_support(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    support: &[usize],
) -> Option<DVector<f64>> {
    let m = support.len();
    let mut kkt = DMatrix::zeros(m + 1, m + 1);
    let mut rhs = DVector::zeros(m + 1);
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            kkt[(a, b)] = q[(i, j)];
        }
        kkt[(a, m)] = 1.0;
        kkt[(m, a)] = 1.0;
        rhs[a] = -c[i];
    }
    rhs[m] = 1.0;
    let svd = kkt.clone().svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let sol = svd.solve(&rhs, eps).ok()?;
    // Singular systems can be inconsistent; reject those.
    let resid = (&kkt * &sol - &rhs).amax();
    if !(resid <= 1e-9) {
        return None;
    }
    let mut x = DVector::zeros(q.nrows());
    for (a, &i) in support.iter().enumerate() {
        x[i] = sol[a];
    }
    Some(x)
}

/// Active-set refinement starting from the support of `start`.
fn polish(q: &DMatrix<f64>, c: &DVector<f64>, start: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let n = start.len();
    let mut support: Vec<usize> = (0..n).filter(|&i| start[i] > 0.0).collect();
    if support.is_empty() {
        return None;
    }
    for _ in 0..(3 * n + 3) {
        let x = solve_on_support(q, c, &support)?;
        // Drop the most negative component, if any.
        let worst = support
            .iter()
            .copied()
            .filter(|&i| x[i] < 0.0)
            .min_by(|&a, &b| x[a].total_cmp(&x[b]));
        if let Some(i) = worst {
            support.retain(|&j| j != i);
            if support.is_empty() {
                return None;
            }
            continue;
        }
        let g = q * &x + c;
        let nu = x.dot(&g);
        let entering = (0..n)
            .filter(|i| !support.contains(i))
            .filter(|&i| g[i] < nu - tol)
            .min_by(|&a, &b| g[a].total_cmp(&g[b]));
        match entering {
            Some(i) => {
                support.push(i);
                support.sort_unstable();
            }
            None => return Some(x),
        }
    }
    None
}

/// Solve `min ½ xᵀQx + cᵀx` over the unit simplex.
pub fn solve_simplex_qp(
    q: &DMatrix<f64>,
    c: &DVector<f64>,
    cfg: &SolverConfig,
    solver: &'static str,
) -> Result<QpSolution> {
    cfg.validate()?;
    let n = c.len();
    if q.shape() != (n, n) || n == 0 {
        return Err(Error::Contract(format!(
            "QP dimensions disagree: Q is {}x{}, c has {n} entries",
            q.nrows(),
            q.ncols()
        )));
    }
    let tol = cfg.kkt_tolerance;
    let scale = q.amax().max(c.amax());
    if n == 1 || scale == 0.0 {
        return Ok(QpSolution {
            x: DVector::from_element(n, 1.0 / n as f64),
            report: SolverReport {
                iterations: 0,
                kkt_residual: 0.0,
                converged: true,
            },
        });
    }
    let q = q / scale;
    let c = c / scale;

    // Gershgorin bound on the largest eigenvalue.
    let lipschitz = q
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-6);
    let step = 1.0 / lipschitz;

    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut fx = objective(&q, &c, &x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut best_resid = kkt_residual(&q, &c, &x);

    let accept = |cand: DVector<f64>, it: usize| -> Option<QpSolution> {
        let r = kkt_residual(&q, &c, &cand);
        (r <= tol).then(|| QpSolution {
            x: cand,
            report: SolverReport {
                iterations: it,
                kkt_residual: r,
                converged: true,
            },
        })
    };

    for it in 1..=cfg.max_iterations {
        let g = &q * &y + &c;
        let mut x_new = project_simplex(&(&y - &g * step));
        let mut f_new = objective(&q, &c, &x_new);
        if f_new > fx {
            // Restart momentum and take a plain projected step from x.
            t = 1.0;
            let gx = &q * &x + &c;
            x_new = project_simplex(&(&x - &gx * step));
            f_new = objective(&q, &c, &x_new);
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = &x_new + (&x_new - &x) * ((t - 1.0) / t_new);
        x = x_new;
        fx = f_new;
        t = t_new;

        if it % POLISH_EVERY == 1 || it == cfg.max_iterations {
            if let Some(p) = polish(&q, &c, &x, tol) {
                if objective(&q, &c, &p) <= fx + 1e-12 * (1.0 + fx.abs()) {
                    if let Some(sol) = accept(p, it) {
                        return Ok(sol);
                    }
                }
            }
            let r = kkt_residual(&q, &c, &x);
            best_resid = best_resid.min(r);
            if let Some(sol) = accept(x.clone(), it) {
                return Ok(sol);
            }
        }
    }
    Err(Error::NotConverged {
        solver,
        iterations: cfg.max_iterations,
        residual: best_resid,
        best: x.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_objective_hits_vertex() {
        let q = DMatrix::zeros(3, 3);
        let c = DVector::from_vec(vec![0.3, -0.1, 0.2]);
        let s = solve_simplex_qp(&q, &c, &SolverConfig::default(), "t").unwrap();
        for (got, want) in s.x.iter().zip([0.0, 1.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn interior_and_boundary_solutions_certify() {
        let q = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.3, 0.0, 0.3, 4.0]);
        let c = DVector::from_vec(vec![0.0, 0.0, -1.0]);
        let cfg = SolverConfig::default();
        let s = solve_simplex_qp(&q, &c, &cfg, "t").unwrap();
        assert!(s.report.converged);
        assert!(kkt_residual(&q, &c, &s.x) <= 1e-8 * q.amax());
        assert!((s.x.sum() - 1.0).abs() < 1e-12);
        let c = DVector::from_vec(vec![5.0, 0.0, 0.0]);
        let s = solve_simplex_qp(&q, &c, &cfg, "t").unwrap();
        assert_eq!(s.x[0], 0.0);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 3.0]);
        let cfg = SolverConfig {
            max_iterations: 1,
            kkt_tolerance: 1e-300,
            ..SolverConfig::default()
        };
        match solve_simplex_qp(&q, &DVector::zeros(2), &cfg, "gmv").unwrap_err() {
            Error::NotConverged { best, solver, .. } => {
                assert_eq!(solver, "gmv");
                assert_eq!(best.len(), 2);
            }
            e => panic!("{e}"),
        }
    }
}
