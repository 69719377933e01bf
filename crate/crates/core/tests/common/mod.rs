//! Reference implementations written independently of the library, using
//! plain nested vectors instead of nalgebra wherever that is practical.
#![allow(dead_code)]

use netfolio::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Mat = Vec<Vec<f64>>;

pub fn to_rows(m: &DMatrix<f64>) -> Mat {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn from_rows(rows: &Mat) -> DMatrix<f64> {
    let (r, c) = (rows.len(), rows[0].len());
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `B Bᵀ` with standard normal `B` of size `n × n`, scaled by `1/n`.
pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| normal(rng));
    (&b * b.transpose()) / n as f64
}

pub fn random_returns(t: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let vols: Vec<f64> = (0..n).map(|_| rng.random_range(0.005..0.03)).collect();
    let loadings: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..2.0)).collect();
    let common: Vec<f64> = (0..t).map(|_| normal(rng)).collect();
    DMatrix::from_fn(t, n, |r, c| {
        vols[c] * (loadings[c] * common[r] + normal(rng)) + 1e-4 * c as f64
    })
}

// ---------------------------------------------------------------------------
// Ledoit–Wolf constant-correlation shrinkage, transcribed from the published
// reference routine (demeaned data, 1/t sample covariance, term1..term4).

/// Returns `(unclamped κ / t, clamped intensity)`.
pub fn ledoit_wolf_oracle(x: &Mat) -> (f64, f64) {
    let t = x.len();
    let n = x[0].len();
    let tf = t as f64;
    let means: Vec<f64> = (0..n)
        .map(|j| x.iter().map(|row| row[j]).sum::<f64>() / tf)
        .collect();
    let xc: Mat = x
        .iter()
        .map(|row| row.iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect();
    // x'x
    let xtx = |a: &dyn Fn(usize, usize) -> f64, b: &dyn Fn(usize, usize) -> f64| -> Mat {
        let mut out = vec![vec![0.0; n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..t).map(|r| a(r, i) * b(r, j)).sum();
            }
        }
        out
    };
    let plain = |r: usize, j: usize| xc[r][j];
    let squared = |r: usize, j: usize| xc[r][j] * xc[r][j];
    let cubed = |r: usize, j: usize| xc[r][j].powi(3);

    let xx = xtx(&plain, &plain);
    let sample: Mat = xx
        .iter()
        .map(|row| row.iter().map(|v| v / tf).collect())
        .collect();
    let var: Vec<f64> = (0..n).map(|i| sample[i][i]).collect();
    let sqrtvar: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();

    let mut rsum = 0.0;
    for i in 0..n {
        for j in 0..n {
            rsum += sample[i][j] / (sqrtvar[i] * sqrtvar[j]);
        }
    }
    let r_bar = (rsum - n as f64) / (n * (n - 1)) as f64;
    let mut prior = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            prior[i][j] = if i == j {
                var[i]
            } else {
                r_bar * sqrtvar[i] * sqrtvar[j]
            };
        }
    }

    // phiMat = y'y/t - 2 (x'x).*sample/t + sample.^2
    let yy = xtx(&squared, &squared);
    let mut phi_mat = vec![vec![0.0; n]; n];
    let mut phi = 0.0;
    for i in 0..n {
        for j in 0..n {
            phi_mat[i][j] =
                yy[i][j] / tf - 2.0 * xx[i][j] * sample[i][j] / tf + sample[i][j].powi(2);
            phi += phi_mat[i][j];
        }
    }

    let term1_raw = xtx(&cubed, &plain);
    let help: Mat = xx
        .iter()
        .map(|row| row.iter().map(|v| v / tf).collect())
        .collect();
    let mut theta = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let term1 = term1_raw[i][j] / tf;
            let term2 = help[i][i] * sample[i][j];
            let term3 = help[i][j] * var[i];
            let term4 = var[i] * sample[i][j];
            theta[i][j] = term1 - term2 - term3 + term4;
        }
    }
    let mut rho = (0..n).map(|i| phi_mat[i][i]).sum::<f64>();
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            off += (sqrtvar[j] / sqrtvar[i]) * theta[i][j];
        }
    }
    rho += r_bar * off;

    let mut gamma = 0.0;
    for i in 0..n {
        for j in 0..n {
            gamma += (sample[i][j] - prior[i][j]).powi(2);
        }
    }
    let kappa = (phi - rho) / gamma;
    (kappa / tf, (kappa / tf).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Exhaustive search over the 3-asset simplex.

/// Every point of `{x ≥ 0, Σx = 1}` whose coordinates are multiples of `1/steps`.
pub fn simplex_grid(steps: usize) -> impl Iterator<Item = [f64; 3]> {
    let h = 1.0 / steps as f64;
    (0..=steps).flat_map(move |i| {
        (0..=steps - i).map(move |j| {
            let (a, b) = (i as f64 * h, j as f64 * h);
            [a, b, (1.0 - a - b).max(0.0)]
        })
    })
}

pub fn quad3(m: &[[f64; 3]; 3], x: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += x[i] * m[i][j] * x[j];
        }
    }
    s
}

pub fn arr3(m: &DMatrix<f64>) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 3]; 3];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    a
}

/// Minimum of `f` over the grid.
pub fn grid_min(steps: usize, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
    simplex_grid(steps).map(|x| f(&x)).fold(f64::INFINITY, f64::min)
}

pub fn erc_spread_objective(m: &[[f64; 3]; 3], x: &[f64; 3]) -> f64 {
    let rc: Vec<f64> = (0..3)
        .map(|i| x[i] * (0..3).map(|j| m[i][j] * x[j]).sum::<f64>())
        .collect();
    let mut s = 0.0;
    for a in &rc {
        for b in &rc {
            s += (a - b).powi(2);
        }
    }
    s
}

pub fn diversification(m: &[[f64; 3]; 3], x: &[f64; 3]) -> f64 {
    let num: f64 = (0..3).map(|i| x[i] * m[i][i].sqrt()).sum();
    num / quad3(m, x).sqrt()
}

// ---------------------------------------------------------------------------
// Equal risk contribution by a damped cyclic fixed point: each coordinate of
// `y` moves halfway towards the positive root of
// `M_ii y_i² + (Σ_{j≠i} M_ij y_j) y_i − 1/N = 0`, then `x = y / Σy`.

pub fn erc_fixed_point_oracle(m: &Mat) -> Vec<f64> {
    let n = m.len();
    let b = 1.0 / n as f64;
    let mut y: Vec<f64> = (0..n).map(|i| 1.0 / m[i][i].sqrt()).collect();
    for _ in 0..2_000_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let a: f64 = (0..n).filter(|&j| j != i).map(|j| m[i][j] * y[j]).sum();
            let root = (-a + (a * a + 4.0 * m[i][i] * b).sqrt()) / (2.0 * m[i][i]);
            let next = 0.5 * y[i] + 0.5 * root;
            change = change.max((next - y[i]).abs() / next);
            y[i] = next;
        }
        if change < 1e-15 {
            break;
        }
    }
    let s: f64 = y.iter().sum();
    y.iter().map(|v| v / s).collect()
}

// ---------------------------------------------------------------------------
// Threshold-averaged clustering by trapezoid quadrature on a uniform grid.

fn watts(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|i| {
            let nb: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
            let k = nb.len();
            if k < 2 {
                return 0.0;
            }
            let mut tri = 0;
            for a in 0..k {
                for b in (a + 1)..k {
                    if adj[nb[a]][nb[b]] {
                        tri += 1;
                    }
                }
            }
            2.0 * tri as f64 / (k * (k - 1)) as f64
        })
        .collect()
}

pub fn clustering_quadrature(w: &Mat, points: usize) -> Vec<f64> {
    let n = w.len();
    let h = 2.0 / (points - 1) as f64;
    let mut acc = vec![0.0; n];
    for p in 0..points {
        let s = -1.0 + p as f64 * h;
        let adj: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| i != j && w[i][j] >= s).collect())
            .collect();
        let weight = if p == 0 || p == points - 1 { 0.5 } else { 1.0 };
        for (a, c) in acc.iter_mut().zip(watts(&adj)) {
            *a += weight * h * c;
        }
    }
    acc.iter().map(|a| a / 2.0).collect()
}

/// Symmetric weights uniform on `(-1, 1)` with a zero diagonal.
pub fn random_network(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.random_range(-1.0..1.0);
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    w
}

pub fn tickers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("A{i}")).collect()
}

pub fn vec_close(a: &DVector<f64>, b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn max_diff(a: &DVector<f64>, b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
