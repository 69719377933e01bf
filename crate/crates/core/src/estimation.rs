//! Mean and covariance estimation over an in-sample window.
//!
//! Covariances come in three flavours: the unbiased sample estimator, the
//! constant-correlation target (every pairwise correlation replaced by the
//! average sample correlation, variances untouched) and the linear shrinkage
//! of the former toward the latter.
//!
//! # Shrinkage intensity
//!
//! [`shrinkage_intensity`] implements the Ledoit–Wolf (2004) asymptotically
//! optimal intensity for the constant-correlation target. With `X` the
//! demeaned `T x N` window, `S = XᵀX / T`, `sᵢ = √Sᵢᵢ`, `r̄` the average
//! off-diagonal correlation of `S` and `F` the constant-correlation matrix
//! built from `S`:
//!
//! ```text
//! π̂  = Σᵢⱼ (1/T) Σₜ (xₜᵢ xₜⱼ − Sᵢⱼ)²
//! θᵢⱼ = (1/T) Σₜ (xₜᵢ² − Sᵢᵢ)(xₜᵢ xₜⱼ − Sᵢⱼ)
//! ρ̂  = Σᵢ π̂ᵢᵢ + r̄ Σ_{i≠j} (sⱼ / sᵢ) θᵢⱼ
//! γ̂  = ‖F − S‖²_F
//! κ   = clamp((π̂ − ρ̂) / γ̂ / T, 0, 1)
//! ```
//!
//! The reference uses the `1/T` divisor. The ratio is invariant to a common
//! rescaling of `S` and `F`, so the same κ applies unchanged to the unbiased
//! (`1/(T−1)`) matrices used everywhere else in this crate.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Per-asset sample means of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub mu: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Sample,
    ConstantCorrelation,
    Shrinkage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub sigma: DMatrix<f64>,
    pub kind: CovarianceKind,
    /// Shrinkage intensity, set only for [`CovarianceKind::Shrinkage`].
    pub kappa: Option<f64>,
    pub vols: DVector<f64>,
}

impl CovarianceEstimate {
    fn from_sigma(sigma: DMatrix<f64>, kind: CovarianceKind, kappa: Option<f64>) -> Self {
        let vols = DVector::from_iterator(
            sigma.nrows(),
            (0..sigma.nrows()).map(|i| sigma[(i, i)].max(0.0).sqrt()),
        );
        Self {
            sigma,
            kind,
            kappa,
            vols,
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// Column indices whose variance is exactly zero.
    pub fn zero_variance(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| !(self.sigma[(i, i)] > 0.0))
            .collect()
    }
}

fn require_rows(window: &DMatrix<f64>) -> Result<()> {
    if window.nrows() < 2 {
        return Err(Error::Estimation(format!(
            "window needs at least 2 rows, got {}",
            window.nrows()
        )));
    }
    Ok(())
}

pub fn sample_mean(window: &DMatrix<f64>) -> Result<MeanEstimate> {
    require_rows(window)?;
    let t = window.nrows() as f64;
    let mu = DVector::from_iterator(
        window.ncols(),
        window.column_iter().map(|c| c.sum() / t),
    );
    Ok(MeanEstimate { mu })
}

/// Unbiased sample covariance (divisor `T − 1`).
pub fn sample_covariance(window: &DMatrix<f64>) -> Result<CovarianceEstimate> {
    require_rows(window)?;
    let t = window.nrows();
    let mean = sample_mean(window)?.mu;
    let mut centered = window.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let mut sigma = centered.tr_mul(&centered) / (t as f64 - 1.0);
    // Exact symmetry.
    for i in 0..sigma.nrows() {
        for j in 0..i {
            sigma[(i, j)] = sigma[(j, i)];
        }
    }
    Ok(CovarianceEstimate::from_sigma(
        sigma,
        CovarianceKind::Sample,
        None,
    ))
}

fn require_positive_variances(cov: &CovarianceEstimate) -> Result<()> {
    if let Some(&i) = cov.zero_variance().first() {
        return Err(Error::Estimation(format!(
            "asset column {i} has zero variance; correlations are undefined"
        )));
    }
    Ok(())
}

/// Average of the distinct off-diagonal correlations implied by `sigma`.
fn average_correlation(sigma: &DMatrix<f64>) -> f64 {
    let n = sigma.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += sigma[(i, j)] / (sigma[(i, i)] * sigma[(j, j)]).sqrt();
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Constant-correlation covariance built from `sample`.
///
/// With fewer than three assets the average correlation is the single
/// pairwise correlation, so the sample matrix is returned verbatim.
pub fn constant_correlation_covariance(sample: &CovarianceEstimate) -> Result<CovarianceEstimate> {
    require_positive_variances(sample)?;
    let n = sample.dim();
    if n < 3 {
        let mut out = sample.clone();
        out.kind = CovarianceKind::ConstantCorrelation;
        out.kappa = None;
        return Ok(out);
    }
    let rho_bar = average_correlation(&sample.sigma);
    let vols = &sample.vols;
    let sigma = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            sample.sigma[(i, i)]
        } else {
            vols[i] * vols[j] * rho_bar
        }
    });
    Ok(CovarianceEstimate {
        sigma,
        kind: CovarianceKind::ConstantCorrelation,
        kappa: None,
        vols: vols.clone(),
    })
}

/// Ledoit–Wolf optimal intensity toward the constant-correlation target,
/// clamped to `[0, 1]`. See the module docs for the estimator.
pub fn shrinkage_intensity(
    window: &DMatrix<f64>,
    sample: &CovarianceEstimate,
    target: &CovarianceEstimate,
) -> Result<f64> {
    require_rows(window)?;
    let n = window.ncols();
    if sample.dim() != n || target.dim() != n {
        return Err(Error::Contract(format!(
            "window has {n} assets but estimates are {}x{} and {}x{}",
            sample.dim(),
            sample.dim(),
            target.dim(),
            target.dim()
        )));
    }
    if sample.sigma == target.sigma {
        return Ok(0.0);
    }
    require_positive_variances(sample)?;
    Ok(LedoitWolfTerms::from_window(window)?.intensity())
}

/// Ingredients of the Ledoit–Wolf constant-correlation intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedoitWolfTerms {
    pub pi_hat: f64,
    pub rho_hat: f64,
    pub gamma_hat: f64,
    /// `‖S‖²_F`, used to decide when `γ̂` is numerically zero.
    pub scale: f64,
    pub observations: usize,
}

impl LedoitWolfTerms {
    pub fn from_window(window: &DMatrix<f64>) -> Result<Self> {
        require_rows(window)?;
        let (t_len, n) = window.shape();
        let t = t_len as f64;
        let mut x = window.clone();
        for mut col in x.column_iter_mut() {
            let m = col.sum() / t;
            col.add_scalar_mut(-m);
        }
        let s = x.tr_mul(&x) / t;
        if let Some(i) = (0..n).find(|&i| !(s[(i, i)] > 0.0)) {
            return Err(Error::Estimation(format!(
                "asset column {i} has zero variance; correlations are undefined"
            )));
        }
        let sd: Vec<f64> = (0..n).map(|i| s[(i, i)].sqrt()).collect();
        let r_bar = if n > 1 { average_correlation(&s) } else { 0.0 };

        let mut pi_hat = 0.0;
        let mut pi_diag = 0.0;
        let mut rho_off = 0.0;
        let mut gamma_hat = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut pi_ij = 0.0;
                let mut theta_ij = 0.0;
                for r in 0..t_len {
                    let cross = x[(r, i)] * x[(r, j)] - s[(i, j)];
                    pi_ij += cross * cross;
                    theta_ij += (x[(r, i)] * x[(r, i)] - s[(i, i)]) * cross;
                }
                pi_ij /= t;
                theta_ij /= t;
                pi_hat += pi_ij;
                if i == j {
                    pi_diag += pi_ij;
                } else {
                    rho_off += sd[j] / sd[i] * theta_ij;
                    let f_ij = r_bar * sd[i] * sd[j];
                    gamma_hat += (f_ij - s[(i, j)]).powi(2);
                }
            }
        }
        Ok(Self {
            pi_hat,
            rho_hat: pi_diag + r_bar * rho_off,
            gamma_hat,
            scale: s.norm_squared(),
            observations: t_len,
        })
    }

    /// `(π̂ − ρ̂) / γ̂ / T` before clamping.
    pub fn raw_intensity(&self) -> f64 {
        (self.pi_hat - self.rho_hat) / self.gamma_hat / self.observations as f64
    }

    /// Clamped intensity; zero when the target coincides with the sample.
    pub fn intensity(&self) -> f64 {
        if !(self.gamma_hat > f64::EPSILON * f64::EPSILON * self.scale) {
            return 0.0;
        }
        self.raw_intensity().clamp(0.0, 1.0)
    }
}

/// `κ·target + (1 − κ)·sample`, entrywise.
pub fn shrink_covariance(
    sample: &CovarianceEstimate,
    target: &CovarianceEstimate,
    kappa: f64,
) -> Result<CovarianceEstimate> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Contract(format!(
            "shrinkage intensity {kappa} outside [0, 1]"
        )));
    }
    if sample.sigma.shape() != target.sigma.shape() {
        return Err(Error::Contract(
            "sample and target covariance shapes differ".into(),
        ));
    }
    let sigma = sample
        .sigma
        .zip_map(&target.sigma, |s, f| kappa * f + (1.0 - kappa) * s);
    Ok(CovarianceEstimate::from_sigma(
        sigma,
        CovarianceKind::Shrinkage,
        Some(kappa),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn means() {
        assert_abs_diff_eq!(sample_mean(&col(&[0.01, 0.03])).unwrap().mu[0], 0.02);
        assert_abs_diff_eq!(
            sample_mean(&col(&[0.01, -0.01, 0.03])).unwrap().mu[0],
            0.01,
            epsilon = 1e-17
        );
        let zero = sample_mean(&DMatrix::zeros(5, 3)).unwrap();
        assert!(zero.mu.iter().all(|&m| m == 0.0));
        assert!(sample_mean(&DMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn two_asset_covariance_by_hand() {
        let w = DMatrix::from_row_slice(2, 2, &[0.01, 0.02, -0.01, -0.02]);
        let c = sample_covariance(&w).unwrap();
        assert_abs_diff_eq!(c.sigma[(0, 0)], 2e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(c.sigma[(0, 1)], 4e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(c.sigma[(1, 0)], 4e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(c.sigma[(1, 1)], 8e-4, epsilon = 1e-18);
        assert_eq!(c.kind, CovarianceKind::Sample);
    }

    #[test]
    fn duplicated_asset_gives_constant_matrix() {
        let base = [0.01, -0.02, 0.005, 0.03];
        let w = DMatrix::from_fn(4, 3, |r, _| base[r]);
        let c = sample_covariance(&w).unwrap();
        let v = c.sigma[(0, 0)];
        assert!(c.sigma.iter().all(|&x| x == v));
    }

    #[test]
    fn zero_variance_is_flagged() {
        let w = DMatrix::from_row_slice(3, 2, &[0.01, 0.0, 0.02, 0.0, -0.01, 0.0]);
        let c = sample_covariance(&w).unwrap();
        assert_eq!(c.zero_variance(), vec![1]);
        assert!(constant_correlation_covariance(&c).is_err());
    }

    #[test]
    fn constant_correlation_targets() {
        // Unit variances, correlations 0.2, 0.4, 0.6.
        let sigma = DMatrix::from_row_slice(
            3,
            3,
            &[1.0, 0.2, 0.4, 0.2, 1.0, 0.6, 0.4, 0.6, 1.0],
        ) * 4.0;
        let sample = CovarianceEstimate::from_sigma(sigma, CovarianceKind::Sample, None);
        let cc = constant_correlation_covariance(&sample).unwrap();
        for i in 0..3 {
            assert_eq!(cc.sigma[(i, i)], 4.0);
            for j in 0..3 {
                if i != j {
                    assert_abs_diff_eq!(cc.sigma[(i, j)], 4.0 * 0.4, epsilon = 1e-15);
                }
            }
        }

        let diag = CovarianceEstimate::from_sigma(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0])),
            CovarianceKind::Sample,
            None,
        );
        assert_eq!(constant_correlation_covariance(&diag).unwrap().sigma, diag.sigma);

        let two = CovarianceEstimate::from_sigma(
            DMatrix::from_row_slice(2, 2, &[0.04, 0.013, 0.013, 0.09]),
            CovarianceKind::Sample,
            None,
        );
        assert_eq!(constant_correlation_covariance(&two).unwrap().sigma, two.sigma);
    }

    #[test]
    fn degenerate_target_gives_zero_intensity() {
        let w = DMatrix::from_row_slice(3, 2, &[0.01, 0.02, -0.01, 0.0, 0.03, -0.02]);
        let s = sample_covariance(&w).unwrap();
        let f = constant_correlation_covariance(&s).unwrap();
        assert_eq!(shrinkage_intensity(&w, &s, &f).unwrap(), 0.0);
    }

    #[test]
    fn raw_intensity_is_clamped() {
        let terms = LedoitWolfTerms {
            pi_hat: 1.7 * 10.0,
            rho_hat: 0.0,
            gamma_hat: 1.0,
            scale: 1.0,
            observations: 10,
        };
        assert_abs_diff_eq!(terms.raw_intensity(), 1.7, epsilon = 1e-15);
        assert_eq!(terms.intensity(), 1.0);
        let negative = LedoitWolfTerms { rho_hat: 100.0, ..terms };
        assert_eq!(negative.intensity(), 0.0);
        let flat = LedoitWolfTerms { gamma_hat: 0.0, ..terms };
        assert_eq!(flat.intensity(), 0.0);
    }

    #[test]
    fn shrink_endpoints_and_midpoint() {
        let s = CovarianceEstimate::from_sigma(
            DMatrix::from_element(1, 1, 0.02),
            CovarianceKind::Sample,
            None,
        );
        let f = CovarianceEstimate::from_sigma(
            DMatrix::from_element(1, 1, 0.04),
            CovarianceKind::ConstantCorrelation,
            None,
        );
        assert_eq!(shrink_covariance(&s, &f, 0.0).unwrap().sigma, s.sigma);
        assert_eq!(shrink_covariance(&s, &f, 1.0).unwrap().sigma, f.sigma);
        let mid = shrink_covariance(&s, &f, 0.5).unwrap();
        assert_abs_diff_eq!(mid.sigma[(0, 0)], 0.03, epsilon = 1e-17);
        assert_eq!(mid.kappa, Some(0.5));
        assert!(matches!(
            shrink_covariance(&s, &f, 1.5).unwrap_err(),
            Error::Contract(_)
        ));
        assert!(shrink_covariance(&s, &f, f64::NAN).is_err());
    }

    fn random_window(t: usize, n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        prop::collection::vec(-0.05f64..0.05, t * n)
            .prop_map(move |v| DMatrix::from_vec(t, n, v))
    }

    proptest! {
        #[test]
        fn targets_and_shrinkage_stay_psd(w in random_window(8, 5), kappa in 0.0f64..=1.0) {
            let s = sample_covariance(&w).unwrap();
            let f = constant_correlation_covariance(&s).unwrap();
            let scale = f.sigma.norm();
            prop_assert!(min_eigenvalue(&f.sigma) >= -1e-10 * scale);
            for i in 0..5 {
                prop_assert_eq!(f.sigma[(i, i)], s.sigma[(i, i)]);
            }
            let k = shrinkage_intensity(&w, &s, &f).unwrap();
            prop_assert!((0.0..=1.0).contains(&k));
            let sh = shrink_covariance(&s, &f, kappa).unwrap();
            prop_assert!(min_eigenvalue(&sh.sigma) >= -1e-10 * sh.sigma.norm());
            for i in 0..5 {
                prop_assert!((sh.vols[i] - sh.sigma[(i, i)].sqrt()).abs() <= 1e-12);
            }
        }

        #[test]
        fn shrinkage_is_affine_in_kappa(w in random_window(6, 3), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let s = sample_covariance(&w).unwrap();
            let f = constant_correlation_covariance(&s).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let x = shrink_covariance(&s, &f, lo).unwrap();
            let y = shrink_covariance(&s, &f, hi).unwrap();
            for idx in 0..9 {
                let dir = f.sigma[idx] - s.sigma[idx];
                prop_assert!((y.sigma[idx] - x.sigma[idx]) * dir >= -1e-18);
            }
        }
    }
}
