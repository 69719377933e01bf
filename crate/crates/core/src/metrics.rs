//! Out-of-sample performance statistics, all on a daily basis.
//!
//! Conventions: the standard deviation uses the `T − 1` divisor; skewness and
//! kurtosis are the uncorrected `m₃ / m₂^{3/2}` and `m₄ / m₂²` with `1/T`
//! central moments, kurtosis raw unless [`KurtosisConvention::Excess`] is
//! requested. Omega averages the positive parts over the full sample.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size below which a dispersion is treated as exactly zero.
const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KurtosisConvention {
    #[default]
    Raw,
    Excess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    /// `None` when the variance is zero.
    pub skew: Option<f64>,
    /// `None` when the variance is zero or fewer than 4 observations.
    pub kurt: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Unbiased standard deviation; exactly zero for a constant series.
fn std_dev(xs: &[f64], m: f64) -> f64 {
    if xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() as f64 - 1.0)).sqrt()
}

fn degenerate(std: f64, xs: &[f64]) -> bool {
    std <= DEGENERATE_REL * max_abs(xs)
}

fn require_len(xs: &[f64], n: usize, what: &str) -> Result<()> {
    if xs.len() < n {
        return Err(Error::Undefined(format!(
            "{what} needs at least {n} observations, got {}",
            xs.len()
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Undefined(format!("{what}: series has non-finite values")));
    }
    Ok(())
}

pub fn moments(series: &[f64]) -> Result<Moments> {
    moments_with(series, KurtosisConvention::Raw)
}

pub fn moments_with(series: &[f64], kurtosis: KurtosisConvention) -> Result<Moments> {
    require_len(series, 2, "moments")?;
    let m = mean(series);
    let std = std_dev(series, m);
    if degenerate(std, series) {
        return Ok(Moments {
            mean: m,
            std,
            skew: None,
            kurt: None,
        });
    }
    let t = series.len() as f64;
    let central = |p: i32| series.iter().map(|x| (x - m).powi(p)).sum::<f64>() / t;
    let (m2, m3, m4) = (central(2), central(3), central(4));
    let skew = m3 / m2.powf(1.5);
    let kurt = (series.len() >= 4).then(|| {
        let k = m4 / (m2 * m2);
        match kurtosis {
            KurtosisConvention::Raw => k,
            KurtosisConvention::Excess => k - 3.0,
        }
    });
    Ok(Moments {
        mean: m,
        std,
        skew: Some(skew),
        kurt,
    })
}

/// `(mean − μ_f) / std`.
pub fn sharpe_ratio(series: &[f64], risk_free: f64) -> Result<f64> {
    require_len(series, 2, "Sharpe ratio")?;
    let m = mean(series);
    let s = std_dev(series, m);
    if degenerate(s, series) {
        return Err(Error::Undefined(
            "Sharpe ratio of a series with zero volatility".into(),
        ));
    }
    Ok((m - risk_free) / s)
}

/// Mean active return over tracking error against `reference`.
pub fn information_ratio(series: &[f64], reference: &[f64]) -> Result<f64> {
    if series.len() != reference.len() {
        return Err(Error::Contract(format!(
            "information ratio needs equal lengths, got {} and {}",
            series.len(),
            reference.len()
        )));
    }
    let diff: Vec<f64> = series.iter().zip(reference).map(|(a, b)| a - b).collect();
    require_len(&diff, 2, "information ratio")?;
    let m = mean(&diff);
    let s = std_dev(&diff, m);
    if degenerate(s, &diff) {
        return Err(Error::Undefined(
            "information ratio with zero tracking error".into(),
        ));
    }
    Ok(m / s)
}

/// `E(r − ε)⁺ / E(ε − r)⁺`.
pub fn omega_ratio(series: &[f64], threshold: f64) -> Result<f64> {
    require_len(series, 1, "Omega ratio")?;
    let t = series.len() as f64;
    let gains = series.iter().map(|r| (r - threshold).max(0.0)).sum::<f64>() / t;
    let losses = series.iter().map(|r| (threshold - r).max(0.0)).sum::<f64>() / t;
    if losses == 0.0 {
        return Err(Error::Undefined(
            "Omega ratio is infinite: no observations below the threshold".into(),
        ));
    }
    let ratio = gains / losses;
    if !ratio.is_finite() {
        return Err(Error::Undefined(format!(
            "Omega ratio overflowed (gains {gains:e}, losses {losses:e})"
        )));
    }
    Ok(ratio)
}

/// `wealth[t] = Π_{u ≤ t} (1 + r_u)`.
pub fn cumulative_performance(series: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, r)) = series.iter().enumerate().find(|(_, r)| !(**r > -1.0)) {
        return Err(Error::Contract(format!(
            "return {r} at position {i} is not above -1"
        )));
    }
    Ok(series
        .iter()
        .scan(1.0, |w, r| {
            *w *= 1.0 + r;
            Some(*w)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub risk_free: f64,
    pub omega_threshold: f64,
    pub kurtosis: KurtosisConvention,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            risk_free: 0.0,
            omega_threshold: 0.0,
            kurtosis: KurtosisConvention::Raw,
        }
    }
}

/// One strategy's statistics. Undefined entries are `None` with a note.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceReport {
    pub label: String,
    pub mean: f64,
    pub std: f64,
    pub skew: Option<f64>,
    pub kurt: Option<f64>,
    pub sharpe: Option<f64>,
    pub info_ratio: Option<f64>,
    pub info_reference: Option<String>,
    pub omega: Option<f64>,
    pub notes: Vec<String>,
}

impl PerformanceReport {
    pub fn compute(
        label: &str,
        series: &[f64],
        reference: Option<(&str, &[f64])>,
        cfg: &MetricsConfig,
    ) -> Result<Self> {
        let m = moments_with(series, cfg.kurtosis)?;
        let mut notes = Vec::new();
        let keep = |r: Result<f64>, notes: &mut Vec<String>| match r {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        };
        if m.skew.is_none() {
            notes.push("skewness undefined".into());
        }
        if m.kurt.is_none() {
            notes.push("kurtosis undefined".into());
        }
        let sharpe = keep(sharpe_ratio(series, cfg.risk_free), &mut notes);
        let omega = keep(omega_ratio(series, cfg.omega_threshold), &mut notes);
        let (info_ratio, info_reference) = match reference {
            Some((name, _)) if name == label => (None, Some(name.to_string())),
            Some((name, r)) => (
                keep(information_ratio(series, r), &mut notes),
                Some(name.to_string()),
            ),
            None => (None, None),
        };
        Ok(Self {
            label: label.to_string(),
            mean: m.mean,
            std: m.std,
            skew: m.skew,
            kurt: m.kurt,
            sharpe,
            info_ratio,
            info_reference,
            omega,
            notes,
        })
    }
}

/// Strategy-by-statistic table, one row per strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub reference: Option<String>,
    pub rows: Vec<PerformanceReport>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SummaryTable {
    /// `series` pairs labels with return series on a common date axis. The
    /// reference, when given, must be one of the labels; its own IR is blank.
    pub fn build(
        series: &[(String, Vec<f64>)],
        reference: Option<&str>,
        cfg: &MetricsConfig,
    ) -> Result<Self> {
        let reference_series = match reference {
            Some(name) => Some(
                series
                    .iter()
                    .find(|(l, _)| l == name)
                    .map(|(_, s)| s.as_slice())
                    .ok_or_else(|| {
                        Error::Config(format!("reference `{name}` is not among the strategies"))
                    })?,
            ),
            None => None,
        };
        let rows = series
            .iter()
            .map(|(label, s)| {
                PerformanceReport::compute(
                    label,
                    s,
                    reference.zip(reference_series),
                    cfg,
                )
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            reference: reference.map(str::to_string),
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let ir = match &self.reference {
            Some(r) => format!("IR({r})"),
            None => "IR".to_string(),
        };
        let mut out = format!("strategy,mean,std,skew,kurt,SR,{ir},OR\n");
        for r in &self.rows {
            let label = if r.label.contains([',', '"']) {
                format!("\"{}\"", r.label.replace('"', "\"\""))
            } else {
                r.label.clone()
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                label,
                r.mean,
                r.std,
                cell(r.skew),
                cell(r.kurt),
                cell(r.sharpe),
                cell(r.info_ratio),
                cell(r.omega)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary table serialises")
    }
}
