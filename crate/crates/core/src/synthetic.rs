//! Seeded synthetic return panels for tests, benchmarks and demos.

use chrono::{Datelike, NaiveDate, Weekday};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::market_data::ReturnPanel;

/// `count` weekdays starting at `start` (inclusive if it is a weekday).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2001, 1, 2).unwrap()
}

fn tickers(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("S{:03}", i + 1)).collect()
}

/// Independent Gaussian returns with common volatility `vol`.
pub fn gaussian_panel(n_obs: usize, n_assets: usize, vol: f64, seed: u64) -> ReturnPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, vol).expect("finite volatility");
    let m = DMatrix::from_fn(n_obs, n_assets, |_, _| dist.sample(&mut rng));
    ReturnPanel::new(business_days(default_start(), n_obs), tickers(n_assets), m)
        .expect("synthetic panel is valid")
}

/// Two-block factor market.
///
/// Asset `i` in block `b` has standardised return
/// `a·f_mkt + c·f_b + √(1 − a² − c²)·ε_i`, scaled by its own daily volatility
/// drawn uniformly from `vol_range`, plus `drift`. Within-block correlation
/// is `a² + c²`, across blocks `a²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMarket {
    pub n_assets: usize,
    pub n_obs: usize,
    /// Assets `0..first_block` form block one, the rest block two.
    pub first_block: usize,
    pub market_loading: f64,
    pub block_loading: f64,
    pub vol_range: (f64, f64),
    pub drift: f64,
}

impl Default for BlockMarket {
    fn default() -> Self {
        Self {
            n_assets: 10,
            n_obs: 500,
            first_block: 5,
            market_loading: 0.3,
            block_loading: 0.6,
            vol_range: (0.008, 0.025),
            drift: 2e-4,
        }
    }
}

impl BlockMarket {
    pub fn generate(&self, seed: u64) -> ReturnPanel {
        let (a, c) = (self.market_loading, self.block_loading);
        let idio = (1.0 - a * a - c * c).max(0.0).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vols: Vec<f64> = (0..self.n_assets)
            .map(|_| rng.random_range(self.vol_range.0..=self.vol_range.1))
            .collect();
        let mut m = DMatrix::zeros(self.n_obs, self.n_assets);
        for t in 0..self.n_obs {
            let f_mkt: f64 = StandardNormal.sample(&mut rng);
            let f_blocks: [f64; 2] = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
            for i in 0..self.n_assets {
                let b = usize::from(i >= self.first_block);
                let e: f64 = StandardNormal.sample(&mut rng);
                m[(t, i)] = self.drift + vols[i] * (a * f_mkt + c * f_blocks[b] + idio * e);
            }
        }
        ReturnPanel::new(
            business_days(default_start(), self.n_obs),
            tickers(self.n_assets),
            m,
        )
        .expect("synthetic panel is valid")
    }
}
