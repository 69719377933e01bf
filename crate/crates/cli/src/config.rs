//! Run configuration: file format, defaults, command-line overrides and
//! validation.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use netfolio::metrics::KurtosisConvention;
use netfolio::{
    full_suite, BacktestConfig, ClusteringNormalization, CsvLayout, MetricsConfig, SolverConfig,
    StrategySpec, WindowSchedule, WindowUnit,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// What the data file contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    #[default]
    Prices,
    LogReturns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    #[serde(default = "default_layout", with = "layout_serde")]
    pub format: CsvLayout,
    #[serde(default)]
    pub kind: DataKind,
    /// Keep only these tickers, in this order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tickers: Option<Vec<String>>,
}

fn default_layout() -> CsvLayout {
    CsvLayout::Wide
}

mod layout_serde {
    use netfolio::CsvLayout;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &CsvLayout, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(match v {
            CsvLayout::Wide => "wide",
            CsvLayout::Long => "long",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CsvLayout, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default = "default_in_sample")]
    pub in_sample: usize,
    #[serde(default = "default_out_of_sample")]
    pub out_of_sample: usize,
    #[serde(default)]
    pub unit: WindowUnit,
    #[serde(default)]
    pub allow_partial: bool,
}

fn default_in_sample() -> usize {
    24
}

fn default_out_of_sample() -> usize {
    1
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            in_sample: default_in_sample(),
            out_of_sample: default_out_of_sample(),
            unit: WindowUnit::CalendarMonths,
            allow_partial: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub risk_free: f64,
    pub omega_threshold: f64,
    /// Label of the IR benchmark; `EW` is computed even when not listed.
    pub reference: String,
    pub kurtosis: KurtosisConvention,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            risk_free: 0.0,
            omega_threshold: 0.0,
            reference: "EW".into(),
            kurtosis: KurtosisConvention::Raw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    #[serde(default)]
    pub window: WindowConfig,
    /// Strategy labels such as `NB-sample GMV` or `S-shrinkage MV(0.4)`.
    /// Empty means the full 17-configuration suite.
    #[serde(default)]
    pub specs: Vec<String>,
    /// Trade-off used for `MV` labels written without one.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub clustering: ClusteringNormalization,
    #[serde(default)]
    pub rebalance_daily: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_lambda() -> f64 {
    0.5
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// Command-line values that replace fields of the file configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub format: Option<CsvLayout>,
    pub kind: Option<DataKind>,
    pub tickers: Option<Vec<String>>,
    pub in_sample: Option<usize>,
    pub out_of_sample: Option<usize>,
    pub unit: Option<WindowUnit>,
    pub allow_partial: bool,
    pub specs: Option<Vec<String>>,
    pub lambda: Option<f64>,
    pub kkt_tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub erc_tolerance: Option<f64>,
    pub risk_free: Option<f64>,
    pub omega_threshold: Option<f64>,
    pub reference: Option<String>,
    pub clustering: Option<ClusteringNormalization>,
    pub rebalance_daily: bool,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parse TOML or JSON, chosen by file extension (`.json` is JSON,
    /// anything else TOML).
    pub fn from_str_with_format(text: &str, json: bool) -> Result<Self, CliError> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::from_str_with_format(&text, json)
    }

    /// Configuration built only from flags; `--data` is then mandatory.
    pub fn from_overrides(o: &Overrides) -> Result<Self, CliError> {
        let path = o
            .data
            .clone()
            .ok_or_else(|| CliError::Config("either --config or --data is required".into()))?;
        let mut cfg = Self {
            data: DataConfig {
                path,
                format: CsvLayout::Wide,
                kind: DataKind::Prices,
                tickers: None,
            },
            window: WindowConfig::default(),
            specs: Vec::new(),
            lambda: default_lambda(),
            solver: SolverConfig::default(),
            metrics: MetricsSection::default(),
            clustering: ClusteringNormalization::Average,
            rebalance_daily: false,
            output_dir: default_output_dir(),
        };
        cfg.apply(o);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value.clone() {
                    $field = v;
                }
            };
        }
        set!(self.data.path, o.data);
        set!(self.data.format, o.format);
        set!(self.data.kind, o.kind);
        if o.tickers.is_some() {
            self.data.tickers = o.tickers.clone();
        }
        set!(self.window.in_sample, o.in_sample);
        set!(self.window.out_of_sample, o.out_of_sample);
        set!(self.window.unit, o.unit);
        self.window.allow_partial |= o.allow_partial;
        set!(self.specs, o.specs);
        set!(self.lambda, o.lambda);
        set!(self.solver.kkt_tolerance, o.kkt_tolerance);
        set!(self.solver.max_iterations, o.max_iterations);
        set!(self.solver.erc_tolerance, o.erc_tolerance);
        set!(self.metrics.risk_free, o.risk_free);
        set!(self.metrics.omega_threshold, o.omega_threshold);
        set!(self.metrics.reference, o.reference);
        set!(self.clustering, o.clustering);
        self.rebalance_daily |= o.rebalance_daily;
        set!(self.output_dir, o.output_dir);
    }

    /// Parsed strategy list, in configuration order.
    pub fn strategy_specs(&self) -> Result<Vec<StrategySpec>, CliError> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(CliError::Config(format!(
                "lambda = {} outside [0, 1]",
                self.lambda
            )));
        }
        if self.specs.is_empty() {
            return Ok(full_suite(self.lambda));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(self.specs.len());
        for label in &self.specs {
            let spec = StrategySpec::parse_with_lambda(label, Some(self.lambda))?;
            spec.validate()?;
            if !seen.insert(spec.to_string()) {
                return Err(CliError::Config(format!("strategy `{spec}` listed twice")));
            }
            out.push(spec);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<Vec<StrategySpec>, CliError> {
        self.solver.validate()?;
        if self.window.in_sample == 0 || self.window.out_of_sample == 0 {
            return Err(CliError::Config(
                "window lengths must be positive".into(),
            ));
        }
        let specs = self.strategy_specs()?;
        let reference = &self.metrics.reference;
        if reference != "EW" && !specs.iter().any(|s| &s.to_string() == reference) {
            return Err(CliError::Config(format!(
                "IR reference `{reference}` is neither EW nor one of the strategies"
            )));
        }
        Ok(specs)
    }

    pub fn backtest_config(&self) -> BacktestConfig {
        BacktestConfig {
            schedule: self.schedule(),
            solver: self.solver,
            clustering: self.clustering,
            rebalance_daily: self.rebalance_daily,
        }
    }

    pub fn schedule(&self) -> WindowSchedule {
        WindowSchedule {
            in_sample: self.window.in_sample,
            out_of_sample: self.window.out_of_sample,
            unit: self.window.unit,
            allow_partial: self.window.allow_partial,
        }
    }

    pub fn metrics_config(&self) -> MetricsConfig {
        MetricsConfig {
            risk_free: self.metrics.risk_free,
            omega_threshold: self.metrics.omega_threshold,
            kurtosis: self.metrics.kurtosis,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOML: &str = r#"
output_dir = "out"
specs = ["NB-sample GMV", "S-shrinkage MV(0.2)", "EW"]

[data]
path = "prices.csv"
format = "long"
tickers = ["B", "A"]

[window]
in_sample = 6
out_of_sample = 1
unit = "calendar-months"

[solver]
kkt_tolerance = 1e-9

[metrics]
reference = "EW"
"#;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = RunConfig::from_str_with_format(TOML, false).unwrap();
        assert_eq!(cfg.data.format, CsvLayout::Long);
        assert_eq!(cfg.data.kind, DataKind::Prices);
        assert_eq!(cfg.solver.kkt_tolerance, 1e-9);
        assert_eq!(cfg.solver.max_iterations, SolverConfig::default().max_iterations);
        assert_eq!(cfg.clustering, ClusteringNormalization::Average);
        let specs = cfg.validate().unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[1].to_string(), "S-shrinkage MV(0.2)");

        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_str_with_format(&json, true).unwrap(), cfg);
    }

    #[test]
    fn empty_spec_list_is_the_full_suite() {
        let cfg = RunConfig::from_str_with_format("[data]\npath = \"p.csv\"\n", false).unwrap();
        assert_eq!(cfg.validate().unwrap().len(), 17);
        assert_eq!(cfg.window.unit, WindowUnit::CalendarMonths);
        assert_eq!((cfg.window.in_sample, cfg.window.out_of_sample), (24, 1));
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::from_str_with_format(TOML, false).unwrap();
        cfg.apply(&Overrides {
            in_sample: Some(3),
            unit: Some(WindowUnit::TradingDays),
            reference: Some("NB-sample GMV".into()),
            ..Overrides::default()
        });
        assert_eq!(cfg.window.in_sample, 3);
        assert_eq!(cfg.window.unit, WindowUnit::TradingDays);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        let dup = TOML.replace("\"EW\"]", "\"EW\", \"NB-sample GMV\"]");
        let cfg = RunConfig::from_str_with_format(&dup, false).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        let mut cfg = RunConfig::from_str_with_format(TOML, false).unwrap();
        cfg.metrics.reference = "S-sample ERC".into();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));

        assert!(RunConfig::from_str_with_format("[data]\npath = 1\n", false).is_err());
        assert!(RunConfig::from_str_with_format("[data]\npath = \"x\"\nbogus = 1\n", false).is_err());
    }
}
