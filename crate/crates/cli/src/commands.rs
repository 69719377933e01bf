use std::path::{Path, PathBuf};

use netfolio::backtest::{estimate_covariances, prepare_inputs};
use netfolio::market_data::{read_prices, read_returns};
use netfolio::{
    log_returns, run_suite, solve_erc, solve_gmv, solve_mdp, solve_mv, EstimatorKind,
    MeanEstimate, ReturnPanel, RiskModel, RiskModelKind, SolverConfig, Strategy, StrategySpec,
    SummaryTable, WindowPair,
};
use rayon::prelude::*;

use crate::config::{DataKind, RunConfig};
use crate::error::CliError;
use crate::output::{
    csv_bytes, matrix_rows, num, outputs, read_matrix, read_vector, sha256_hex, vector_rows,
    Manifest, OutputDir, SpecStatus,
};

/// Resolved inputs shared by the data-driven commands.
pub struct Context {
    pub config: RunConfig,
    pub workdir: PathBuf,
}

impl Context {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.workdir.join(p)
        }
    }

    fn config_hash(&self) -> (String, serde_json::Value) {
        let value = serde_json::to_value(&self.config).expect("config serialises");
        let text = serde_json::to_string(&value).expect("json value serialises");
        (sha256_hex(text.as_bytes()), value)
    }

    fn load_panel(&self) -> Result<(ReturnPanel, String), CliError> {
        let path = self.resolve(&self.config.data.path);
        let bytes = std::fs::read(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let name = self.config.data.path.display().to_string();
        let layout = self.config.data.format;
        let panel = match self.config.data.kind {
            DataKind::Prices => {
                let mut table = read_prices(bytes.as_slice(), layout, &name)?;
                if let Some(keep) = &self.config.data.tickers {
                    table = table.select(keep)?;
                }
                log_returns(&table)?
            }
            DataKind::LogReturns => {
                let mut panel = read_returns(bytes.as_slice(), layout, &name)?;
                if let Some(keep) = &self.config.data.tickers {
                    panel = panel.select(keep)?;
                }
                panel
            }
        };
        Ok((panel, sha256_hex(&bytes)))
    }

    fn windows(
        &self,
        panel: &ReturnPanel,
        only: Option<usize>,
    ) -> Result<Vec<WindowPair>, CliError> {
        let all = self.config.schedule().windows(panel)?;
        if all.is_empty() {
            return Err(CliError::Config("no complete window fits the data".into()));
        }
        match only {
            None => Ok(all),
            Some(i) => all
                .get(i)
                .cloned()
                .map(|w| vec![w])
                .ok_or_else(|| {
                    CliError::Config(format!("window {i} requested but only {} exist", all.len()))
                }),
        }
    }

    fn output_dir(&self) -> Result<OutputDir, CliError> {
        OutputDir::create(self.resolve(&self.config.output_dir))
    }

    fn manifest(
        &self,
        command: &str,
        data_sha256: String,
        strategies: Vec<SpecStatus>,
        out: &OutputDir,
    ) -> Manifest {
        let (config_sha256, config) = self.config_hash();
        Manifest {
            tool: "netfolio",
            library_version: netfolio::VERSION,
            command: command.to_string(),
            config_sha256,
            data_sha256: Some(data_sha256),
            config,
            strategies,
            outputs: outputs(out),
        }
    }
}

fn window_label(panel: &ReturnPanel, w: &WindowPair) -> [String; 4] {
    let d = panel.dates();
    [
        w.index.to_string(),
        d[w.in_sample.start].to_string(),
        d[w.in_sample.end - 1].to_string(),
        d[w.out_of_sample.start].to_string(),
    ]
}

pub fn estimate(ctx: &Context, only: Option<usize>) -> Result<(), CliError> {
    let (panel, data_hash) = ctx.load_panel()?;
    let windows = ctx.windows(&panel, only)?;
    let tickers = panel.tickers();
    let estimates = windows
        .par_iter()
        .map(|w| estimate_covariances(&panel.rows(w.in_sample.clone()), tickers))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = ctx.output_dir()?;
    let mut kappa_rows = vec![vec![
        "window".to_string(),
        "in_sample_start".into(),
        "in_sample_end".into(),
        "out_of_sample_start".into(),
        "kappa".into(),
    ]];
    for (w, (sample, target, shrunk)) in windows.iter().zip(&estimates) {
        let stem = format!("estimate/window_{:03}", w.index);
        out.write_csv(&format!("{stem}_sample.csv"), matrix_rows(tickers, &sample.sigma))?;
        out.write_csv(&format!("{stem}_cc.csv"), matrix_rows(tickers, &target.sigma))?;
        out.write_csv(&format!("{stem}_shrinkage.csv"), matrix_rows(tickers, &shrunk.sigma))?;
        let mut row = window_label(&panel, w).to_vec();
        row.push(num(shrunk.kappa.unwrap_or(0.0)));
        kappa_rows.push(row);
    }
    out.write_csv("estimate/kappa.csv", kappa_rows)?;
    ctx.manifest("estimate", data_hash, Vec::new(), &out)
        .write(&mut out, "estimate/manifest.json")
}

pub fn network(ctx: &Context, only: Option<usize>, estimator: EstimatorKind) -> Result<(), CliError> {
    let (panel, data_hash) = ctx.load_panel()?;
    let windows = ctx.windows(&panel, only)?;
    let tickers = panel.tickers();
    let spec = StrategySpec::new(Strategy::Gmv, estimator, RiskModelKind::Network);
    let inputs = windows
        .par_iter()
        .map(|w| {
            prepare_inputs(
                &panel.rows(w.in_sample.clone()),
                tickers,
                &spec,
                ctx.config.clustering,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = ctx.output_dir()?;
    for (w, inp) in windows.iter().zip(&inputs) {
        let net = inp.network.as_ref().expect("network spec yields network inputs");
        let stem = format!("network/window_{:03}", w.index);
        out.write_csv(&format!("{stem}_W.csv"), matrix_rows(tickers, net.network.weights()))?;
        out.write_csv(
            &format!("{stem}_clustering.csv"),
            vector_rows(tickers, "clustering", &net.clustering.c),
        )?;
        out.write_csv(&format!("{stem}_C.csv"), matrix_rows(tickers, &net.interconnectedness))?;
        out.write_csv(&format!("{stem}_H.csv"), matrix_rows(tickers, &inp.risk.matrix))?;
        let mut edges = vec![vec!["source".to_string(), "target".into(), "weight".into()]];
        edges.extend(
            net.network
                .edges()
                .into_iter()
                .map(|(i, j, w)| vec![tickers[i].clone(), tickers[j].clone(), num(w)]),
        );
        out.write_csv(&format!("{stem}_edges.csv"), edges)?;
    }
    ctx.manifest("network", data_hash, Vec::new(), &out)
        .write(&mut out, "network/manifest.json")
}

/// Solve one allocation problem on a matrix file; returns the weights CSV.
pub fn solve(
    matrix: &Path,
    problem: &str,
    mu: Option<&Path>,
    lambda: f64,
    solver: &SolverConfig,
) -> Result<String, CliError> {
    let (tickers, m) = read_matrix(matrix)?;
    let risk = RiskModel::from_matrix(m);
    let alloc = match problem.to_ascii_lowercase().as_str() {
        "gmv" => solve_gmv(&risk, solver)?,
        "erc" => solve_erc(&risk, solver)?,
        "mdp" => solve_mdp(&risk, solver)?,
        "mv" => {
            let path = mu.ok_or_else(|| {
                CliError::Config("mean-variance needs --mu with expected returns".into())
            })?;
            let mu = MeanEstimate {
                mu: read_vector(path, &tickers)?,
            };
            solve_mv(&risk, &mu, lambda, solver)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown problem `{other}`; expected gmv, erc, mdp or mv"
            )))
        }
    };
    let bytes = csv_bytes(vector_rows(&tickers, "weight", &alloc.weights))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Specs to run: the configured list plus EW when it is the IR reference.
fn run_list(ctx: &Context) -> Result<Vec<StrategySpec>, CliError> {
    let mut specs = ctx.config.validate()?;
    if ctx.config.metrics.reference == "EW" && !specs.contains(&StrategySpec::equal_weight()) {
        specs.push(StrategySpec::equal_weight());
    }
    Ok(specs)
}

fn summary(ctx: &Context, series: &[(String, Vec<f64>)]) -> Result<SummaryTable, CliError> {
    let reference = &ctx.config.metrics.reference;
    let reference = series.iter().any(|(l, _)| l == reference).then_some(reference.as_str());
    Ok(SummaryTable::build(series, reference, &ctx.config.metrics_config())?)
}

fn write_summary(out: &mut OutputDir, table: &SummaryTable) -> Result<(), CliError> {
    out.write("summary.csv", table.to_csv().as_bytes())?;
    out.write("summary.json", format!("{}\n", table.to_json()).as_bytes())
}

pub fn backtest(ctx: &Context) -> Result<(), CliError> {
    let specs = run_list(ctx)?;
    let (panel, data_hash) = ctx.load_panel()?;
    let results = run_suite(&panel, &specs, &ctx.config.backtest_config())?;

    let mut out = ctx.output_dir()?;
    let mut statuses = Vec::with_capacity(specs.len());
    let mut series = Vec::new();
    let mut first_failure: Option<netfolio::Error> = None;
    for (spec, result) in specs.iter().zip(results) {
        match result {
            Ok(res) => {
                let stem = spec.file_stem();
                let mut weights = vec![vec![
                    "window".to_string(),
                    "in_sample_start".into(),
                    "in_sample_end".into(),
                    "out_of_sample_start".into(),
                ]];
                weights[0].extend(res.tickers.iter().cloned());
                for (w, alloc) in &res.windows {
                    let mut row = window_label(&panel, w).to_vec();
                    row.extend(alloc.weights.iter().map(|x| num(*x)));
                    weights.push(row);
                }
                out.write_csv(&format!("weights_{stem}.csv"), weights)?;

                let dated = |values: &[f64], column: &str| {
                    let mut rows = vec![vec!["date".to_string(), column.to_string()]];
                    rows.extend(
                        res.dates
                            .iter()
                            .zip(values)
                            .map(|(d, v)| vec![d.to_string(), num(*v)]),
                    );
                    rows
                };
                out.write_csv(&format!("oos_returns_{stem}.csv"), dated(&res.oos_returns, "return"))?;
                out.write_csv(&format!("cumulative_{stem}.csv"), dated(&res.cumulative, "wealth"))?;
                series.push((spec.to_string(), res.oos_returns));
                statuses.push(SpecStatus {
                    strategy: spec.to_string(),
                    ok: true,
                    error: None,
                });
            }
            Err(e) => {
                statuses.push(SpecStatus {
                    strategy: spec.to_string(),
                    ok: false,
                    error: Some(e.to_string()),
                });
                first_failure.get_or_insert(e);
            }
        }
    }
    if !series.is_empty() {
        write_summary(&mut out, &summary(ctx, &series)?)?;
    }
    ctx.manifest("backtest", data_hash, statuses, &out)
        .write(&mut out, "manifest.json")?;
    match first_failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Rebuild the summary from the return files of an earlier backtest.
pub fn report(ctx: &Context) -> Result<String, CliError> {
    let specs = run_list(ctx)?;
    let root = ctx.resolve(&ctx.config.output_dir);
    let mut series = Vec::with_capacity(specs.len());
    let mut hasher_input = Vec::new();
    for spec in &specs {
        let path = root.join(format!("oos_returns_{}.csv", spec.file_stem()));
        let bytes = std::fs::read(&path).map_err(|e| {
            CliError::Data(format!(
                "cannot read {} (run `backtest` first): {e}",
                path.display()
            ))
        })?;
        hasher_input.extend_from_slice(&bytes);
        let mut rdr = csv::Reader::from_reader(bytes.as_slice());
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v = rec.get(1).unwrap_or_default();
            values.push(v.parse::<f64>().map_err(|_| {
                CliError::Data(format!("{}: `{v}` is not a number", path.display()))
            })?);
        }
        series.push((spec.to_string(), values));
    }
    if let Some((label, s)) = series.iter().find(|(_, s)| s.len() != series[0].1.len()) {
        return Err(CliError::Data(format!(
            "return series for `{label}` has {} rows, expected {}",
            s.len(),
            series[0].1.len()
        )));
    }
    let table = summary(ctx, &series)?;
    let mut out = ctx.output_dir()?;
    write_summary(&mut out, &table)?;
    ctx.manifest("report", sha256_hex(&hasher_input), Vec::new(), &out)
        .write(&mut out, "report_manifest.json")?;
    Ok(table.to_csv())
}
