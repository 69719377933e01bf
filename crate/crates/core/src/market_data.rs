//! Price and return panels, CSV ingestion and rolling window schedules.
//!
//! Two CSV layouts are accepted, both with a mandatory header row and
//! ISO-8601 (`YYYY-MM-DD`) dates:
//!
//! * wide: `date,TICK1,TICK2,...` with one row per date;
//! * long: `date,ticker,value` with one row per observation.
//!
//! Missing observations are never imputed. An empty wide cell or an absent
//! long row is carried as a gap in [`PriceTable`] and rejected by
//! [`log_returns`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CsvLayout {
    #[default]
    Wide,
    Long,
}

impl std::str::FromStr for CsvLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wide" => Ok(CsvLayout::Wide),
            "long" => Ok(CsvLayout::Long),
            other => Err(Error::Config(format!("unknown csv layout `{other}`"))),
        }
    }
}

/// Dated price table; gaps are kept as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub dates: Vec<NaiveDate>,
    pub tickers: Vec<String>,
    /// Row-major `dates.len() x tickers.len()`.
    prices: Vec<Option<f64>>,
}

impl PriceTable {
    pub fn new(
        dates: Vec<NaiveDate>,
        tickers: Vec<String>,
        prices: Vec<Option<f64>>,
    ) -> Result<Self> {
        if prices.len() != dates.len() * tickers.len() {
            return Err(Error::Data(format!(
                "price table has {} cells, expected {} x {}",
                prices.len(),
                dates.len(),
                tickers.len()
            )));
        }
        check_dates(&dates)?;
        check_tickers(&tickers)?;
        for (idx, p) in prices.iter().enumerate() {
            if let Some(p) = p {
                if !(p.is_finite() && *p > 0.0) {
                    let (t, i) = (idx / tickers.len(), idx % tickers.len());
                    return Err(Error::Data(format!(
                        "non-positive price {p} for {} on {}",
                        tickers[i], dates[t]
                    )));
                }
            }
        }
        Ok(Self {
            dates,
            tickers,
            prices,
        })
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn get(&self, t: usize, i: usize) -> Option<f64> {
        self.prices[t * self.tickers.len() + i]
    }

    /// Restrict the table to `keep`, in the order given.
    pub fn select(&self, keep: &[String]) -> Result<Self> {
        let mut cols = Vec::with_capacity(keep.len());
        for name in keep {
            let j = self
                .tickers
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| Error::Data(format!("ticker `{name}` not in price table")))?;
            cols.push(j);
        }
        let prices = (0..self.n_dates())
            .flat_map(|t| cols.iter().map(move |&j| (t, j)))
            .map(|(t, j)| self.get(t, j))
            .collect();
        Self::new(self.dates.clone(), keep.to_vec(), prices)
    }
}

/// `T x N` matrix of per-day log-returns with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    returns: DMatrix<f64>,
}

impl ReturnPanel {
    /// Validating constructor. Needs at least two dates and one asset.
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, returns: DMatrix<f64>) -> Result<Self> {
        if returns.nrows() != dates.len() || returns.ncols() != tickers.len() {
            return Err(Error::Data(format!(
                "return matrix is {}x{} but there are {} dates and {} tickers",
                returns.nrows(),
                returns.ncols(),
                dates.len(),
                tickers.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::Data("a return panel needs at least 2 dates".into()));
        }
        if tickers.is_empty() {
            return Err(Error::Data("a return panel needs at least 1 asset".into()));
        }
        check_dates(&dates)?;
        check_tickers(&tickers)?;
        for j in 0..returns.ncols() {
            for t in 0..returns.nrows() {
                if !returns[(t, j)].is_finite() {
                    return Err(Error::Data(format!(
                        "non-finite return for {} on {}",
                        tickers[j], dates[t]
                    )));
                }
            }
        }
        Ok(Self {
            dates,
            tickers,
            returns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn n_obs(&self) -> usize {
        self.dates.len()
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    /// Copy of the rows in `rows`.
    pub fn rows(&self, rows: Range<usize>) -> DMatrix<f64> {
        self.returns.rows(rows.start, rows.len()).into_owned()
    }

    /// Restrict the panel to `keep`, in the order given.
    pub fn select(&self, keep: &[String]) -> Result<Self> {
        let mut cols = Vec::with_capacity(keep.len());
        for name in keep {
            let j = self
                .tickers
                .iter()
                .position(|t| t == name)
                .ok_or_else(|| Error::Data(format!("ticker `{name}` not in panel")))?;
            cols.push(j);
        }
        let returns = self.returns.select_columns(cols.iter());
        Self::new(self.dates.clone(), keep.to_vec(), returns)
    }
}

fn check_dates(dates: &[NaiveDate]) -> Result<()> {
    if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Data(format!(
            "dates must be strictly increasing ({} followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

fn check_tickers(tickers: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for t in tickers {
        if !seen.insert(t.as_str()) {
            return Err(Error::Data(format!("duplicate ticker `{t}`")));
        }
    }
    Ok(())
}

struct RawTable {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    cells: Vec<Option<f64>>,
}

fn parse_error(source_name: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn csv_error(source_name: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    parse_error(source_name, line, err.to_string())
}

fn parse_date(source_name: &str, line: u64, s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT)
        .map_err(|e| parse_error(source_name, line, format!("bad date `{s}`: {e}")))
}

fn parse_value(source_name: &str, line: u64, s: &str) -> Result<Option<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| parse_error(source_name, line, format!("bad number `{s}`")))
}

fn read_table<R: Read>(
    reader: R,
    layout: CsvLayout,
    source_name: &str,
    check: impl Fn(f64) -> bool,
    what: &str,
) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| csv_error(source_name, e))?
        .clone();

    let validate = |line: u64, v: Option<f64>, ticker: &str| -> Result<Option<f64>> {
        match v {
            Some(x) if !check(x) => Err(Error::Data(format!(
                "{source_name}:{line}: invalid {what} {x} for `{ticker}`"
            ))),
            other => Ok(other),
        }
    };

    match layout {
        CsvLayout::Wide => {
            if headers.len() < 2 {
                return Err(parse_error(
                    source_name,
                    1,
                    "wide layout needs a date column and at least one ticker column",
                ));
            }
            let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
            check_tickers(&tickers)?;
            let mut rows: BTreeMap<NaiveDate, Vec<Option<f64>>> = BTreeMap::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(source_name, e))?;
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                let date = parse_date(source_name, line, &rec[0])?;
                let mut vals = Vec::with_capacity(tickers.len());
                for (j, cell) in rec.iter().skip(1).enumerate() {
                    let v = parse_value(source_name, line, cell)?;
                    vals.push(validate(line, v, &tickers[j])?);
                }
                if rows.insert(date, vals).is_some() {
                    return Err(Error::Data(format!(
                        "{source_name}:{line}: duplicate rows for date {date}"
                    )));
                }
            }
            let dates: Vec<NaiveDate> = rows.keys().copied().collect();
            let cells = rows.into_values().flatten().collect();
            Ok(RawTable {
                dates,
                tickers,
                cells,
            })
        }
        CsvLayout::Long => {
            if headers.len() != 3 {
                return Err(parse_error(
                    source_name,
                    1,
                    "long layout needs exactly three columns: date,ticker,value",
                ));
            }
            let mut obs: BTreeMap<(NaiveDate, String), f64> = BTreeMap::new();
            let mut dates = BTreeSet::new();
            let mut tickers = BTreeSet::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| csv_error(source_name, e))?;
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                let date = parse_date(source_name, line, &rec[0])?;
                let ticker = rec[1].to_string();
                if ticker.is_empty() {
                    return Err(parse_error(source_name, line, "empty ticker"));
                }
                let v = parse_value(source_name, line, &rec[2])?
                    .ok_or_else(|| parse_error(source_name, line, "empty value"))?;
                let v = validate(line, Some(v), &ticker)?.unwrap_or(v);
                if obs.insert((date, ticker.clone()), v).is_some() {
                    return Err(Error::Data(format!(
                        "{source_name}:{line}: duplicate observation for ({date}, {ticker})"
                    )));
                }
                dates.insert(date);
                tickers.insert(ticker);
            }
            let dates: Vec<NaiveDate> = dates.into_iter().collect();
            let tickers: Vec<String> = tickers.into_iter().collect();
            let mut cells = Vec::with_capacity(dates.len() * tickers.len());
            for d in &dates {
                for t in &tickers {
                    cells.push(obs.get(&(*d, t.clone())).copied());
                }
            }
            Ok(RawTable {
                dates,
                tickers,
                cells,
            })
        }
    }
}

/// Read a price table from any reader. `source_name` labels parse errors.
pub fn read_prices<R: Read>(reader: R, layout: CsvLayout, source_name: &str) -> Result<PriceTable> {
    let raw = read_table(
        reader,
        layout,
        source_name,
        |p| p.is_finite() && p > 0.0,
        "price",
    )?;
    PriceTable::new(raw.dates, raw.tickers, raw.cells)
}

pub fn load_prices_csv(path: impl AsRef<Path>, layout: CsvLayout) -> Result<PriceTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_prices(file, layout, &path.display().to_string())
}

/// Read a return panel directly, skipping [`log_returns`]. Gaps are rejected.
pub fn read_returns<R: Read>(
    reader: R,
    layout: CsvLayout,
    source_name: &str,
) -> Result<ReturnPanel> {
    let raw = read_table(reader, layout, source_name, f64::is_finite, "return")?;
    let n = raw.tickers.len();
    let mut m = DMatrix::zeros(raw.dates.len(), n);
    for (idx, cell) in raw.cells.iter().enumerate() {
        let (t, i) = (idx / n, idx % n);
        m[(t, i)] = cell.ok_or_else(|| {
            Error::Data(format!(
                "missing return for {} on {}",
                raw.tickers[i], raw.dates[t]
            ))
        })?;
    }
    ReturnPanel::new(raw.dates, raw.tickers, m)
}

pub fn load_returns_csv(path: impl AsRef<Path>, layout: CsvLayout) -> Result<ReturnPanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_returns(file, layout, &path.display().to_string())
}

/// `r[t, i] = ln(p[t + 1, i] / p[t, i])`, dated by the later price.
pub fn log_returns(prices: &PriceTable) -> Result<ReturnPanel> {
    let (t_len, n) = (prices.n_dates(), prices.n_assets());
    if t_len < 2 {
        return Err(Error::Data(format!(
            "need at least 2 price rows, got {t_len}"
        )));
    }
    let mut out = DMatrix::zeros(t_len - 1, n);
    for i in 0..n {
        for t in 0..t_len {
            if prices.get(t, i).is_none() {
                return Err(Error::Data(format!(
                    "missing price for {} on {}",
                    prices.tickers[i], prices.dates[t]
                )));
            }
        }
        for t in 1..t_len {
            let (prev, cur) = (prices.get(t - 1, i).unwrap(), prices.get(t, i).unwrap());
            out[(t - 1, i)] = (cur / prev).ln();
        }
    }
    ReturnPanel::new(prices.dates[1..].to_vec(), prices.tickers.clone(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum WindowUnit {
    #[serde(rename = "trading-days")]
    TradingDays,
    #[default]
    #[serde(rename = "calendar-months")]
    CalendarMonths,
}

impl std::str::FromStr for WindowUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trading-days" | "days" => Ok(WindowUnit::TradingDays),
            "calendar-months" | "months" => Ok(WindowUnit::CalendarMonths),
            other => Err(Error::Config(format!("unknown window unit `{other}`"))),
        }
    }
}

/// One rebalancing step: estimate on `in_sample`, hold over `out_of_sample`.
/// Ranges are 0-based, half-open row indices into the panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowPair {
    pub index: usize,
    pub in_sample: Range<usize>,
    pub out_of_sample: Range<usize>,
}

/// Rolling schedule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSchedule {
    pub in_sample: usize,
    pub out_of_sample: usize,
    #[serde(default)]
    pub unit: WindowUnit,
    /// Keep a shorter trailing out-of-sample range instead of dropping it.
    #[serde(default)]
    pub allow_partial: bool,
}

impl WindowSchedule {
    pub fn new(in_sample: usize, out_of_sample: usize, unit: WindowUnit) -> Self {
        Self {
            in_sample,
            out_of_sample,
            unit,
            allow_partial: false,
        }
    }

    pub fn windows(&self, panel: &ReturnPanel) -> Result<Vec<WindowPair>> {
        let (n, k) = (self.in_sample, self.out_of_sample);
        if n == 0 || k == 0 {
            return Err(Error::Config(
                "in-sample and out-of-sample lengths must be positive".into(),
            ));
        }
        // Boundaries of the schedule's units, as row offsets; `bounds[u]` is
        // the first row of unit `u` and the last entry is the row count.
        let bounds: Vec<usize> = match self.unit {
            WindowUnit::TradingDays => (0..=panel.n_obs()).collect(),
            WindowUnit::CalendarMonths => {
                let mut b = Vec::new();
                let mut last = None;
                for (row, d) in panel.dates().iter().enumerate() {
                    let key = (d.year(), d.month());
                    if last != Some(key) {
                        b.push(row);
                        last = Some(key);
                    }
                }
                b.push(panel.n_obs());
                b
            }
        };
        let units = bounds.len() - 1;
        if n + k > units {
            return Err(Error::Config(format!(
                "in-sample ({n}) + out-of-sample ({k}) exceeds the {units} available units"
            )));
        }
        let mut out = Vec::new();
        let mut start = 0;
        loop {
            let oos_start = start + n;
            if oos_start >= units {
                break;
            }
            let oos_end = oos_start + k;
            if oos_end > units && !self.allow_partial {
                break;
            }
            out.push(WindowPair {
                index: out.len(),
                in_sample: bounds[start]..bounds[oos_start],
                out_of_sample: bounds[oos_start]..bounds[oos_end.min(units)],
            });
            start += k;
        }
        Ok(out)
    }
}

/// Rolling windows shifted by `k` units each step; incomplete tails dropped.
pub fn rolling_windows(
    panel: &ReturnPanel,
    n: usize,
    k: usize,
    unit: WindowUnit,
) -> Result<Vec<WindowPair>> {
    WindowSchedule::new(n, k, unit).windows(panel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, DATE_FORMAT).unwrap()
    }

    fn day_panel(t: usize) -> ReturnPanel {
        let start = date("2020-01-01");
        let dates = (0..t).map(|i| start + chrono::Days::new(i as u64)).collect();
        ReturnPanel::new(
            dates,
            vec!["A".into(), "B".into()],
            DMatrix::from_fn(t, 2, |r, c| (r as f64 - c as f64) * 1e-3),
        )
        .unwrap()
    }

    #[test]
    fn wide_csv_round_trips_shape() {
        let csv = "date,A,B\n2020-01-01,1,2\n2020-01-02,1.1,2.2\n2020-01-03,1.2,2.1\n";
        let t = read_prices(csv.as_bytes(), CsvLayout::Wide, "mem").unwrap();
        assert_eq!((t.n_dates(), t.n_assets()), (3, 2));
        assert_eq!(t.tickers, vec!["A", "B"]);
        assert_eq!(t.get(1, 1), Some(2.2));
    }

    #[test]
    fn long_csv_is_row_order_invariant() {
        let sorted = "date,ticker,price\n2020-01-01,A,1\n2020-01-01,B,2\n2020-01-02,A,3\n2020-01-02,B,4\n";
        let shuffled = "date,ticker,price\n2020-01-02,B,4\n2020-01-01,B,2\n2020-01-02,A,3\n2020-01-01,A,1\n";
        let a = read_prices(sorted.as_bytes(), CsvLayout::Long, "a").unwrap();
        let b = read_prices(shuffled.as_bytes(), CsvLayout::Long, "b").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_price_is_rejected() {
        let csv = "date,A\n2020-01-01,1\n2020-01-02,0.0\n";
        let err = read_prices(csv.as_bytes(), CsvLayout::Wide, "mem").unwrap_err();
        assert!(matches!(err, Error::Data(_)), "{err}");
    }

    #[test]
    fn malformed_csv_reports_line() {
        let csv = "date,A,B\n2020-01-01,1,2\n2020-01-02,abc,2\n";
        match read_prices(csv.as_bytes(), CsvLayout::Wide, "mem").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let ragged = "date,A,B\n2020-01-01,1,2\n2020-01-02,1\n";
        assert!(matches!(
            read_prices(ragged.as_bytes(), CsvLayout::Wide, "mem").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
    }

    #[test]
    fn duplicate_observations_are_rejected() {
        let long = "date,ticker,price\n2020-01-01,A,1\n2020-01-01,A,2\n";
        assert!(matches!(
            read_prices(long.as_bytes(), CsvLayout::Long, "m").unwrap_err(),
            Error::Data(_)
        ));
        let wide = "date,A\n2020-01-01,1\n2020-01-01,2\n";
        assert!(read_prices(wide.as_bytes(), CsvLayout::Wide, "m").is_err());
        let dup_ticker = "date,A,A\n2020-01-01,1,2\n";
        assert!(read_prices(dup_ticker.as_bytes(), CsvLayout::Wide, "m").is_err());
    }

    #[test]
    fn log_return_examples() {
        let csv = "date,A,B,C\n2020-01-01,100,50,100\n2020-01-02,110,50,50\n2020-01-03,110,50,50\n";
        let prices = read_prices(csv.as_bytes(), CsvLayout::Wide, "m").unwrap();
        let panel = log_returns(&prices).unwrap();
        assert_eq!(panel.n_obs(), 2);
        assert_eq!(panel.dates()[0], date("2020-01-02"));
        assert_abs_diff_eq!(panel.returns()[(0, 0)], 0.09531017980432493, epsilon = 1e-15);
        assert_eq!(panel.returns()[(0, 1)], 0.0);
        assert_eq!(panel.returns()[(1, 1)], 0.0);
        assert_abs_diff_eq!(panel.returns()[(0, 2)], -0.6931471805599453, epsilon = 1e-15);
    }

    #[test]
    fn missing_price_is_not_imputed() {
        let csv = "date,A,B\n2020-01-01,1,2\n2020-01-02,,2\n2020-01-03,1,2\n";
        let prices = read_prices(csv.as_bytes(), CsvLayout::Wide, "m").unwrap();
        assert!(matches!(log_returns(&prices).unwrap_err(), Error::Data(_)));
        let long = "date,ticker,price\n2020-01-01,A,1\n2020-01-01,B,2\n2020-01-02,A,1\n";
        let prices = read_prices(long.as_bytes(), CsvLayout::Long, "m").unwrap();
        assert!(log_returns(&prices).is_err());
    }

    #[test]
    fn returns_csv_loads_directly() {
        let csv = "date,A,B\n2020-01-01,0.01,-0.02\n2020-01-02,0.0,0.03\n";
        let panel = read_returns(csv.as_bytes(), CsvLayout::Wide, "m").unwrap();
        assert_eq!(panel.returns()[(0, 1)], -0.02);
        let negative_ok = "date,ticker,r\n2020-01-01,A,-0.5\n2020-01-02,A,0.1\n";
        assert!(read_returns(negative_ok.as_bytes(), CsvLayout::Long, "m").is_ok());
    }

    #[test]
    fn trading_day_windows() {
        let w = rolling_windows(&day_panel(100), 40, 20, WindowUnit::TradingDays).unwrap();
        let got: Vec<_> = w
            .iter()
            .map(|p| (p.in_sample.clone(), p.out_of_sample.clone()))
            .collect();
        assert_eq!(
            got,
            vec![(0..40, 40..60), (20..60, 60..80), (40..80, 80..100)]
        );
        assert_eq!(
            rolling_windows(&day_panel(60), 40, 20, WindowUnit::TradingDays)
                .unwrap()
                .len(),
            1
        );
        assert!(matches!(
            rolling_windows(&day_panel(59), 40, 20, WindowUnit::TradingDays).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn partial_tail_is_optional() {
        let panel = day_panel(70);
        assert_eq!(
            rolling_windows(&panel, 40, 20, WindowUnit::TradingDays)
                .unwrap()
                .len(),
            1
        );
        let mut sched = WindowSchedule::new(40, 20, WindowUnit::TradingDays);
        sched.allow_partial = true;
        let w = sched.windows(&panel).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].out_of_sample, 60..70);
    }

    #[test]
    fn calendar_month_windows_follow_month_boundaries() {
        // Daily dates from 2020-01-01 through 2020-06-30.
        let start = date("2020-01-01");
        let dates: Vec<NaiveDate> = (0..182).map(|i| start + chrono::Days::new(i)).collect();
        let t = dates.len();
        let panel =
            ReturnPanel::new(dates.clone(), vec!["A".into()], DMatrix::zeros(t, 1)).unwrap();
        let w = rolling_windows(&panel, 2, 1, WindowUnit::CalendarMonths).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(dates[w[0].in_sample.start], date("2020-01-01"));
        assert_eq!(dates[w[0].in_sample.end - 1], date("2020-02-29"));
        assert_eq!(dates[w[0].out_of_sample.start], date("2020-03-01"));
        assert_eq!(dates[w[0].out_of_sample.end - 1], date("2020-03-31"));
        assert_eq!(w[3].out_of_sample.end, t);
    }
}
