//! Loading, validating and cleaning price and return panels.
//!
//! Two on-disk layouts are supported:
//!
//! * wide: header `date,TICKER1,TICKER2,...`, one row per date, an empty cell
//!   marks a missing observation;
//! * long: header `date,ticker,adj_close`, one row per observation.
//!
//! Dates are ISO-8601 (`YYYY-MM-DD`) strings, so lexicographic order is
//! chronological order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// File layout of a price panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Wide,
    Long,
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wide" => Ok(Layout::Wide),
            "long" => Ok(Layout::Long),
            other => Err(Error::Usage(format!("unknown layout `{other}`"))),
        }
    }
}

/// Adjusted close prices, assets by dates, with possibly missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<String>,
    dates: Vec<String>,
    prices: Vec<Vec<Option<f64>>>,
}

impl PricePanel {
    /// Builds a panel, checking shape, ordering and positivity.
    pub fn new(tickers: Vec<String>, dates: Vec<String>, prices: Vec<Vec<Option<f64>>>) -> Result<Self> {
        check_tickers(&tickers)?;
        check_dates(&dates)?;
        if prices.len() != tickers.len() {
            return Err(Error::Data(format!("{} price rows for {} tickers", prices.len(), tickers.len())));
        }
        for (ticker, row) in tickers.iter().zip(&prices) {
            if row.len() != dates.len() {
                return Err(Error::Data(format!("ticker {ticker} has {} cells for {} dates", row.len(), dates.len())));
            }
            for (date, cell) in dates.iter().zip(row) {
                if let Some(p) = cell {
                    if !(p.is_finite() && *p > 0.0) {
                        return Err(Error::Data(format!("non-positive price {p} for {ticker} on {date}")));
                    }
                }
            }
        }
        Ok(Self { tickers, dates, prices })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    /// Price rows, one per ticker.
    pub fn prices(&self) -> &[Vec<Option<f64>>] {
        &self.prices
    }

    /// `(assets, dates)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.tickers.len(), self.dates.len())
    }

    pub fn has_missing(&self) -> bool {
        self.prices.iter().flatten().any(Option::is_none)
    }

    /// Number of present cells per asset.
    pub fn coverage_counts(&self) -> Vec<usize> {
        self.prices.iter().map(|row| row.iter().filter(|c| c.is_some()).count()).collect()
    }
}

/// Daily log returns, assets by dates, complete and finite.
///
/// `dates[t]` is the date at which the return `returns[i][t]` is realized,
/// i.e. the later of the two prices it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPanel {
    tickers: Vec<String>,
    dates: Vec<String>,
    returns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn new(tickers: Vec<String>, dates: Vec<String>, returns: Vec<Vec<f64>>) -> Result<Self> {
        check_tickers(&tickers)?;
        check_dates(&dates)?;
        if returns.len() != tickers.len() {
            return Err(Error::Data(format!("{} return rows for {} tickers", returns.len(), tickers.len())));
        }
        for (ticker, row) in tickers.iter().zip(&returns) {
            if row.len() != dates.len() {
                return Err(Error::Data(format!(
                    "ticker {ticker} has {} returns for {} dates",
                    row.len(),
                    dates.len()
                )));
            }
            if let Some(bad) = row.iter().find(|r| !r.is_finite()) {
                return Err(Error::Data(format!("non-finite return {bad} for {ticker}")));
            }
        }
        Ok(Self { tickers, dates, returns })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    /// Return series, one per ticker.
    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    /// Series length `T`.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Writes the panel in the wide layout.
    pub fn write_wide_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["date".to_string()];
        header.extend(self.tickers.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (t, date) in self.dates.iter().enumerate() {
            let mut rec = vec![date.clone()];
            rec.extend(self.returns.iter().map(|row| format!("{:e}", row[t])));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a wide-layout return file; every cell must be present.
    pub fn read_wide_csv<R: Read>(input: R) -> Result<Self> {
        let raw = read_wide(input, false)?;
        let returns = raw
            .cells
            .into_iter()
            .zip(&raw.tickers)
            .map(|(row, ticker)| {
                row.into_iter()
                    .zip(&raw.dates)
                    .map(|(c, date)| c.ok_or_else(|| Error::Data(format!("missing return for {ticker} on {date}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.tickers, raw.dates, returns)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_wide_csv(File::open(path)?)
    }
}

/// Reads a price panel from `path`.
pub fn load_price_panel(path: &Path, layout: Layout) -> Result<PricePanel> {
    read_price_panel(File::open(path)?, layout)
}

/// Reads a price panel from any reader; dates come out sorted ascending.
pub fn read_price_panel<R: Read>(input: R, layout: Layout) -> Result<PricePanel> {
    let raw = match layout {
        Layout::Wide => read_wide(input, true)?,
        Layout::Long => read_long(input)?,
    };
    PricePanel::new(raw.tickers, raw.dates, raw.cells)
}

/// Drops assets below `min_coverage` and fills the remaining gaps.
///
/// Coverage is the fraction of present cells over all panel dates. Interior
/// gaps are forward-filled; dates before the latest first observation of any
/// retained asset are trimmed, so the result has no missing cells.
pub fn align_and_filter(panel: &PricePanel, min_coverage: f64) -> Result<PricePanel> {
    if !(min_coverage > 0.0 && min_coverage <= 1.0) {
        return Err(Error::Usage(format!("min_coverage {min_coverage} outside (0, 1]")));
    }
    let n_dates = panel.dates.len();
    let keep: Vec<usize> = panel
        .coverage_counts()
        .iter()
        .enumerate()
        .filter(|&(_, &present)| n_dates > 0 && present as f64 >= min_coverage * n_dates as f64)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyUniverse { min_coverage });
    }

    let first_seen =
        keep.iter().map(|&i| panel.prices[i].iter().position(Option::is_some).unwrap_or(n_dates)).max().unwrap_or(0);
    if first_seen >= n_dates {
        return Err(Error::EmptyUniverse { min_coverage });
    }

    let prices = keep
        .iter()
        .map(|&i| {
            let mut last = None;
            panel.prices[i]
                .iter()
                .map(|cell| {
                    if cell.is_some() {
                        last = *cell;
                    }
                    last
                })
                .skip(first_seen)
                .collect()
        })
        .collect();
    let tickers = keep.iter().map(|&i| panel.tickers[i].clone()).collect();
    let dates = panel.dates[first_seen..].to_vec();
    PricePanel::new(tickers, dates, prices)
}

struct RawPanel {
    tickers: Vec<String>,
    dates: Vec<String>,
    cells: Vec<Vec<Option<f64>>>,
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse { line, message: format!("{kind:?}") },
    }
}

fn parse_cell(raw: &str, line: u64) -> Result<Option<f64>> {
    let s = raw.trim();
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|_| Error::Parse { line, message: format!("invalid number `{s}`") })
}

fn parse_date(raw: &str, line: u64) -> Result<String> {
    let s = raw.trim();
    chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| Error::Parse { line, message: format!("invalid ISO-8601 date `{s}`") })?;
    Ok(s.to_string())
}

fn read_wide<R: Read>(input: R, prices: bool) -> Result<RawPanel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0).map(str::trim) != Some("date") {
        return Err(Error::Parse { line: 1, message: "first column must be `date`".into() });
    }
    let tickers: Vec<String> = header.iter().skip(1).map(|t| t.trim().to_string()).collect();
    check_tickers(&tickers)?;

    let mut rows: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(&rec[0], line)?;
        let cells = rec.iter().skip(1).map(|c| parse_cell(c, line)).collect::<Result<Vec<_>>>()?;
        if prices {
            if let Some(p) = cells.iter().flatten().find(|p| !(**p > 0.0 && p.is_finite())) {
                return Err(Error::Data(format!("non-positive price {p} on line {line}")));
            }
        }
        if rows.insert(date.clone(), cells).is_some() {
            return Err(Error::Data(format!("duplicate date {date} on line {line}")));
        }
    }

    let dates: Vec<String> = rows.keys().cloned().collect();
    let mut cells = vec![Vec::with_capacity(dates.len()); tickers.len()];
    for row in rows.into_values() {
        for (col, cell) in cells.iter_mut().zip(row) {
            col.push(cell);
        }
    }
    Ok(RawPanel { tickers, dates, cells })
}

fn read_long<R: Read>(input: R) -> Result<RawPanel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols != ["date", "ticker", "adj_close"] {
        return Err(Error::Parse { line: 1, message: "expected header `date,ticker,adj_close`".into() });
    }

    let mut obs: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut tickers = BTreeSet::new();
    let mut dates = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let date = parse_date(&rec[0], line)?;
        let ticker = rec[1].trim().to_string();
        if ticker.is_empty() {
            return Err(Error::Parse { line, message: "empty ticker".into() });
        }
        let Some(price) = parse_cell(&rec[2], line)? else {
            continue;
        };
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::Data(format!("non-positive price {price} on line {line}")));
        }
        tickers.insert(ticker.clone());
        dates.insert(date.clone());
        if obs.insert((ticker.clone(), date.clone()), price).is_some() {
            return Err(Error::Data(format!("duplicate cell ({date}, {ticker}) on line {line}")));
        }
    }

    let dates: Vec<String> = dates.into_iter().collect();
    let tickers: Vec<String> = tickers.into_iter().collect();
    let cells =
        tickers.iter().map(|t| dates.iter().map(|d| obs.get(&(t.clone(), d.clone())).copied()).collect()).collect();
    Ok(RawPanel { tickers, dates, cells })
}

fn check_tickers(tickers: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for t in tickers {
        if t.is_empty() {
            return Err(Error::Data("empty ticker".into()));
        }
        if !seen.insert(t) {
            return Err(Error::Data(format!("duplicate ticker {t}")));
        }
    }
    Ok(())
}

fn check_dates(dates: &[String]) -> Result<()> {
    if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Data(format!("dates not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}
