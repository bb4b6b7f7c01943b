//! Log returns, rolling window schedules and windowed Pearson matrices.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{PricePanel, ReturnPanel};

/// Log returns `ln p(t+1) - ln p(t)`; the output is one sample shorter.
pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    let (_, n_dates) = panel.shape();
    if n_dates < 2 {
        return Err(Error::Domain("at least two prices are needed for a return".into()));
    }
    let mut returns = Vec::with_capacity(panel.tickers().len());
    for (ticker, row) in panel.tickers().iter().zip(panel.prices()) {
        let logs = row
            .iter()
            .zip(panel.dates())
            .map(|(cell, date)| match cell {
                Some(p) if *p > 0.0 => Ok(p.ln()),
                Some(p) => Err(Error::Domain(format!("price {p} of {ticker} on {date} is not positive"))),
                None => Err(Error::Domain(format!("missing price for {ticker} on {date}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        returns.push(logs.windows(2).map(|w| w[1] - w[0]).collect());
    }
    ReturnPanel::new(panel.tickers().to_vec(), panel.dates()[1..].to_vec(), returns)
}

/// Rolling window width and shift, in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub width: usize,
    pub step: usize,
}

impl WindowSpec {
    pub fn new(width: usize, step: usize) -> Result<Self> {
        if width < 2 || step < 1 {
            return Err(Error::Usage(format!("window width {width} must be >= 2 and step {step} >= 1")));
        }
        Ok(Self { width, step })
    }

    /// The correlation matrix of `n_assets` series is only non-singular when
    /// the window holds at least that many samples.
    pub fn check_nonsingular(&self, n_assets: usize) -> Result<()> {
        if self.width < n_assets {
            return Err(Error::Usage(format!(
                "window width {} is smaller than the number of assets {n_assets}",
                self.width
            )));
        }
        Ok(())
    }
}

/// Half-open sample range `[start, end)` of window number `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Windows `[k*step, k*step + width)` for `k = 0..=(len - width) / step`.
pub fn window_schedule(len: usize, spec: WindowSpec) -> Result<Vec<Window>> {
    let spec = WindowSpec::new(spec.width, spec.step)?;
    if len < spec.width {
        return Err(Error::InsufficientData { len, width: spec.width, step: spec.step });
    }
    let count = (len - spec.width) / spec.step + 1;
    Ok((0..count).map(|k| Window { index: k, start: k * spec.step, end: k * spec.step + spec.width }).collect())
}

/// Pearson correlations of every asset pair over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub tickers: Vec<String>,
    pub window: Window,
    pub start_date: String,
    pub end_date: String,
    /// `N x N` coefficients.
    pub values: DMatrix<f64>,
    /// Sample standard deviation of each asset over the window.
    pub stdev: Vec<f64>,
    /// Mean return of each asset over the window.
    pub mean: Vec<f64>,
    /// Assets with zero variance in this window; their off-diagonal entries are 0.
    pub degenerate: Vec<usize>,
}

impl CorrelationMatrix {
    /// Wraps a precomputed coefficient matrix that carries no window statistics.
    ///
    /// `values` must be square, symmetric, finite, within `[-1, 1]` and have a unit diagonal.
    pub fn from_values(tickers: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let n = tickers.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Data(format!("{}x{} matrix for {n} tickers", values.nrows(), values.ncols())));
        }
        for i in 0..n {
            if values[(i, i)] != 1.0 {
                return Err(Error::Data(format!("diagonal entry {i} is {}, not 1", values[(i, i)])));
            }
            for j in 0..i {
                let (a, b) = (values[(i, j)], values[(j, i)]);
                if !(a.is_finite() && (-1.0..=1.0).contains(&a)) || a != b {
                    return Err(Error::Data(format!("entries ({i}, {j}) = {a} and ({j}, {i}) = {b} are invalid")));
                }
            }
        }
        Ok(Self {
            tickers,
            window: Window { index: 0, start: 0, end: 0 },
            start_date: String::new(),
            end_date: String::new(),
            values,
            stdev: vec![f64::NAN; n],
            mean: vec![f64::NAN; n],
            degenerate: Vec::new(),
        })
    }

    /// Reads the layout written by [`CorrelationMatrix::write_csv`].
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let tickers: Vec<String> =
            r.headers().map_err(|e| Error::Data(e.to_string()))?.iter().map(str::to_string).collect();
        let n = tickers.len();
        let mut values = DMatrix::zeros(n, n);
        let mut rows = 0;
        for (i, record) in r.records().enumerate() {
            let record = record.map_err(|e| Error::Data(e.to_string()))?;
            if i >= n || record.len() != n {
                return Err(Error::Data(format!("correlation row {} has an unexpected shape", i + 1)));
            }
            for (j, cell) in record.iter().enumerate() {
                values[(i, j)] = cell
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line: i as u64 + 2, message: format!("bad coefficient {cell:?}") })?;
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Data(format!("{rows} correlation rows for {n} tickers")));
        }
        Self::from_values(tickers, values)
    }

    pub fn n(&self) -> usize {
        self.tickers.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Sample covariance `rho_ij * sigma_i * sigma_j`.
    pub fn covariance(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.n(), |i, j| self.values[(i, j)] * self.stdev[i] * self.stdev[j])
    }

    pub fn mean_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mean)
    }

    /// Human-readable notes about degenerate assets.
    pub fn warnings(&self) -> Vec<String> {
        self.degenerate
            .iter()
            .map(|&i| {
                format!("window {}: {} has zero variance, correlations set to 0", self.window.index, self.tickers[i])
            })
            .collect()
    }

    /// CSV with the tickers as header and one row per asset.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.tickers).map_err(|e| Error::Data(e.to_string()))?;
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.n()).map(|j| self.values[(i, j)].to_string()).collect();
            w.write_record(&row).map_err(|e| Error::Data(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// JSON with window metadata and row-major values.
    pub fn to_json(&self) -> serde_json::Value {
        let values: Vec<Vec<f64>> = (0..self.n()).map(|i| self.values.row(i).iter().copied().collect()).collect();
        serde_json::json!({
            "window": self.window.index,
            "start": self.window.start,
            "end": self.window.end,
            "start_date": self.start_date,
            "end_date": self.end_date,
            "tickers": self.tickers,
            "values": values,
            "stdev": self.stdev,
            "mean": self.mean,
            "degenerate": self.degenerate.iter().map(|&i| &self.tickers[i]).collect::<Vec<_>>(),
        })
    }
}

/// Pearson matrix of `returns` over `window`.
///
/// Means and co-moments are accumulated in one Welford pass, which avoids the
/// cancellation of the textbook sum-of-squares formula on small returns.
pub fn pearson_window(returns: &ReturnPanel, window: Window) -> Result<CorrelationMatrix> {
    if window.end > returns.len() || window.len() < 2 {
        return Err(Error::Usage(format!(
            "window [{}, {}) invalid for series of length {}",
            window.start,
            window.end,
            returns.len()
        )));
    }
    let n = returns.n_assets();
    let series = returns.returns();
    let mut mean = vec![0.0; n];
    let mut comoment = DMatrix::<f64>::zeros(n, n);
    let mut delta = vec![0.0; n];
    for (count, t) in (window.start..window.end).enumerate() {
        let k = (count + 1) as f64;
        for i in 0..n {
            delta[i] = series[i][t] - mean[i];
            mean[i] += delta[i] / k;
        }
        for j in 0..n {
            let after = series[j][t] - mean[j];
            for i in 0..=j {
                comoment[(i, j)] += delta[i] * after;
            }
        }
    }

    let dof = (window.len() - 1) as f64;
    let var: Vec<f64> = (0..n).map(|i| comoment[(i, i)].max(0.0)).collect();
    let degenerate: Vec<usize> = (0..n).filter(|&i| var[i] <= 0.0).collect();
    let mut values = DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        for i in 0..j {
            let rho = if var[i] > 0.0 && var[j] > 0.0 {
                (comoment[(i, j)] / (var[i].sqrt() * var[j].sqrt())).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            values[(i, j)] = rho;
            values[(j, i)] = rho;
        }
    }
    Ok(CorrelationMatrix {
        tickers: returns.tickers().to_vec(),
        window,
        start_date: returns.dates()[window.start].clone(),
        end_date: returns.dates()[window.end - 1].clone(),
        values,
        stdev: var.iter().map(|v| (v / dof).sqrt()).collect(),
        mean,
        degenerate,
    })
}

/// One correlation matrix per scheduled window, in window order.
pub fn rolling_correlations(returns: &ReturnPanel, spec: WindowSpec) -> Result<Vec<CorrelationMatrix>> {
    window_schedule(returns.len(), spec)?.into_par_iter().map(|w| pearson_window(returns, w)).collect()
}
