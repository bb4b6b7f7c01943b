//! Randomized inter- versus intra-community experiments over many windows.
//!
//! Every (window, sample, mode, size) task draws its selection from its own
//! seed, derived from the master seed, so results do not depend on how the
//! tasks are scheduled.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::frontier::{efficient_frontier, frontier_aggregate, linear_bins, BinStat, FrontierPoint};
use super::select::{select_inter_community, select_intra_community, Mode, StockSelection};
use super::shortfall::minimize_es;
use crate::community::Partition;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::pmfg::PlanarGraph;
use crate::returns::Window;
use crate::seed;

/// Aligned per-window inputs: `graphs[k]` and `partitions[k]` belong to `windows[k]`.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentInput<'a> {
    pub returns: &'a ReturnPanel,
    pub windows: &'a [Window],
    pub graphs: &'a [PlanarGraph],
    pub partitions: &'a [Partition],
}

impl ExperimentInput<'_> {
    fn validate(&self) -> Result<()> {
        let k = self.windows.len();
        if k == 0 || self.graphs.len() != k || self.partitions.len() != k {
            return Err(Error::Usage(format!(
                "{} windows, {} graphs and {} partitions are not aligned",
                k,
                self.graphs.len(),
                self.partitions.len()
            )));
        }
        for (g, p) in self.graphs.iter().zip(self.partitions) {
            if g.n_nodes() != self.returns.n_assets() {
                return Err(Error::Usage(format!(
                    "graph has {} nodes but the panel has {} assets",
                    g.n_nodes(),
                    self.returns.n_assets()
                )));
            }
            p.check_cover(g)?;
        }
        if let Some(w) = self.windows.iter().find(|w| w.end > self.returns.len()) {
            return Err(Error::Usage(format!("window {} ends past the panel", w.index)));
        }
        Ok(())
    }

    fn start_date(&self, k: usize) -> String {
        self.returns.dates()[self.windows[k].start].clone()
    }

    /// Selection for one task, or the reason the mode is infeasible in this window.
    fn select(
        &self,
        k: usize,
        mode: Mode,
        m: usize,
        sample: usize,
        master: u64,
    ) -> Result<std::result::Result<StockSelection, Infeasible>> {
        let w = self.windows[k].index as u64;
        let s = seed::derive(master, &[w, sample as u64, mode.id(), m as u64]);
        let p = &self.partitions[k];
        let picked = match mode {
            Mode::Inter => select_inter_community(&self.graphs[k], p, m, s),
            Mode::Intra => select_intra_community(p, self.returns.tickers(), m, s),
        };
        match picked {
            Ok(mut sel) => {
                sel.window = Some(self.windows[k].index);
                Ok(Ok(sel))
            }
            Err(Error::Size(_)) => Ok(Err(match mode {
                Mode::Inter => Infeasible::TooFewCommunities,
                Mode::Intra => Infeasible::NoLargeCommunity,
            })),
            Err(e) => Err(e),
        }
    }
}

/// Why a (window, mode) cell has no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasible {
    /// Fewer communities than the portfolio size.
    TooFewCommunities,
    /// No community has as many members as the portfolio size.
    NoLargeCommunity,
}

impl Infeasible {
    pub fn code(self) -> &'static str {
        match self {
            Infeasible::TooFewCommunities => "too_few_communities",
            Infeasible::NoLargeCommunity => "no_large_community",
        }
    }
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

fn status(reason: Option<Infeasible>) -> &'static str {
    reason.map_or("ok", Infeasible::code)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(e.to_string())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::Usage("at least one sample per window is required".into()));
    }
    Ok(())
}

/// Optimized ES of every sample of one (window, mode, m) cell.
fn es_samples(
    input: &ExperimentInput<'_>,
    k: usize,
    mode: Mode,
    m: usize,
    tail: f64,
    samples: usize,
    master: u64,
) -> Result<std::result::Result<Vec<f64>, Infeasible>> {
    let mut out = Vec::with_capacity(samples);
    for sample in 0..samples {
        match input.select(k, mode, m, sample, master)? {
            Ok(sel) => out.push(minimize_es(input.returns, input.windows[k], &sel, tail)?.es),
            Err(reason) => return Ok(Err(reason)),
        }
    }
    Ok(Ok(out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsSeriesRow {
    pub window: usize,
    pub window_start_date: String,
    pub mode: Mode,
    pub mean_es: Option<f64>,
    pub n_samples: usize,
    pub infeasible: Option<Infeasible>,
}

/// Mean optimized ES per window and mode over `samples` random selections of size `m`.
///
/// Rows come in window order, inter before intra.
pub fn es_experiment_series(
    input: &ExperimentInput<'_>,
    m: usize,
    tail: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<EsSeriesRow>> {
    input.validate()?;
    check_samples(samples)?;
    let per_window: Vec<Vec<EsSeriesRow>> = (0..input.windows.len())
        .into_par_iter()
        .map(|k| {
            Mode::ALL
                .iter()
                .map(|&mode| {
                    let cell = es_samples(input, k, mode, m, tail, samples, seed)?;
                    let (values, infeasible) = match cell {
                        Ok(v) => (v, None),
                        Err(r) => (Vec::new(), Some(r)),
                    };
                    Ok(EsSeriesRow {
                        window: input.windows[k].index,
                        window_start_date: input.start_date(k),
                        mode,
                        mean_es: mean(&values),
                        n_samples: values.len(),
                        infeasible,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_window.into_iter().flatten().collect())
}

/// CSV `window_start_date,mode,mean_es,n_samples,status`; infeasible rows
/// leave `mean_es` empty and carry the reason code in `status`.
pub fn write_es_series_csv<W: Write>(rows: &[EsSeriesRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window_start_date", "mode", "mean_es", "n_samples", "status"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.window_start_date.clone(),
            r.mode.to_string(),
            opt(r.mean_es),
            r.n_samples.to_string(),
            status(r.infeasible).to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsSizeCell {
    pub m: usize,
    pub mode: Mode,
    /// Mean over every sample of every feasible window.
    pub mean_es: Option<f64>,
    /// Share of windows in which the mode admits a portfolio of size `m`.
    pub feasible_fraction: f64,
    pub n_samples: usize,
}

/// Largest portfolio size feasible in every window, per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeCeilings {
    /// Minimum community count over windows.
    pub inter: usize,
    /// Minimum over windows of the largest community size.
    pub intra: usize,
}

impl SizeCeilings {
    pub fn from_partitions(partitions: &[Partition]) -> Self {
        Self {
            inter: partitions.iter().map(Partition::n_communities).min().unwrap_or(0),
            intra: partitions.iter().map(|p| p.sizes().into_iter().max().unwrap_or(0)).min().unwrap_or(0),
        }
    }

    pub fn inter_below_intra(&self) -> bool {
        self.inter < self.intra
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsVsSize {
    pub cells: Vec<EsSizeCell>,
    pub ceilings: SizeCeilings,
}

impl EsVsSize {
    pub fn cell(&self, m: usize, mode: Mode) -> Option<&EsSizeCell> {
        self.cells.iter().find(|c| c.m == m && c.mode == mode)
    }

    /// CSV `m,mode,mean_es,feasible_fraction`; cells feasible in no window leave `mean_es` empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["m", "mode", "mean_es", "feasible_fraction"]).map_err(csv_err)?;
        for c in &self.cells {
            w.write_record([c.m.to_string(), c.mode.to_string(), opt(c.mean_es), c.feasible_fraction.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean optimized ES for every size in `m_grid` (ascending) and both modes.
pub fn es_vs_size(
    input: &ExperimentInput<'_>,
    m_grid: &[usize],
    tail: f64,
    samples: usize,
    seed: u64,
) -> Result<EsVsSize> {
    input.validate()?;
    check_samples(samples)?;
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[0] >= w[1]) || m_grid[0] == 0 {
        return Err(Error::Usage("portfolio sizes must be positive and strictly ascending".into()));
    }
    let tasks: Vec<(usize, Mode)> = m_grid.iter().flat_map(|&m| Mode::ALL.map(|mode| (m, mode))).collect();
    let cells = tasks
        .into_par_iter()
        .map(|(m, mode)| {
            let mut values = Vec::new();
            let mut feasible = 0;
            for k in 0..input.windows.len() {
                if let Ok(v) = es_samples(input, k, mode, m, tail, samples, seed)? {
                    feasible += 1;
                    values.extend(v);
                }
            }
            Ok(EsSizeCell {
                m,
                mode,
                mean_es: mean(&values),
                feasible_fraction: feasible as f64 / input.windows.len() as f64,
                n_samples: values.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EsVsSize { cells, ceilings: SizeCeilings::from_partitions(input.partitions) })
}

/// Sample-averaged frontier point of one (mode, window, q) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub mode: Mode,
    pub window: usize,
    pub q: f64,
    pub risk: Option<f64>,
    pub expected_return: Option<f64>,
    pub infeasible: Option<Infeasible>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierExperiment {
    pub rows: Vec<FrontierRow>,
    /// Risk levels shared by both modes' aggregates.
    pub risk_bins: Vec<f64>,
    /// Aggregate over all windows and samples, per mode.
    pub inter: Vec<BinStat>,
    pub intra: Vec<BinStat>,
}

impl FrontierExperiment {
    pub fn aggregate(&self, mode: Mode) -> &[BinStat] {
        match mode {
            Mode::Inter => &self.inter,
            Mode::Intra => &self.intra,
        }
    }

    /// `(risk, inter mean return, intra mean return)` at bins both modes cover.
    pub fn shared_bins(&self) -> Vec<(f64, f64, f64)> {
        self.inter
            .iter()
            .filter_map(|a| {
                self.intra.iter().find(|b| b.risk == a.risk).map(|b| (a.risk, a.mean_return, b.mean_return))
            })
            .collect()
    }

    /// CSV `mode,window,q,risk,return,status`.
    pub fn write_rows_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["mode", "window", "q", "risk", "return", "status"]).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.mode.to_string(),
                r.window.to_string(),
                r.q.to_string(),
                opt(r.risk),
                opt(r.expected_return),
                status(r.infeasible).to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `risk_bin,mean_return,var_return,mode`.
    pub fn write_aggregate_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["risk_bin", "mean_return", "var_return", "mode"]).map_err(csv_err)?;
        for mode in Mode::ALL {
            for b in self.aggregate(mode) {
                w.write_record([
                    b.risk.to_string(),
                    b.mean_return.to_string(),
                    b.var_return.to_string(),
                    mode.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Efficient frontiers of `samples` random selections of size `m` per window
/// and mode, averaged per `q` within each window and aggregated onto
/// `n_bins` risk levels spanning every sampled frontier.
pub fn frontier_experiment(
    input: &ExperimentInput<'_>,
    m: usize,
    q_grid: &[f64],
    samples: usize,
    n_bins: usize,
    seed: u64,
) -> Result<FrontierExperiment> {
    input.validate()?;
    check_samples(samples)?;
    type Cell = std::result::Result<Vec<Vec<FrontierPoint>>, Infeasible>;
    let cells: Vec<(usize, Mode, Cell)> = (0..input.windows.len())
        .into_par_iter()
        .flat_map_iter(|k| Mode::ALL.map(|mode| (k, mode)))
        .map(|(k, mode)| {
            let mut frontiers = Vec::with_capacity(samples);
            for sample in 0..samples {
                match input.select(k, mode, m, sample, seed)? {
                    Ok(sel) => frontiers.push(efficient_frontier(input.returns, input.windows[k], &sel, q_grid)?),
                    Err(reason) => return Ok((k, mode, Err(reason))),
                }
            }
            Ok((k, mode, Ok(frontiers)))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut pooled: [Vec<Vec<FrontierPoint>>; 2] = [Vec::new(), Vec::new()];
    for mode in Mode::ALL {
        for (k, _, cell) in cells.iter().filter(|c| c.1 == mode) {
            let window = input.windows[*k].index;
            for &q in q_grid {
                let row = match cell {
                    Ok(frontiers) => {
                        let pts: Vec<&FrontierPoint> =
                            frontiers.iter().filter_map(|f| f.iter().find(|p| p.q == q)).collect();
                        let n = pts.len() as f64;
                        FrontierRow {
                            mode,
                            window,
                            q,
                            risk: Some(pts.iter().map(|p| p.risk).sum::<f64>() / n),
                            expected_return: Some(pts.iter().map(|p| p.expected_return).sum::<f64>() / n),
                            infeasible: None,
                        }
                    }
                    Err(reason) => {
                        FrontierRow { mode, window, q, risk: None, expected_return: None, infeasible: Some(*reason) }
                    }
                };
                rows.push(row);
            }
            if let Ok(frontiers) = cell {
                pooled[mode.id() as usize].extend(frontiers.iter().cloned());
            }
        }
    }

    let risks = pooled.iter().flatten().flatten().map(|p| p.risk);
    let (lo, hi) = risks.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let risk_bins = if lo <= hi { linear_bins(lo, hi, n_bins) } else { Vec::new() };
    let aggregate = |frontiers: &[Vec<FrontierPoint>]| match frontier_aggregate(frontiers, &risk_bins) {
        Ok(stats) => Ok(stats),
        Err(Error::Aggregation(_)) | Err(Error::Usage(_)) => Ok(Vec::new()),
        Err(e) => Err(e),
    };
    let inter = aggregate(&pooled[0])?;
    let intra = aggregate(&pooled[1])?;
    Ok(FrontierExperiment { rows, risk_bins, inter, intra })
}
