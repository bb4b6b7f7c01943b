//! The four pipeline stages and their on-disk artifacts.
//!
//! Layout under the output directory:
//!
//! ```text
//! synthetic/  returns.csv labels.csv manifest.json
//! correlate/  returns.csv windows/wNNNN.{csv,json} manifest.json
//! analyze/    graphs/wNNNN.{csv,json} partitions/wNNNN.csv summary.csv cooccurrence.csv manifest.json
//! portfolio/  frontier.csv frontier_aggregate.csv es_series.csv es_vs_size.csv manifest.json
//! ```
//!
//! Each stage key covers its parameters and the digest of every upstream
//! manifest, so changing anything upstream invalidates everything below it.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use commfolio_core::analysis::{analyze_correlation, WindowAnalysis};
use commfolio_core::community::stats::write_series_csv;
use commfolio_core::community::{community_count_series, cooccurrence, Partition};
use commfolio_core::ingest::{align_and_filter, read_price_panel, ReturnPanel};
use commfolio_core::pmfg::PlanarGraph;
use commfolio_core::portfolio::{
    es_experiment_series, es_vs_size, frontier_experiment, write_es_series_csv, ExperimentInput, Mode,
};
use commfolio_core::returns::{
    log_returns, rolling_correlations, window_schedule, CorrelationMatrix, Window, WindowSpec,
};
use commfolio_core::synthetic::generate_synthetic_market;
use commfolio_core::Error as CoreError;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{InputKind, PipelineConfig};
use crate::error::{io_err, CliError, Result};
use crate::store::{cached, key_of, sha256_hex, Manifest, StageWriter};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synthetic,
    Correlate,
    Analyze,
    Portfolio,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Synthetic => "synthetic",
            Stage::Correlate => "correlate",
            Stage::Analyze => "analyze",
            Stage::Portfolio => "portfolio",
        }
    }

    pub fn dir(self, cfg: &PipelineConfig) -> PathBuf {
        cfg.out.join(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub stage: Stage,
    /// The outputs of an earlier identical run were reused.
    pub cached: bool,
    pub manifest: Manifest,
}

impl StageReport {
    /// One-line human summary.
    pub fn summary(&self) -> String {
        let v = &self.manifest.value;
        let detail = match self.stage {
            Stage::Synthetic => format!("{} assets x {} samples", v["n_assets"], v["length"]),
            Stage::Correlate => format!("{} windows", v["n_windows"]),
            Stage::Analyze => format!("{} windows, mean n_c {}", v["n_windows"], v["mean_n_c"]),
            Stage::Portfolio => {
                format!("size ceilings inter {} intra {}", v["ceilings"]["inter"], v["ceilings"]["intra"])
            }
        };
        let tag = if self.cached { " (cached)" } else { "" };
        format!("{}: {detail} -> {}{tag}", self.stage.name(), self.manifest.dir.display())
    }
}

fn reuse(stage: Stage, dir: &Path, key: &str) -> Option<StageReport> {
    cached(dir, key).map(|manifest| StageReport { stage, cached: true, manifest })
}

fn window_file(dir: &str, index: usize, ext: &str) -> String {
    format!("{dir}/w{index:04}.{ext}")
}

fn corrupt(stage: Stage, message: impl Into<String>) -> CliError {
    CliError::Corrupt { stage: stage.name(), message: message.into() }
}

fn field<T: for<'de> Deserialize<'de>>(m: &Manifest, stage: Stage, name: &str) -> Result<T> {
    let v = m.value.get(name).cloned().ok_or_else(|| corrupt(stage, format!("manifest lacks `{name}`")))?;
    serde_json::from_value(v).map_err(|e| corrupt(stage, format!("manifest field `{name}`: {e}")))
}

/// Writes the synthetic return panel and its ground-truth block labels.
pub fn run_synthetic(cfg: &PipelineConfig) -> Result<StageReport> {
    let spec = cfg.synthetic_spec();
    spec.validate()?;
    let dir = Stage::Synthetic.dir(cfg);
    let key = key_of(&json!({ "stage": "synthetic", "version": VERSION, "spec": spec }));
    if let Some(r) = reuse(Stage::Synthetic, &dir, &key) {
        return Ok(r);
    }
    let panel = generate_synthetic_market(&spec)?;
    let mut w = StageWriter::begin("synthetic", &dir)?;
    w.put_with("returns.csv", |b| panel.write_wide_csv(b))?;
    let mut labels = csv::Writer::from_writer(Vec::new());
    let record_err = |e: csv::Error| CoreError::Data(e.to_string());
    labels.write_record(["ticker", "block"]).map_err(record_err)?;
    for (t, b) in panel.tickers().iter().zip(spec.block_labels()) {
        labels.write_record([t.clone(), b.to_string()]).map_err(record_err)?;
    }
    w.put("labels.csv", &labels.into_inner().map_err(|e| CoreError::Data(e.to_string()))?)?;
    let manifest = w.finish(
        &key,
        json!({ "spec": spec, "n_assets": panel.n_assets(), "n_blocks": spec.n_blocks, "length": panel.len() }),
    )?;
    Ok(StageReport { stage: Stage::Synthetic, cached: false, manifest })
}

/// Manifest entry of one correlation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub start_date: String,
    pub end_date: String,
    pub matrix: String,
}

impl WindowEntry {
    pub fn window(&self) -> Window {
        Window { index: self.index, start: self.start, end: self.end }
    }
}

/// Loads the configured input into returns, then writes one correlation
/// matrix per window. Nothing is written when the schedule is empty or the
/// window is too short for the asset count.
pub fn run_correlate(cfg: &PipelineConfig) -> Result<StageReport> {
    let (bytes, name, kind) = match &cfg.input {
        Some(path) => {
            let bytes = fs::read(path).map_err(io_err(path))?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            (bytes, name, cfg.input_kind)
        }
        None => {
            let m = Manifest::require(&Stage::Synthetic.dir(cfg), "synthetic")?;
            (m.read_file("returns.csv", "synthetic")?, "synthetic/returns.csv".to_string(), InputKind::Returns)
        }
    };
    let input = json!({ "name": name, "sha256": sha256_hex(&bytes), "kind": kind, "layout": cfg.layout });
    let key = key_of(&json!({
        "stage": "correlate",
        "version": VERSION,
        "input": input,
        "min_coverage": cfg.min_coverage,
        "window": cfg.window,
        "step": cfg.step,
    }));
    let dir = Stage::Correlate.dir(cfg);
    if let Some(r) = reuse(Stage::Correlate, &dir, &key) {
        return Ok(r);
    }

    let panel = match kind {
        InputKind::Returns => ReturnPanel::read_wide_csv(&bytes[..])?,
        InputKind::Prices => {
            log_returns(&align_and_filter(&read_price_panel(&bytes[..], cfg.layout)?, cfg.min_coverage)?)?
        }
    };
    let spec = WindowSpec::new(cfg.window, cfg.step)?;
    window_schedule(panel.len(), spec)?;
    if spec.width < panel.n_assets() {
        return Err(CliError::Config(format!(
            "window {} is shorter than the {} assets left after filtering; correlation matrices would be singular",
            spec.width,
            panel.n_assets()
        )));
    }
    let matrices = rolling_correlations(&panel, spec)?;
    let warnings: Vec<String> = matrices.iter().flat_map(CorrelationMatrix::warnings).collect();
    for msg in &warnings {
        eprintln!("warning: {msg}");
    }

    let mut w = StageWriter::begin("correlate", &dir)?;
    w.put_with("returns.csv", |b| panel.write_wide_csv(b))?;
    let mut entries = Vec::with_capacity(matrices.len());
    for c in &matrices {
        let matrix = window_file("windows", c.window.index, "csv");
        w.put_with(&matrix, |b| c.write_csv(b))?;
        w.put_json(&window_file("windows", c.window.index, "json"), &c.to_json())?;
        entries.push(WindowEntry {
            index: c.window.index,
            start: c.window.start,
            end: c.window.end,
            start_date: c.start_date.clone(),
            end_date: c.end_date.clone(),
            matrix,
        });
    }
    let manifest = w.finish(
        &key,
        json!({
            "input": input,
            "T": panel.len(),
            "N": panel.n_assets(),
            "tickers": panel.tickers(),
            "window": spec.width,
            "step": spec.step,
            "n_windows": entries.len(),
            "windows": entries,
            "warnings": warnings,
        }),
    )?;
    Ok(StageReport { stage: Stage::Correlate, cached: false, manifest })
}

fn load_matrices(corr: &Manifest) -> Result<Vec<CorrelationMatrix>> {
    let tickers: Vec<String> = field(corr, Stage::Correlate, "tickers")?;
    let entries: Vec<WindowEntry> = field(corr, Stage::Correlate, "windows")?;
    entries
        .iter()
        .map(|e| {
            let mut c = CorrelationMatrix::read_csv(&corr.read_file(&e.matrix, "correlate")?[..])?;
            if c.tickers != tickers {
                return Err(corrupt(Stage::Correlate, format!("{} has unexpected tickers", e.matrix)));
            }
            c.window = e.window();
            c.start_date = e.start_date.clone();
            c.end_date = e.end_date.clone();
            Ok(c)
        })
        .collect()
}

/// Manifest entry of one analyzed window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisEntry {
    pub index: usize,
    pub start_date: String,
    pub n_c: usize,
    #[serde(rename = "Q")]
    pub modularity: f64,
    pub codelength: f64,
    pub weight_shift: f64,
    pub graph: String,
    pub partition: String,
}

/// Builds the PMFG of every correlation window and partitions it.
pub fn run_analyze(cfg: &PipelineConfig) -> Result<StageReport> {
    let corr = Manifest::require(&Stage::Correlate.dir(cfg), "correlate")?;
    let key = key_of(&json!({
        "stage": "analyze",
        "version": VERSION,
        "correlate": corr.digest(),
        "trials": cfg.trials,
        "seed": cfg.seed,
        "plot_data": cfg.plot_data,
    }));
    let dir = Stage::Analyze.dir(cfg);
    if let Some(r) = reuse(Stage::Analyze, &dir, &key) {
        return Ok(r);
    }

    let matrices = load_matrices(&corr)?;
    if matrices.is_empty() {
        return Err(corrupt(Stage::Correlate, "manifest lists no windows"));
    }
    let analyses: Vec<WindowAnalysis> = matrices
        .into_par_iter()
        .map(|c| analyze_correlation(c, cfg.trials, cfg.seed))
        .collect::<commfolio_core::Result<_>>()?;
    for a in &analyses {
        let n = a.graph.n_nodes();
        let expected = if n >= 3 { 3 * (n - 2) } else { n.saturating_sub(1) };
        if a.graph.edge_count() != expected || !a.graph.verify_planar() {
            return Err(CoreError::Numerical(format!(
                "window {} produced an invalid filtered graph",
                a.window().index
            ))
            .into());
        }
    }

    let partitions: Vec<Partition> = analyses.iter().map(|a| a.partition.clone()).collect();
    let start_dates: Vec<String> = analyses.iter().map(|a| a.correlation.start_date.clone()).collect();
    let series = community_count_series(&partitions)?;
    let table = cooccurrence(&partitions)?;

    let mut w = StageWriter::begin("analyze", &dir)?;
    let mut entries = Vec::with_capacity(analyses.len());
    for a in &analyses {
        let index = a.window().index;
        let graph = window_file("graphs", index, "csv");
        let partition = window_file("partitions", index, "csv");
        w.put_with(&graph, |b| a.graph.write_edge_csv(b))?;
        w.put_json(&window_file("graphs", index, "json"), &a.graph.to_json())?;
        w.put_with(&partition, |b| a.partition.write_csv(a.graph.tickers(), b))?;
        entries.push(AnalysisEntry {
            index,
            start_date: a.correlation.start_date.clone(),
            n_c: a.partition.n_communities(),
            modularity: a.partition.modularity,
            codelength: a.partition.codelength,
            weight_shift: a.partition.weight_shift,
            graph,
            partition,
        });
    }
    w.put_with("summary.csv", |b| write_series_csv(&partitions, &start_dates, b))?;
    w.put_with("cooccurrence.csv", |b| table.write_histogram_csv(b))?;
    if cfg.plot_data {
        w.put_with("cooccurrence_loglog.csv", |b| table.write_loglog_csv(b))?;
    }
    let manifest = w.finish(
        &key,
        json!({
            "correlate": corr.digest(),
            "trials": cfg.trials,
            "seed": cfg.seed,
            "n_windows": entries.len(),
            "mean_n_c": series.mean,
            "windows": entries,
            "cooccurrence": {
                "windows": table.windows(),
                "never_together": table.never_together(),
                "always_together": table.always_together(),
            },
        }),
    )?;
    Ok(StageReport { stage: Stage::Analyze, cached: false, manifest })
}

fn read_graph(bytes: &[u8], tickers: &[String]) -> Result<PlanarGraph> {
    let index: HashMap<&str, usize> = tickers.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let bad = |msg: String| corrupt(Stage::Analyze, msg);
    let mut edges = Vec::new();
    for record in csv::Reader::from_reader(bytes).records() {
        let r = record.map_err(|e| bad(e.to_string()))?;
        let node = |k: usize| index.get(&r[k]).copied().ok_or_else(|| bad(format!("unknown ticker {:?}", &r[k])));
        let weight = r[2].parse::<f64>().map_err(|_| bad(format!("bad weight {:?}", &r[2])))?;
        edges.push((node(0)?, node(1)?, weight));
    }
    Ok(PlanarGraph::from_edges(tickers.to_vec(), &edges)?)
}

fn read_partition(bytes: &[u8], tickers: &[String]) -> Result<Partition> {
    let bad = |msg: String| corrupt(Stage::Analyze, msg);
    let mut labels = Vec::with_capacity(tickers.len());
    for (record, ticker) in csv::Reader::from_reader(bytes).records().zip(tickers) {
        let r = record.map_err(|e| bad(e.to_string()))?;
        if &r[0] != ticker {
            return Err(bad(format!("partition row {:?} where {ticker:?} was expected", &r[0])));
        }
        labels.push(r[1].parse::<usize>().map_err(|_| bad(format!("bad community {:?}", &r[1])))?);
    }
    if labels.len() != tickers.len() {
        return Err(bad(format!("partition covers {} of {} assets", labels.len(), tickers.len())));
    }
    Ok(Partition::from_labels(&labels))
}

/// Runs the frontier, ES-series and ES-vs-size experiments on the analyzed windows.
pub fn run_portfolio(cfg: &PipelineConfig) -> Result<StageReport> {
    let corr = Manifest::require(&Stage::Correlate.dir(cfg), "correlate")?;
    let ana = Manifest::require(&Stage::Analyze.dir(cfg), "analyze")?;
    if ana.value.get("correlate").and_then(Value::as_str) != Some(corr.digest().as_str()) {
        return Err(corrupt(Stage::Analyze, "built from a different correlate run; rerun `commfolio analyze`"));
    }
    let key = key_of(&json!({
        "stage": "portfolio",
        "version": VERSION,
        "correlate": corr.digest(),
        "analyze": ana.digest(),
        "m": cfg.m,
        "m_grid": cfg.m_grid,
        "tail": cfg.tail,
        "samples": cfg.samples,
        "q_grid": cfg.q_grid,
        "n_bins": cfg.n_bins,
        "seed": cfg.seed,
        "plot_data": cfg.plot_data,
    }));
    let dir = Stage::Portfolio.dir(cfg);
    if let Some(r) = reuse(Stage::Portfolio, &dir, &key) {
        return Ok(r);
    }

    let returns = ReturnPanel::read_wide_csv(&corr.read_file("returns.csv", "correlate")?[..])?;
    let windows: Vec<Window> =
        field::<Vec<WindowEntry>>(&corr, Stage::Correlate, "windows")?.iter().map(WindowEntry::window).collect();
    let analyzed: Vec<AnalysisEntry> = field(&ana, Stage::Analyze, "windows")?;
    if analyzed.iter().map(|a| a.index).ne(windows.iter().map(|w| w.index)) {
        return Err(corrupt(Stage::Analyze, "window list differs from the correlate manifest"));
    }
    let tickers = returns.tickers();
    let graphs = analyzed
        .iter()
        .map(|a| read_graph(&ana.read_file(&a.graph, "analyze")?, tickers))
        .collect::<Result<Vec<_>>>()?;
    let partitions = analyzed
        .iter()
        .map(|a| read_partition(&ana.read_file(&a.partition, "analyze")?, tickers))
        .collect::<Result<Vec<_>>>()?;

    let input = ExperimentInput { returns: &returns, windows: &windows, graphs: &graphs, partitions: &partitions };
    let frontier = frontier_experiment(&input, cfg.m, &cfg.q_grid, cfg.samples, cfg.n_bins, cfg.seed)?;
    let series = es_experiment_series(&input, cfg.m, cfg.tail, cfg.samples, cfg.seed)?;
    let sizes = es_vs_size(&input, &cfg.m_grid, cfg.tail, cfg.samples, cfg.seed)?;

    let mut w = StageWriter::begin("portfolio", &dir)?;
    w.put_with("frontier.csv", |b| frontier.write_rows_csv(b))?;
    w.put_with("frontier_aggregate.csv", |b| frontier.write_aggregate_csv(b))?;
    w.put_with("es_series.csv", |b| write_es_series_csv(&series, b))?;
    w.put_with("es_vs_size.csv", |b| sizes.write_csv(b))?;
    let shared = frontier.shared_bins();
    if cfg.plot_data {
        let mut plot = String::from("risk_bin,inter_mean_return,intra_mean_return\n");
        for (risk, inter, intra) in &shared {
            plot.push_str(&format!("{risk},{inter},{intra}\n"));
        }
        w.put("frontier_plot.csv", plot.as_bytes())?;
    }

    let status = |k: usize, mode: Mode| {
        let row = series.iter().find(|r| r.window == windows[k].index && r.mode == mode);
        row.map(|r| json!({ "status": r.infeasible.map_or("ok", |x| x.code()), "mean_es": r.mean_es }))
    };
    let per_window: Vec<Value> = (0..windows.len())
        .map(|k| {
            json!({
                "index": windows[k].index,
                "start_date": returns.dates()[windows[k].start],
                "inter": status(k, Mode::Inter),
                "intra": status(k, Mode::Intra),
            })
        })
        .collect();
    let es_lower = series
        .chunks(2)
        .filter(|pair| matches!((pair[0].mean_es, pair[1].mean_es), (Some(a), Some(b)) if a < b))
        .count();
    let manifest = w.finish(
        &key,
        json!({
            "correlate": corr.digest(),
            "analyze": ana.digest(),
            "m": cfg.m,
            "m_grid": cfg.m_grid,
            "tail": cfg.tail,
            "samples": cfg.samples,
            "seed": cfg.seed,
            "n_windows": windows.len(),
            "windows": per_window,
            "ceilings": {
                "inter": sizes.ceilings.inter,
                "intra": sizes.ceilings.intra,
                "inter_below_intra": sizes.ceilings.inter_below_intra(),
            },
            "frontier": {
                "shared_bins": shared.len(),
                "inter_at_least_intra": shared.iter().filter(|(_, a, b)| a >= b).count(),
            },
            "es_series": { "windows_inter_below_intra": es_lower },
        }),
    )?;
    Ok(StageReport { stage: Stage::Portfolio, cached: false, manifest })
}

/// Runs every stage in order; the synthetic stage only when no input file is configured.
pub fn run_all(cfg: &PipelineConfig) -> Result<Vec<StageReport>> {
    let mut reports = Vec::new();
    if cfg.input.is_none() {
        reports.push(run_synthetic(cfg)?);
    }
    reports.push(run_correlate(cfg)?);
    reports.push(run_analyze(cfg)?);
    reports.push(run_portfolio(cfg)?);
    Ok(reports)
}
