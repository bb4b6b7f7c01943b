//! Flat key-value pipeline configuration.
//!
//! Values come from built-in defaults, then the TOML file, then command-line
//! flags; each later source overrides the earlier one key by key.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use commfolio_core::ingest::Layout;
use commfolio_core::synthetic::SyntheticMarketSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// What the input file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// Adjusted close prices in the wide or long layout.
    Prices,
    /// Wide-layout returns with no missing cells.
    Returns,
}

impl FromStr for InputKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prices" => Ok(InputKind::Prices),
            "returns" => Ok(InputKind::Returns),
            other => Err(CliError::Config(format!("unknown input_kind `{other}` (expected prices or returns)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Market data file; without it the correlate stage reads the synthetic panel.
    pub input: Option<PathBuf>,
    pub input_kind: InputKind,
    pub layout: Layout,
    pub min_coverage: f64,

    pub window: usize,
    pub step: usize,

    pub trials: usize,
    pub seed: u64,

    pub m: usize,
    pub m_grid: Vec<usize>,
    /// Probability mass of the loss tail averaged by expected shortfall.
    pub tail: f64,
    pub samples: usize,
    pub q_grid: Vec<f64>,
    pub n_bins: usize,

    pub out: PathBuf,
    pub plot_data: bool,

    pub n_assets: usize,
    pub n_blocks: usize,
    pub intra_corr: f64,
    pub inter_corr: f64,
    pub length: usize,
    pub block_means: Vec<f64>,
    pub volatility: f64,
    pub regime_at: Option<usize>,
    pub regime_scale: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            input_kind: InputKind::Prices,
            layout: Layout::Wide,
            min_coverage: 0.9,
            window: 300,
            step: 25,
            trials: 20,
            seed: 0,
            m: 4,
            m_grid: vec![2, 3, 4, 5, 6, 8],
            tail: 0.05,
            samples: 100,
            q_grid: (0..=20).map(|i| i as f64 * 0.005).collect(),
            n_bins: 30,
            out: PathBuf::from("out"),
            plot_data: false,
            n_assets: 32,
            n_blocks: 4,
            intra_corr: 0.6,
            inter_corr: 0.1,
            length: 2000,
            block_means: Vec::new(),
            volatility: 0.01,
            regime_at: None,
            regime_scale: None,
        }
    }
}

/// Command-line values that replace config keys when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub input_kind: Option<InputKind>,
    pub layout: Option<Layout>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub window: Option<usize>,
    pub step: Option<usize>,
    pub tail: Option<f64>,
    pub m: Option<usize>,
    pub m_grid: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    pub plot_data: bool,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Defaults, overlaid by the file at `path` if any, then by `flags`; validated.
    pub fn resolve(path: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, f: &Overrides) {
        if let Some(v) = &f.input {
            self.input = Some(v.clone());
        }
        if let Some(v) = f.input_kind {
            self.input_kind = v;
        }
        if let Some(v) = f.layout {
            self.layout = v;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = &f.out {
            self.out = v.clone();
        }
        if let Some(v) = f.window {
            self.window = v;
        }
        if let Some(v) = f.step {
            self.step = v;
        }
        if let Some(v) = f.tail {
            self.tail = v;
        }
        if let Some(v) = f.m {
            self.m = v;
        }
        if let Some(v) = &f.m_grid {
            self.m_grid = v.clone();
        }
        if let Some(v) = f.samples {
            self.samples = v;
        }
        if let Some(v) = f.trials {
            self.trials = v;
        }
        self.plot_data |= f.plot_data;
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if let Some(p) = &self.input {
            if !p.is_file() {
                return fail(format!("input file {} does not exist", p.display()));
            }
        }
        if !(self.min_coverage > 0.0 && self.min_coverage <= 1.0) {
            return fail(format!("min_coverage {} must lie in (0, 1]", self.min_coverage));
        }
        if self.window < 2 || self.step == 0 {
            return fail(format!("window {} must be at least 2 and step {} at least 1", self.window, self.step));
        }
        if self.trials == 0 || self.samples == 0 {
            return fail("trials and samples must be positive".into());
        }
        if self.m == 0 {
            return fail("portfolio size m must be positive".into());
        }
        if self.m_grid.is_empty() || self.m_grid[0] == 0 || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("m_grid {:?} must be positive and strictly ascending", self.m_grid));
        }
        if !(self.tail > 0.0 && self.tail <= 1.0) {
            return fail(format!("tail {} must lie in (0, 1]", self.tail));
        }
        if self.q_grid.is_empty() || self.q_grid.iter().any(|q| !q.is_finite()) {
            return fail("q_grid must hold at least one finite value".into());
        }
        if self.n_bins == 0 {
            return fail("n_bins must be positive".into());
        }
        if self.regime_at.is_some() != self.regime_scale.is_some() {
            return fail("regime_at and regime_scale must be given together".into());
        }
        Ok(())
    }

    /// Synthetic market described by the generator keys, seeded by `seed`.
    pub fn synthetic_spec(&self) -> SyntheticMarketSpec {
        let mut spec = SyntheticMarketSpec::new(
            self.n_assets,
            self.n_blocks,
            self.intra_corr,
            self.inter_corr,
            self.length,
            self.seed,
        )
        .with_block_means(self.block_means.clone());
        spec.volatility = self.volatility;
        if let (Some(at), Some(scale)) = (self.regime_at, self.regime_scale) {
            spec = spec.with_regime_shift(at, scale);
        }
        spec
    }
}
