//! Block-correlated synthetic markets with known community structure.
//!
//! Assets are split into contiguous, near-equal blocks. Two assets in the same
//! block have correlation `intra_corr`, assets in different blocks have
//! `inter_corr`. Daily returns are drawn from the corresponding multivariate
//! normal through a Cholesky factor of the target matrix.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;

/// Volatility change applied from a given time index onwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeShift {
    /// First sample index of the new regime.
    pub at: usize,
    /// Multiplier on the daily volatility.
    pub scale: f64,
}

/// Parameters of a synthetic block market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticMarketSpec {
    pub n_assets: usize,
    pub n_blocks: usize,
    pub intra_corr: f64,
    pub inter_corr: f64,
    /// Number of return samples `T`.
    pub length: usize,
    /// Expected daily return per block; empty means zero everywhere.
    #[serde(default)]
    pub block_means: Vec<f64>,
    /// Daily return standard deviation of every asset.
    #[serde(default = "default_volatility")]
    pub volatility: f64,
    #[serde(default)]
    pub regime_shift: Option<RegimeShift>,
    pub seed: u64,
}

fn default_volatility() -> f64 {
    0.01
}

impl SyntheticMarketSpec {
    /// A spec with zero means, 1% daily volatility and no regime shift.
    pub fn new(n_assets: usize, n_blocks: usize, intra_corr: f64, inter_corr: f64, length: usize, seed: u64) -> Self {
        Self {
            n_assets,
            n_blocks,
            intra_corr,
            inter_corr,
            length,
            block_means: Vec::new(),
            volatility: default_volatility(),
            regime_shift: None,
            seed,
        }
    }

    pub fn with_block_means(mut self, means: Vec<f64>) -> Self {
        self.block_means = means;
        self
    }

    pub fn with_regime_shift(mut self, at: usize, scale: f64) -> Self {
        self.regime_shift = Some(RegimeShift { at, scale });
        self
    }

    /// Checks ranges and positive definiteness of the implied matrix.
    pub fn validate(&self) -> Result<()> {
        if self.n_assets == 0 || self.n_blocks == 0 {
            return Err(Error::Spec("n_assets and n_blocks must be positive".into()));
        }
        if self.n_blocks > self.n_assets {
            return Err(Error::Spec(format!("n_blocks {} exceeds n_assets {}", self.n_blocks, self.n_assets)));
        }
        if !(0.0..1.0).contains(&self.intra_corr) {
            return Err(Error::Spec(format!("intra_corr {} outside [0, 1)", self.intra_corr)));
        }
        // With a single block the inter-block level never enters the matrix.
        if self.n_blocks > 1 && !(self.inter_corr >= 0.0 && self.inter_corr < self.intra_corr) {
            return Err(Error::Spec(format!(
                "inter_corr {} outside [0, intra_corr={})",
                self.inter_corr, self.intra_corr
            )));
        }
        if self.length == 0 {
            return Err(Error::Spec("length must be positive".into()));
        }
        if !self.block_means.is_empty() && self.block_means.len() != self.n_blocks {
            return Err(Error::Spec(format!("{} block means for {} blocks", self.block_means.len(), self.n_blocks)));
        }
        if self.block_means.iter().any(|m| !m.is_finite()) {
            return Err(Error::Spec("block means must be finite".into()));
        }
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(Error::Spec(format!("volatility {} must be positive", self.volatility)));
        }
        if let Some(shift) = self.regime_shift {
            if !(shift.scale.is_finite() && shift.scale > 0.0) {
                return Err(Error::Spec(format!("regime scale {} must be positive", shift.scale)));
            }
        }
        self.cholesky()?;
        Ok(())
    }

    /// Block index of every asset.
    pub fn block_labels(&self) -> Vec<usize> {
        let base = self.n_assets / self.n_blocks;
        let extra = self.n_assets % self.n_blocks;
        (0..self.n_blocks).flat_map(|b| std::iter::repeat_n(b, base + usize::from(b < extra))).collect()
    }

    /// Target correlation matrix.
    pub fn implied_correlation(&self) -> DMatrix<f64> {
        let labels = self.block_labels();
        DMatrix::from_fn(self.n_assets, self.n_assets, |i, j| {
            if i == j {
                1.0
            } else if labels[i] == labels[j] {
                self.intra_corr
            } else {
                self.inter_corr
            }
        })
    }

    pub fn tickers(&self) -> Vec<String> {
        let width = self.n_assets.saturating_sub(1).to_string().len().max(3);
        (0..self.n_assets).map(|i| format!("S{i:0width$}")).collect()
    }

    fn cholesky(&self) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        Cholesky::new(self.implied_correlation())
            .ok_or_else(|| Error::Spec("implied correlation matrix is not positive definite".into()))
    }
}

/// Weekday calendar starting on Monday 2000-01-03.
pub fn business_dates(count: usize) -> Vec<String> {
    use chrono::{Datelike, Days, NaiveDate, Weekday};
    let mut day = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid start date");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day.format("%Y-%m-%d").to_string());
        }
        day = day + Days::new(1);
    }
    out
}

/// Samples a return panel from `spec`; identical specs give identical panels.
pub fn generate_synthetic_market(spec: &SyntheticMarketSpec) -> Result<ReturnPanel> {
    spec.validate()?;
    let factor = spec.cholesky()?.l();
    let labels = spec.block_labels();
    let n = spec.n_assets;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut returns = vec![Vec::with_capacity(spec.length); n];
    let mut z = DVector::<f64>::zeros(n);
    for t in 0..spec.length {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let x = &factor * &z;
        let vol = match spec.regime_shift {
            Some(shift) if t >= shift.at => spec.volatility * shift.scale,
            _ => spec.volatility,
        };
        for (i, series) in returns.iter_mut().enumerate() {
            let mean = spec.block_means.get(labels[i]).copied().unwrap_or(0.0);
            series.push(mean + vol * x[i]);
        }
    }
    ReturnPanel::new(spec.tickers(), business_dates(spec.length), returns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn labels_are_contiguous_and_balanced() {
        let spec = SyntheticMarketSpec::new(10, 3, 0.5, 0.1, 10, 0);
        assert_eq!(spec.block_labels(), vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(SyntheticMarketSpec::new(3, 4, 0.5, 0.1, 10, 0).validate().is_err());
        assert!(SyntheticMarketSpec::new(4, 2, 1.0, 0.1, 10, 0).validate().is_err());
        assert!(SyntheticMarketSpec::new(4, 2, 0.3, 0.3, 10, 0).validate().is_err());
        assert!(SyntheticMarketSpec::new(4, 2, 0.3, 0.1, 10, 0).with_block_means(vec![0.0]).validate().is_err());
        assert!(SyntheticMarketSpec::new(4, 1, 0.0, 0.0, 10, 0).validate().is_ok());
    }

    #[test]
    fn same_seed_same_panel() {
        let spec = SyntheticMarketSpec::new(6, 2, 0.5, 0.1, 200, 11);
        assert_eq!(generate_synthetic_market(&spec).unwrap(), generate_synthetic_market(&spec).unwrap());
        let other = SyntheticMarketSpec { seed: 12, ..spec.clone() };
        assert_ne!(generate_synthetic_market(&spec).unwrap(), generate_synthetic_market(&other).unwrap());
    }

    #[test]
    fn independent_assets_are_uncorrelated() {
        // Fisher z: atanh(r) ~ N(0, 1/(T-3)); 0.05 is > 4.9 standard errors at T=10000.
        let spec = SyntheticMarketSpec::new(6, 1, 0.0, 0.0, 10_000, 3);
        let panel = generate_synthetic_market(&spec).unwrap();
        let r = panel.returns();
        for i in 0..6 {
            for j in i + 1..6 {
                assert!(sample_corr(&r[i], &r[j]).abs() < 0.05);
            }
        }
    }

    #[test]
    fn within_block_correlation_matches_target() {
        let spec = SyntheticMarketSpec::new(8, 2, 0.6, 0.1, 5000, 5);
        let panel = generate_synthetic_market(&spec).unwrap();
        let labels = spec.block_labels();
        let r = panel.returns();
        let (mut sum, mut count) = (0.0, 0);
        for i in 0..8 {
            for j in i + 1..8 {
                if labels[i] == labels[j] {
                    sum += sample_corr(&r[i], &r[j]);
                    count += 1;
                }
            }
        }
        assert!((sum / count as f64 - 0.6).abs() < 0.03);
    }

    #[test]
    fn regime_shift_scales_volatility() {
        let spec = SyntheticMarketSpec::new(4, 2, 0.5, 0.1, 4000, 9).with_regime_shift(2000, 3.0);
        let panel = generate_synthetic_market(&spec).unwrap();
        let sd = |xs: &[f64]| {
            let m = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
        };
        let row = &panel.returns()[0];
        let ratio = sd(&row[2000..]) / sd(&row[..2000]);
        assert!((ratio - 3.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn business_dates_skip_weekends() {
        let d = business_dates(6);
        assert_eq!(d[0], "2000-01-03");
        assert_eq!(d[4], "2000-01-07");
        assert_eq!(d[5], "2000-01-10");
    }
}
