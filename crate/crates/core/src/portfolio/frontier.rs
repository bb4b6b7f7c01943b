//! Efficient frontiers and their aggregation across samples.

use serde::Serialize;

use super::meanvar::{mv_optimize, sample_moments};
use super::select::StockSelection;
use super::window_scenarios;
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::returns::Window;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub q: f64,
    /// Portfolio variance per period.
    pub risk: f64,
    /// Mean portfolio return per period.
    pub expected_return: f64,
    pub weights: Vec<f64>,
    pub ridge: f64,
}

/// One mean-variance point per `q`, sorted by risk.
///
/// Covariance and mean are estimated on `window`, which needs at least
/// `m + 1` periods.
pub fn efficient_frontier(
    returns: &ReturnPanel,
    window: Window,
    sel: &StockSelection,
    q_grid: &[f64],
) -> Result<Vec<FrontierPoint>> {
    let m = sel.len();
    if m == 0 || q_grid.is_empty() {
        return Err(Error::Usage("frontier needs a non-empty selection and q grid".into()));
    }
    if window.len() < m + 1 {
        return Err(Error::Size(format!("window of {} periods cannot estimate {m} assets", window.len())));
    }
    let (cov, mean) = sample_moments(&window_scenarios(returns, window, &sel.nodes)?)?;
    let mut points = q_grid
        .iter()
        .map(|&q| {
            let w = mv_optimize(&cov, &mean, q)?;
            Ok(FrontierPoint {
                q,
                risk: w.risk,
                expected_return: w.expected_return,
                weights: w.weights,
                ridge: w.ridge,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| a.risk.total_cmp(&b.risk).then(a.q.total_cmp(&b.q)));
    Ok(points)
}

/// Mean and population variance of interpolated returns at one risk level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinStat {
    pub risk: f64,
    pub mean_return: f64,
    pub var_return: f64,
    /// Samples whose frontier spans this risk level.
    pub n: usize,
}

/// `count` evenly spaced levels from `lo` to `hi` inclusive.
pub fn linear_bins(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![(lo + hi) / 2.0],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Return of a risk-sorted frontier at `risk`, or `None` outside its range.
fn interpolate(frontier: &[FrontierPoint], risk: f64) -> Option<f64> {
    let first = frontier.first()?;
    let last = frontier.last()?;
    if risk < first.risk || risk > last.risk {
        return None;
    }
    let hi = frontier.partition_point(|p| p.risk < risk);
    let b = &frontier[hi];
    if b.risk == risk || hi == 0 {
        return Some(b.expected_return);
    }
    let a = &frontier[hi - 1];
    let t = (risk - a.risk) / (b.risk - a.risk);
    Some(a.expected_return + t * (b.expected_return - a.expected_return))
}

/// Interpolates every frontier onto `risk_bins` and summarizes each bin over
/// the samples whose risk range covers it. Bins covered by no sample are
/// omitted.
pub fn frontier_aggregate(samples: &[Vec<FrontierPoint>], risk_bins: &[f64]) -> Result<Vec<BinStat>> {
    if samples.len() < 2 {
        return Err(Error::Usage(format!("aggregation needs at least 2 frontiers, got {}", samples.len())));
    }
    let stats: Vec<BinStat> = risk_bins
        .iter()
        .filter_map(|&risk| {
            let values: Vec<f64> = samples.iter().filter_map(|f| interpolate(f, risk)).collect();
            if values.is_empty() {
                return None;
            }
            // Welford keeps the variance of identical values exactly zero.
            let (mut mean, mut m2) = (0.0, 0.0);
            for (i, &v) in values.iter().enumerate() {
                let d = v - mean;
                mean += d / (i + 1) as f64;
                m2 += d * (v - mean);
            }
            Some(BinStat { risk, mean_return: mean, var_return: m2 / values.len() as f64, n: values.len() })
        })
        .collect();
    if stats.is_empty() {
        return Err(Error::Aggregation("no risk bin falls inside any frontier's risk range".into()));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::portfolio::select::Mode;

    fn point(risk: f64, ret: f64) -> FrontierPoint {
        FrontierPoint { q: 0.0, risk, expected_return: ret, weights: vec![1.0], ridge: 0.0 }
    }

    fn selection(nodes: Vec<usize>) -> StockSelection {
        StockSelection {
            mode: Mode::Inter,
            window: None,
            tickers: nodes.iter().map(|n| n.to_string()).collect(),
            communities: nodes.clone(),
            nodes,
            fallbacks: 0,
        }
    }

    fn panel(series: Vec<Vec<f64>>) -> ReturnPanel {
        let len = series[0].len();
        ReturnPanel::new(
            (0..series.len()).map(|i| format!("A{i}")).collect(),
            crate::synthetic::business_dates(len),
            series,
        )
        .unwrap()
    }

    #[test]
    fn single_asset_collapses_to_one_point() {
        let p = panel(vec![vec![0.01, 0.03, -0.01, 0.01]]);
        let w = Window { index: 0, start: 0, end: 4 };
        let f = efficient_frontier(&p, w, &selection(vec![0]), &[0.0, 0.5, 2.0]).unwrap();
        for pt in &f {
            assert!((pt.risk - 0.0008 / 3.0).abs() < 1e-18);
            assert!((pt.expected_return - 0.01).abs() < 1e-18);
        }
    }

    #[test]
    fn hedge_has_zero_risk_at_q0() {
        let a = vec![0.02, -0.01, 0.03, -0.04, 0.0];
        let b: Vec<f64> = a.iter().map(|x| -x).collect();
        let p = panel(vec![a, b]);
        let w = Window { index: 0, start: 0, end: 5 };
        let f = efficient_frontier(&p, w, &selection(vec![0, 1]), &[0.0, 0.01]).unwrap();
        assert_eq!(f[0].q, 0.0);
        assert!(f[0].risk.abs() < 1e-15);
        assert!((f[0].weights[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn short_window_rejected() {
        let p = panel(vec![vec![0.0, 0.1], vec![0.1, 0.0]]);
        let w = Window { index: 0, start: 0, end: 2 };
        assert!(matches!(efficient_frontier(&p, w, &selection(vec![0, 1]), &[0.0]), Err(Error::Size(_))));
    }

    #[test]
    fn identical_frontiers_have_zero_variance() {
        let f = vec![point(1.0, 0.1), point(2.0, 0.3)];
        let agg = frontier_aggregate(&[f.clone(), f.clone(), f], &linear_bins(1.0, 2.0, 5)).unwrap();
        assert_eq!(agg.len(), 5);
        assert!(agg.iter().all(|b| b.var_return == 0.0 && b.n == 3));
        assert!((agg[2].mean_return - 0.2).abs() < 1e-15);
    }

    #[test]
    fn offset_frontiers_population_variance() {
        let delta = 0.25;
        let a = vec![point(1.0, 0.0), point(3.0, 1.0)];
        let b = vec![point(1.0, delta), point(3.0, 1.0 + delta)];
        for bin in frontier_aggregate(&[a, b], &[1.0, 1.5, 3.0]).unwrap() {
            assert_eq!(bin.var_return, delta * delta / 4.0);
        }
    }

    #[test]
    fn bins_outside_a_sample_are_skipped() {
        let a = vec![point(1.0, 0.0), point(2.0, 1.0)];
        let b = vec![point(1.5, 0.0), point(3.0, 1.0)];
        let agg = frontier_aggregate(&[a.clone(), b.clone()], &[1.0, 1.5, 2.5, 4.0]).unwrap();
        assert_eq!(agg.iter().map(|s| s.n).collect::<Vec<_>>(), vec![1, 2, 1]);
        assert!(matches!(frontier_aggregate(&[a.clone(), b], &[10.0]), Err(Error::Aggregation(_))));
        assert!(matches!(frontier_aggregate(&[a], &[1.0]), Err(Error::Usage(_))));
    }
}
