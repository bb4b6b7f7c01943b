//! Statistics over a sequence of per-window partitions.

use std::io::Write;

use serde::Serialize;

use super::Partition;
use crate::error::{Error, Result};

/// Community count of every window and their arithmetic mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityCountSeries {
    /// Window index of each entry, or its position when the partition has none.
    pub windows: Vec<usize>,
    pub counts: Vec<usize>,
    pub mean: f64,
}

pub fn community_count_series(partitions: &[Partition]) -> Result<CommunityCountSeries> {
    if partitions.is_empty() {
        return Err(Error::Usage("community count series needs at least one partition".into()));
    }
    let windows = partitions.iter().enumerate().map(|(i, p)| p.window.unwrap_or(i)).collect();
    let counts: Vec<usize> = partitions.iter().map(Partition::n_communities).collect();
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    Ok(CommunityCountSeries { windows, counts, mean })
}

/// CSV `window_start_date,n_c,Q,codelength`, one row per partition.
pub fn write_series_csv<W: Write>(partitions: &[Partition], start_dates: &[String], out: W) -> Result<()> {
    if partitions.len() != start_dates.len() {
        return Err(Error::Usage(format!("{} partitions but {} window dates", partitions.len(), start_dates.len())));
    }
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(["window_start_date", "n_c", "Q", "codelength"]).map_err(err)?;
    for (p, d) in partitions.iter().zip(start_dates) {
        w.write_record([d.clone(), p.n_communities().to_string(), p.modularity.to_string(), p.codelength.to_string()])
            .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Number of windows in which each unordered node pair shares a community.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceTable {
    n: usize,
    windows: usize,
    /// Upper triangle, row-major: pair `(i, j)` with `i < j`.
    counts: Vec<usize>,
}

impl CooccurrenceTable {
    pub fn n_nodes(&self) -> usize {
        self.n
    }

    /// Number of windows K; every count lies in `0..=K`.
    pub fn windows(&self) -> usize {
        self.windows
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Count for the pair; symmetric in its arguments. Panics when `i == j`.
    pub fn count(&self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.n && j < self.n, "invalid pair ({i}, {j})");
        self.counts[self.index(i, j)]
    }

    /// Pairs `(i, j, count)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.count(i, j))))
    }

    /// Number of pairs having each count value `0..=K`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.windows + 1];
        for &c in &self.counts {
            h[c] += 1;
        }
        h
    }

    /// Pairs that never share a community.
    pub fn never_together(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    /// Pairs that share a community in every window.
    pub fn always_together(&self) -> usize {
        self.counts.iter().filter(|&&c| c == self.windows).count()
    }

    /// CSV `count,frequency` with one row per count value `0..=K`.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["count", "frequency"]).map_err(err)?;
        for (t, f) in self.histogram().iter().enumerate() {
            w.write_record([t.to_string(), f.to_string()]).map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `count,frequency` restricted to non-zero counts and frequencies,
    /// with both columns ready for logarithmic axes.
    pub fn write_loglog_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Data(e.to_string());
        w.write_record(["count", "frequency", "log10_count", "log10_frequency"]).map_err(err)?;
        for (t, &f) in self.histogram().iter().enumerate().skip(1) {
            if f == 0 {
                continue;
            }
            let (tf, ff) = (t as f64, f as f64);
            w.write_record([t.to_string(), f.to_string(), tf.log10().to_string(), ff.log10().to_string()])
                .map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn cooccurrence(partitions: &[Partition]) -> Result<CooccurrenceTable> {
    let n = partitions.first().map_or(0, Partition::n_nodes);
    if let Some(p) = partitions.iter().find(|p| p.n_nodes() != n) {
        return Err(Error::Usage(format!("partitions cover different node sets ({} and {} nodes)", n, p.n_nodes())));
    }
    let mut table = CooccurrenceTable { n, windows: partitions.len(), counts: vec![0; n * n.saturating_sub(1) / 2] };
    for p in partitions {
        let a = p.assignment();
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if a[i] == a[j] {
                    table.counts[k] += 1;
                }
                k += 1;
            }
        }
    }
    Ok(table)
}

fn entropy(counts: &[f64], n: f64) -> f64 {
    counts.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).ln()).sum()
}

/// Normalized mutual information with arithmetic-mean normalization,
/// `2 I(A;B) / (H(A) + H(B))`. Two single-cluster labelings score 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Usage(format!("cannot compare labelings of length {} and {}", a.len(), b.len())));
    }
    let pa = Partition::from_labels(a);
    let pb = Partition::from_labels(b);
    let (ka, kb) = (pa.n_communities(), pb.n_communities());
    let n = a.len() as f64;
    let mut joint = vec![0.0; ka * kb];
    for (&x, &y) in pa.assignment().iter().zip(pb.assignment()) {
        joint[x * kb + y] += 1.0;
    }
    let row: Vec<f64> = pa.sizes().iter().map(|&s| s as f64).collect();
    let col: Vec<f64> = pb.sizes().iter().map(|&s| s as f64).collect();
    let (ha, hb) = (entropy(&row, n), entropy(&col, n));
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0.0 {
                mi += (c / n) * (c * n / (row[x] * col[y])).ln();
            }
        }
    }
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}
