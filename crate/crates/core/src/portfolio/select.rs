//! Random inter- and intra-community stock selection.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::pmfg::PlanarGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One stock from each of `m` distinct communities.
    Inter,
    /// `m` stocks from one community.
    Intra,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Inter, Mode::Intra];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Inter => "inter",
            Mode::Intra => "intra",
        }
    }

    /// Stable numeric id used when deriving per-task seeds.
    pub fn id(self) -> u64 {
        match self {
            Mode::Inter => 0,
            Mode::Intra => 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inter" => Ok(Mode::Inter),
            "intra" => Ok(Mode::Intra),
            other => Err(Error::Usage(format!("unknown mode {other:?}; expected inter or intra"))),
        }
    }
}

/// Selected stocks with the community each one came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StockSelection {
    pub mode: Mode,
    pub window: Option<usize>,
    /// Node indices, ascending.
    pub nodes: Vec<usize>,
    pub tickers: Vec<String>,
    pub communities: Vec<usize>,
    /// Communities whose stock came from the fallback rule because none was eligible.
    pub fallbacks: usize,
}

impl StockSelection {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn build(
        mode: Mode,
        window: Option<usize>,
        mut picks: Vec<(usize, usize)>,
        tickers: &[String],
        fallbacks: usize,
    ) -> Self {
        picks.sort_unstable();
        Self {
            mode,
            window,
            tickers: picks.iter().map(|&(v, _)| tickers[v].clone()).collect(),
            nodes: picks.iter().map(|&(v, _)| v).collect(),
            communities: picks.iter().map(|&(_, c)| c).collect(),
            fallbacks,
        }
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Usage("portfolio size must be at least 1".into()));
    }
    Ok(())
}

/// Chooses `m` distinct communities uniformly, then one stock from each.
///
/// A stock is eligible when every PMFG neighbor lies in its own community.
/// A community without eligible stocks contributes the stock with the fewest
/// inter-community edges, ties broken by more intra-community edges and then
/// by ticker.
pub fn select_inter_community(g: &PlanarGraph, p: &Partition, m: usize, seed: u64) -> Result<StockSelection> {
    check_m(m)?;
    p.check_cover(g)?;
    let n_c = p.n_communities();
    if m > n_c {
        return Err(Error::Size(format!("inter portfolio of size {m} needs {m} communities but there are {n_c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = p.communities();
    let mut chosen = sample(&mut rng, n_c, m).into_vec();
    chosen.sort_unstable();

    let mut fallbacks = 0;
    let mut picks = Vec::with_capacity(m);
    for c in chosen {
        // (inter-community edges, intra-community edges) of every member.
        let edges: Vec<(usize, usize)> = members[c]
            .iter()
            .map(|&v| {
                let outside = g.neighbors(v).iter().filter(|&&w| p.community_of(w) != c).count();
                (outside, g.degree(v) - outside)
            })
            .collect();
        let eligible: Vec<usize> = members[c].iter().zip(&edges).filter(|(_, e)| e.0 == 0).map(|(&v, _)| v).collect();
        let v = if eligible.is_empty() {
            fallbacks += 1;
            members[c]
                .iter()
                .zip(&edges)
                .min_by(|(a, ea), (b, eb)| {
                    ea.0.cmp(&eb.0).then(eb.1.cmp(&ea.1)).then_with(|| g.tickers()[**a].cmp(&g.tickers()[**b]))
                })
                .map(|(&v, _)| v)
                .expect("communities are non-empty")
        } else {
            eligible[rng.random_range(0..eligible.len())]
        };
        picks.push((v, c));
    }
    Ok(StockSelection::build(Mode::Inter, p.window, picks, g.tickers(), fallbacks))
}

/// Chooses uniformly among communities with at least `m` members, then `m`
/// distinct members uniformly. No eligibility filter applies.
pub fn select_intra_community(p: &Partition, tickers: &[String], m: usize, seed: u64) -> Result<StockSelection> {
    check_m(m)?;
    if tickers.len() != p.n_nodes() {
        return Err(Error::Usage(format!("{} tickers for {} nodes", tickers.len(), p.n_nodes())));
    }
    let members = p.communities();
    let large: Vec<usize> = (0..members.len()).filter(|&c| members[c].len() >= m).collect();
    if large.is_empty() {
        let largest = members.iter().map(Vec::len).max().unwrap_or(0);
        return Err(Error::Size(format!("intra portfolio of size {m} exceeds the largest community ({largest})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = large[rng.random_range(0..large.len())];
    let picks = sample(&mut rng, members[c].len(), m).into_iter().map(|i| (members[c][i], c)).collect();
    Ok(StockSelection::build(Mode::Intra, p.window, picks, tickers, 0))
}
