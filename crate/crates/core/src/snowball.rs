//! One-wave snowball sampling: draw an initial sample, trace every link out
//! of it once, and reduce the result to label-free observed data.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, PopulationGraph};
use crate::math::pairs_within;
use crate::rng::rng_from_seed;
use crate::sbm::SymMatrix;

/// How the initial sample is selected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitialDesign {
    /// Each node included independently with probability `q`.
    Bernoulli { q: f64 },
    /// Simple random sample of exactly `n0` nodes.
    FixedSize { n0: usize },
    /// `n0` nodes drawn without replacement with weight `degree + 1`.
    /// The estimator does not model this design.
    DegreeBiased { n0: usize },
}

impl InitialDesign {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialDesign::Bernoulli { q } if !(0.0..=1.0).contains(&q) => Err(
                Error::InvalidDesign(format!("inclusion probability {q} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    /// True for designs the estimator's likelihood does not describe.
    pub fn is_misspecified(&self) -> bool {
        matches!(self, InitialDesign::DegreeBiased { .. })
    }
}

impl fmt::Display for InitialDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialDesign::Bernoulli { q } => write!(f, "bernoulli:{q}"),
            InitialDesign::FixedSize { n0 } => write!(f, "fixed:{n0}"),
            InitialDesign::DegreeBiased { n0 } => write!(f, "degree:{n0}"),
        }
    }
}

/// Parses `bernoulli:<q>`, `fixed:<n0>` or `degree:<n0>`.
impl FromStr for InitialDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDesign(format!("cannot parse design '{s}'"));
        let (mode, value) = s.split_once(':').ok_or_else(bad)?;
        let design = match mode.trim() {
            "bernoulli" => InitialDesign::Bernoulli {
                q: value.trim().parse().map_err(|_| bad())?,
            },
            "fixed" => InitialDesign::FixedSize {
                n0: value.trim().parse().map_err(|_| bad())?,
            },
            "degree" => InitialDesign::DegreeBiased {
                n0: value.trim().parse().map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        design.validate()?;
        Ok(design)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub initial: InitialDesign,
    pub seed: u64,
}

/// Draws the initial sample. Returned ids are sorted.
pub fn draw_initial(graph: &PopulationGraph, cfg: &DesignConfig) -> Result<Vec<NodeId>> {
    cfg.initial.validate()?;
    let n = graph.node_count();
    let mut rng = rng_from_seed(cfg.seed);
    let mut s0: Vec<NodeId> = match cfg.initial {
        InitialDesign::Bernoulli { q } => (0..n as NodeId)
            .filter(|_| rng.random::<f64>() < q)
            .collect(),
        InitialDesign::FixedSize { n0 } => {
            check_size(n0, n)?;
            index::sample(&mut rng, n, n0)
                .into_iter()
                .map(|i| i as NodeId)
                .collect()
        }
        InitialDesign::DegreeBiased { n0 } => {
            check_size(n0, n)?;
            index::sample_weighted(&mut rng, n, |i| (graph.degree(i as NodeId) + 1) as f64, n0)
                .map_err(|e| Error::InvalidDesign(e.to_string()))?
                .into_iter()
                .map(|i| i as NodeId)
                .collect()
        }
    };
    s0.sort_unstable();
    Ok(s0)
}

fn check_size(n0: usize, n: usize) -> Result<()> {
    if n0 > n {
        return Err(Error::InvalidDesign(format!(
            "initial sample size {n0} exceeds population size {n}"
        )));
    }
    Ok(())
}

/// Observed data of a one-wave snowball sample, in original node ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowballSample {
    pub strata_count: usize,
    /// Initial sample, sorted.
    pub s0: Vec<NodeId>,
    /// First wave: nodes outside `s0` with a link into it, sorted.
    pub s1: Vec<NodeId>,
    /// 0-based strata of `s0` then `s1`, aligned with those vectors.
    pub strata_s0: Vec<u16>,
    pub strata_s1: Vec<u16>,
    /// Every link with an endpoint in `s0`, as `(u, v)` with `u < v`.
    pub links: Vec<(NodeId, NodeId)>,
    /// True population size, for scoring simulations only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_hint: Option<u64>,
}

impl SnowballSample {
    pub fn final_size(&self) -> usize {
        self.s0.len() + self.s1.len()
    }
}

/// Traces all links out of `s0` and records strata and links of the
/// resulting one-wave sample.
pub fn trace_one_wave(graph: &PopulationGraph, s0: &[NodeId]) -> Result<SnowballSample> {
    let n = graph.node_count();
    let mut in_s0 = vec![false; n];
    for &u in s0 {
        let slot = in_s0
            .get_mut(u as usize)
            .ok_or_else(|| Error::InvalidSample(format!("initial node {u} outside 0..{n}")))?;
        if *slot {
            return Err(Error::InvalidSample(format!(
                "initial node {u} listed twice"
            )));
        }
        *slot = true;
    }
    let mut s0 = s0.to_vec();
    s0.sort_unstable();

    let mut in_s1 = vec![false; n];
    let mut links = Vec::new();
    for &u in &s0 {
        for &v in graph.neighbors(u) {
            if in_s0[v as usize] {
                if u < v {
                    links.push((u, v));
                }
            } else {
                in_s1[v as usize] = true;
                links.push((u, v));
            }
        }
    }
    let mut links: Vec<(NodeId, NodeId)> = links
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    links.sort_unstable();
    let s1: Vec<NodeId> = (0..n as NodeId).filter(|&v| in_s1[v as usize]).collect();

    let strata_of = |nodes: &[NodeId]| nodes.iter().map(|&u| graph.strata()[u as usize]).collect();
    Ok(SnowballSample {
        strata_count: graph.strata_count(),
        strata_s0: strata_of(&s0),
        strata_s1: strata_of(&s1),
        s0,
        s1,
        links,
        population_hint: None,
    })
}

/// Label-free observed data: `S0` becomes canonical indices `0..n0` and
/// `S1` becomes `n0..n0+n1`, each in original-id order; original ids are
/// gone.
///
/// In the JSON form indices and strata are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IgnoredDataFile", into = "IgnoredDataFile")]
pub struct IgnoredData {
    strata_count: usize,
    strata_s0: Vec<u16>,
    strata_s1: Vec<u16>,
    /// Canonical `(i, j)` with `i < j` and `i < n0`.
    links: Vec<(u32, u32)>,
}

impl IgnoredData {
    /// Validates and builds from 0-based strata and canonical 0-based links.
    pub fn new(
        strata_count: usize,
        strata_s0: Vec<u16>,
        strata_s1: Vec<u16>,
        links: Vec<(u32, u32)>,
    ) -> Result<Self> {
        let data = Self {
            strata_count,
            strata_s0,
            strata_s1,
            links,
        };
        data.validate()?;
        Ok(data)
    }

    fn validate(&self) -> Result<()> {
        if self.strata_count == 0 {
            return Err(Error::InvalidSample("G must be at least 1".into()));
        }
        let n0 = self.n0();
        let n = self.n0() + self.n1();
        if let Some(c) = self
            .strata_s0
            .iter()
            .chain(&self.strata_s1)
            .find(|c| usize::from(**c) >= self.strata_count)
        {
            return Err(Error::InvalidSample(format!(
                "stratum {} outside 1..={}",
                c + 1,
                self.strata_count
            )));
        }
        let mut linked = vec![false; n];
        let mut seen = std::collections::HashSet::with_capacity(self.links.len());
        for &(i, j) in &self.links {
            let (i, j) = (i as usize, j as usize);
            if i >= j || i >= n0 || j >= n {
                return Err(Error::InvalidSample(format!(
                    "link [{}, {}] is not a canonical pair touching the initial sample",
                    i + 1,
                    j + 1
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidSample(format!(
                    "duplicate link [{}, {}]",
                    i + 1,
                    j + 1
                )));
            }
            linked[j] = true;
        }
        if let Some(j) = (n0..n).find(|&j| !linked[j]) {
            return Err(Error::InvalidSample(format!(
                "first-wave unit {} has no link to the initial sample",
                j + 1
            )));
        }
        Ok(())
    }

    pub fn strata_count(&self) -> usize {
        self.strata_count
    }

    pub fn n0(&self) -> usize {
        self.strata_s0.len()
    }

    pub fn n1(&self) -> usize {
        self.strata_s1.len()
    }

    pub fn sample_size(&self) -> usize {
        self.n0() + self.n1()
    }

    pub fn strata_s0(&self) -> &[u16] {
        &self.strata_s0
    }

    pub fn strata_s1(&self) -> &[u16] {
        &self.strata_s1
    }

    pub fn links(&self) -> &[(u32, u32)] {
        &self.links
    }

    /// 0-based stratum of canonical unit `i`.
    pub fn stratum(&self, i: usize) -> usize {
        let n0 = self.n0();
        usize::from(if i < n0 {
            self.strata_s0[i]
        } else {
            self.strata_s1[i - n0]
        })
    }

    /// Same data declared over more strata (strata absent from the sample).
    pub fn with_strata_count(mut self, strata_count: usize) -> Result<Self> {
        self.strata_count = strata_count;
        self.validate()?;
        Ok(self)
    }

    /// Per-stratum counts and link statistics of the observed pairs.
    pub fn observed_counts(&self) -> ObservedCounts {
        let g = self.strata_count;
        let tally = |strata: &[u16]| {
            let mut c = vec![0u64; g];
            for &s in strata {
                c[usize::from(s)] += 1;
            }
            c
        };
        let s0_counts = tally(&self.strata_s0);
        let s1_counts = tally(&self.strata_s1);
        let mut link_counts = SymMatrix::filled(g, 0u64);
        for &(i, j) in &self.links {
            link_counts.add(self.stratum(i as usize), self.stratum(j as usize), 1);
        }
        let pair_totals = SymMatrix::from_fn(g, |k, l| {
            if k == l {
                pairs_within(s0_counts[k]) + s0_counts[k] * s1_counts[k]
            } else {
                s0_counts[k] * s0_counts[l]
                    + s0_counts[k] * s1_counts[l]
                    + s0_counts[l] * s1_counts[k]
            }
        });
        ObservedCounts {
            s0_counts,
            s1_counts,
            link_counts,
            pair_totals,
        }
    }
}

/// Sufficient statistics of the observed part of the graph: all pairs with
/// at least one endpoint in `S0` and the other in `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedCounts {
    pub s0_counts: Vec<u64>,
    pub s1_counts: Vec<u64>,
    pub link_counts: SymMatrix<u64>,
    pub pair_totals: SymMatrix<u64>,
}

pub fn to_ignored_data(sample: &SnowballSample) -> Result<IgnoredData> {
    let n0 = sample.s0.len();
    let canonical = |u: NodeId| -> Option<u32> {
        sample
            .s0
            .binary_search(&u)
            .map(|i| i as u32)
            .or_else(|_| sample.s1.binary_search(&u).map(|i| (n0 + i) as u32))
            .ok()
    };
    let mut links = Vec::with_capacity(sample.links.len());
    for &(u, v) in &sample.links {
        let (a, b) = match (canonical(u), canonical(v)) {
            (Some(a), Some(b)) => (a.min(b), a.max(b)),
            _ => {
                return Err(Error::InvalidSample(format!(
                    "link {u}-{v} leaves the sample"
                )))
            }
        };
        links.push((a, b));
    }
    links.sort_unstable();
    IgnoredData::new(
        sample.strata_count,
        sample.strata_s0.clone(),
        sample.strata_s1.clone(),
        links,
    )
}

/// Sample JSON: `n0`, `n1`, `strata_s0`, `strata_s1`, `links`, plus an
/// optional `G` (defaults to the largest stratum present).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct IgnoredDataFile {
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    g: Option<usize>,
    n0: usize,
    n1: usize,
    strata_s0: Vec<u16>,
    strata_s1: Vec<u16>,
    links: Vec<[u32; 2]>,
}

impl TryFrom<IgnoredDataFile> for IgnoredData {
    type Error = Error;

    fn try_from(file: IgnoredDataFile) -> Result<Self> {
        if file.strata_s0.len() != file.n0 || file.strata_s1.len() != file.n1 {
            return Err(Error::InvalidSample(format!(
                "n0 = {}, n1 = {} but strata vectors have lengths {} and {}",
                file.n0,
                file.n1,
                file.strata_s0.len(),
                file.strata_s1.len()
            )));
        }
        let from_one_based = |v: Vec<u16>| -> Result<Vec<u16>> {
            v.into_iter()
                .map(|c| {
                    c.checked_sub(1)
                        .ok_or_else(|| Error::InvalidSample("strata are numbered from 1".into()))
                })
                .collect()
        };
        let strata_s0 = from_one_based(file.strata_s0)?;
        let strata_s1 = from_one_based(file.strata_s1)?;
        let observed_max = strata_s0
            .iter()
            .chain(&strata_s1)
            .map(|&c| usize::from(c) + 1)
            .max()
            .unwrap_or(1);
        let links = file
            .links
            .into_iter()
            .map(|[i, j]| match (i.checked_sub(1), j.checked_sub(1)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(Error::InvalidSample(
                    "link indices are numbered from 1".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        IgnoredData::new(file.g.unwrap_or(observed_max), strata_s0, strata_s1, links)
    }
}

impl From<IgnoredData> for IgnoredDataFile {
    fn from(d: IgnoredData) -> Self {
        IgnoredDataFile {
            g: Some(d.strata_count),
            n0: d.n0(),
            n1: d.n1(),
            strata_s0: d.strata_s0.iter().map(|c| c + 1).collect(),
            strata_s1: d.strata_s1.iter().map(|c| c + 1).collect(),
            links: d.links.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_population;
    use crate::sbm::SbmParams;
    use proptest::prelude::*;

    fn star(leaves: u32) -> PopulationGraph {
        PopulationGraph::from_edges(
            1,
            vec![0; leaves as usize + 1],
            (1..=leaves).map(|v| (0, v)),
        )
        .unwrap()
    }

    fn random_graph(seed: u64) -> PopulationGraph {
        let p = SbmParams::from_upper(vec![0.4, 0.6], vec![0.15, 0.05, 0.1]).unwrap();
        generate_population(&p, 40, seed).unwrap()
    }

    fn design(initial: InitialDesign, seed: u64) -> DesignConfig {
        DesignConfig { initial, seed }
    }

    #[test]
    fn bernoulli_extremes() {
        let g = random_graph(1);
        let none = draw_initial(&g, &design(InitialDesign::Bernoulli { q: 0.0 }, 3)).unwrap();
        assert!(none.is_empty());
        let all = draw_initial(&g, &design(InitialDesign::Bernoulli { q: 1.0 }, 3)).unwrap();
        assert_eq!(all.len(), 40);
    }

    #[test]
    fn fixed_size_draws_exact_count_and_rejects_oversize() {
        let g = random_graph(2);
        let s0 = draw_initial(&g, &design(InitialDesign::FixedSize { n0: 12 }, 8)).unwrap();
        assert_eq!(s0.len(), 12);
        assert!(s0.windows(2).all(|w| w[0] < w[1]));
        assert!(draw_initial(&g, &design(InitialDesign::FixedSize { n0: 41 }, 8)).is_err());
        assert!(draw_initial(&g, &design(InitialDesign::DegreeBiased { n0: 41 }, 8)).is_err());
    }

    #[test]
    fn degree_biased_prefers_hubs() {
        let g = star(30);
        let hits = (0..2000)
            .filter(|&s| {
                draw_initial(&g, &design(InitialDesign::DegreeBiased { n0: 1 }, s))
                    .unwrap()
                    .contains(&0)
            })
            .count();
        // centre weight 31 of a total 31 + 30 * 2 = 91
        let expected = 2000.0 * 31.0 / 91.0;
        let sd = (2000.0f64 * (31.0 / 91.0) * (60.0 / 91.0)).sqrt();
        assert!((hits as f64 - expected).abs() < 4.0 * sd, "{hits}");
    }

    #[test]
    fn design_strings_parse() {
        assert_eq!(
            "bernoulli:0.15".parse::<InitialDesign>().unwrap(),
            InitialDesign::Bernoulli { q: 0.15 }
        );
        assert_eq!(
            "fixed:89".parse::<InitialDesign>().unwrap(),
            InitialDesign::FixedSize { n0: 89 }
        );
        assert_eq!(
            "degree:5".parse::<InitialDesign>().unwrap(),
            InitialDesign::DegreeBiased { n0: 5 }
        );
        assert!("bernoulli:1.5".parse::<InitialDesign>().is_err());
        assert!("srs:4".parse::<InitialDesign>().is_err());
        assert!("fixed".parse::<InitialDesign>().is_err());
    }

    #[test]
    fn whole_population_has_no_wave() {
        let g = random_graph(4);
        let all: Vec<NodeId> = (0..40).collect();
        let s = trace_one_wave(&g, &all).unwrap();
        assert!(s.s1.is_empty());
        assert_eq!(s.links.len(), g.edge_count());
    }

    #[test]
    fn star_centre_reaches_all_leaves() {
        let g = star(7);
        let s = trace_one_wave(&g, &[0]).unwrap();
        assert_eq!(s.s1, (1..=7).collect::<Vec<_>>());
        assert_eq!(s.links.len(), 7);
    }

    #[test]
    fn hand_built_reduction() {
        // nodes 10 and 20 initial, linked; node 5 linked to both; node 30 unseen
        let g = PopulationGraph::from_edges(
            2,
            vec![0; 31]
                .into_iter()
                .enumerate()
                .map(|(i, _)| u16::from(i == 5))
                .collect(),
            [(10, 20), (5, 10), (5, 20), (30, 29)],
        )
        .unwrap();
        let s = trace_one_wave(&g, &[20, 10]).unwrap();
        assert_eq!(s.s0, vec![10, 20]);
        assert_eq!(s.s1, vec![5]);
        let d = to_ignored_data(&s).unwrap();
        assert_eq!((d.n0(), d.n1()), (2, 1));
        assert_eq!(d.links(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(d.strata_s1(), &[1]);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            r#"{"G":2,"n0":2,"n1":1,"strata_s0":[1,1],"strata_s1":[2],"links":[[1,2],[1,3],[2,3]]}"#
        );
    }

    #[test]
    fn empty_sample_reduces_to_empty_data() {
        let g = random_graph(5);
        let s = trace_one_wave(&g, &[]).unwrap();
        let d = to_ignored_data(&s).unwrap();
        assert_eq!((d.n0(), d.n1()), (0, 0));
        assert!(d.links().is_empty());
    }

    #[test]
    fn json_validation() {
        let ok = r#"{"n0":2,"n1":1,"strata_s0":[1,2],"strata_s1":[2],"links":[[1,3]]}"#;
        let d: IgnoredData = serde_json::from_str(ok).unwrap();
        assert_eq!(d.strata_count(), 2);
        let orphan = r#"{"n0":2,"n1":1,"strata_s0":[1,2],"strata_s1":[2],"links":[[1,2]]}"#;
        assert!(serde_json::from_str::<IgnoredData>(orphan).is_err());
        let wave_pair =
            r#"{"n0":1,"n1":2,"strata_s0":[1],"strata_s1":[1,1],"links":[[1,2],[1,3],[2,3]]}"#;
        assert!(serde_json::from_str::<IgnoredData>(wave_pair).is_err());
        let wrong_len = r#"{"n0":3,"n1":0,"strata_s0":[1],"strata_s1":[],"links":[]}"#;
        assert!(serde_json::from_str::<IgnoredData>(wrong_len).is_err());
        let zero_stratum = r#"{"n0":1,"n1":0,"strata_s0":[0],"strata_s1":[],"links":[]}"#;
        assert!(serde_json::from_str::<IgnoredData>(zero_stratum).is_err());
        let too_few_g = r#"{"G":1,"n0":1,"n1":0,"strata_s0":[2],"strata_s1":[],"links":[]}"#;
        assert!(serde_json::from_str::<IgnoredData>(too_few_g).is_err());
    }

    #[test]
    fn observed_pair_totals_hand_count() {
        // S0 strata (1, 2), S1 strata (2)
        let d = IgnoredData::new(2, vec![0, 1], vec![1], vec![(0, 2)]).unwrap();
        let c = d.observed_counts();
        assert_eq!(c.s0_counts, vec![1, 1]);
        assert_eq!(c.s1_counts, vec![0, 1]);
        // pairs: (0,1) s0-s0 cross, (0,2) cross, (1,2) within stratum 2
        assert_eq!(c.pair_totals.get(0, 0), 0);
        assert_eq!(c.pair_totals.get(0, 1), 2);
        assert_eq!(c.pair_totals.get(1, 1), 1);
        assert_eq!(c.link_counts.get(0, 1), 1);
    }

    fn signature(d: &IgnoredData) -> (usize, usize, Vec<u16>, Vec<u16>, Vec<usize>) {
        let mut s0 = d.strata_s0().to_vec();
        let mut s1 = d.strata_s1().to_vec();
        s0.sort_unstable();
        s1.sort_unstable();
        let mut deg = vec![0usize; d.sample_size()];
        for &(i, j) in d.links() {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        deg.sort_unstable();
        (d.n0(), d.n1(), s0, s1, deg)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn wave_structure_invariants(seed in any::<u64>(), q in 0.0f64..0.6) {
            let g = random_graph(seed);
            let s0 = draw_initial(&g, &design(InitialDesign::Bernoulli { q }, seed ^ 1)).unwrap();
            let s = trace_one_wave(&g, &s0).unwrap();
            prop_assert!(s.s1.iter().all(|v| s.s0.binary_search(v).is_err()));
            for &v in &s.s1 {
                prop_assert!(g.neighbors(v).iter().any(|u| s.s0.binary_search(u).is_ok()));
            }
            for &(u, v) in &s.links {
                prop_assert!(s.s0.binary_search(&u).is_ok() || s.s0.binary_search(&v).is_ok());
                prop_assert!(g.has_edge(u, v));
            }
            // deterministic
            prop_assert_eq!(&s, &trace_one_wave(&g, &s0).unwrap());
            prop_assert!(to_ignored_data(&s).is_ok());
        }

        #[test]
        fn reduction_is_label_free(seed in any::<u64>(), shift in 1u32..40) {
            let g = random_graph(seed);
            let s0 = draw_initial(&g, &design(InitialDesign::FixedSize { n0: 8 }, seed)).unwrap();
            let d = to_ignored_data(&trace_one_wave(&g, &s0).unwrap()).unwrap();

            let relabel = |u: NodeId| (39 - u + shift) % 40;
            let mut strata = vec![0u16; 40];
            for u in 0..40u32 {
                strata[relabel(u) as usize] = g.strata()[u as usize];
            }
            let h = PopulationGraph::from_edges(2, strata, g.edges().map(|(u, v)| (relabel(u), relabel(v)))).unwrap();
            let s0h: Vec<NodeId> = s0.iter().map(|&u| relabel(u)).collect();
            let dh = to_ignored_data(&trace_one_wave(&h, &s0h).unwrap()).unwrap();
            prop_assert_eq!(signature(&d), signature(&dh));
        }

        #[test]
        fn json_round_trip(seed in any::<u64>()) {
            let g = random_graph(seed);
            let s0 = draw_initial(&g, &design(InitialDesign::FixedSize { n0: 10 }, seed)).unwrap();
            let d = to_ignored_data(&trace_one_wave(&g, &s0).unwrap()).unwrap();
            let back: IgnoredData = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
