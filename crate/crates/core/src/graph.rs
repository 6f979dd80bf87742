//! Population graphs: generation, sufficient statistics, full-graph
//! likelihood and maximum-likelihood estimates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{count_ln, count_ln_1m, pairs_within};
use crate::rng::{rng_from_seed, SimRng};
use crate::sbm::{SbmParams, SymMatrix};

/// Node index inside a population.
pub type NodeId = u32;

/// A full realization of strata and an undirected simple graph.
///
/// Adjacency lists are sorted and symmetric, with no self loops.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGraph {
    strata_count: usize,
    strata: Vec<u16>,
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl PopulationGraph {
    /// Builds from 0-based strata and an unordered edge list. Rejects self
    /// loops, duplicate edges and out-of-range ids or strata.
    pub fn from_edges(
        strata_count: usize,
        strata: Vec<u16>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let n = strata.len();
        if let Some((i, c)) = strata
            .iter()
            .enumerate()
            .find(|(_, c)| usize::from(**c) >= strata_count)
        {
            return Err(Error::InvalidGraph(format!(
                "node {i} has stratum {} outside 1..={strata_count}",
                c + 1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self loop at node {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {u}-{v} references a node outside 0..{n}"
                )));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
            edge_count += 1;
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge {u}-{}", w[0])));
            }
        }
        Ok(Self {
            strata_count,
            strata,
            adjacency,
            edge_count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.strata.len()
    }

    pub fn strata_count(&self) -> usize {
        self.strata_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// 0-based stratum of every node.
    pub fn strata(&self) -> &[u16] {
        &self.strata
    }

    #[inline]
    pub fn stratum(&self, node: NodeId) -> usize {
        usize::from(self.strata[node as usize])
    }

    #[inline]
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node as usize]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as NodeId;
            list.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

/// Draws a population of `n` nodes: i.i.d. categorical strata, then each
/// unordered pair linked independently with probability `beta[c_i][c_j]`.
pub fn generate_population(params: &SbmParams, n: usize, seed: u64) -> Result<PopulationGraph> {
    params.validate()?;
    let mut rng = rng_from_seed(seed);
    let strata = draw_strata(params.lambda(), n, &mut rng);
    let edges = draw_edges(&strata, |k, l| params.beta_at(k, l), &mut rng);
    PopulationGraph::from_edges(params.strata(), strata, edges)
}

pub(crate) fn draw_strata(lambda: &[f64], n: usize, rng: &mut SimRng) -> Vec<u16> {
    let last = lambda.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (k, w) in lambda.iter().enumerate().take(last) {
                acc += w;
                if u < acc {
                    return k as u16;
                }
            }
            last as u16
        })
        .collect()
}

/// Links every unordered pair independently with `link_prob` of its strata.
///
/// Pairs are visited block by block (one block per stratum pair) with
/// geometric jumps between successive links, so the cost is `O(N + E)`.
pub(crate) fn draw_edges(
    strata: &[u16],
    link_prob: impl Fn(usize, usize) -> f64,
    rng: &mut SimRng,
) -> Vec<(NodeId, NodeId)> {
    let g = strata
        .iter()
        .map(|&c| usize::from(c) + 1)
        .max()
        .unwrap_or(0);
    let mut members: Vec<Vec<NodeId>> = vec![Vec::new(); g];
    for (i, &c) in strata.iter().enumerate() {
        members[usize::from(c)].push(i as NodeId);
    }
    let mut edges = Vec::new();
    for k in 0..g {
        for l in k..g {
            let p = link_prob(k, l);
            let (a, b) = (&members[k], &members[l]);
            if k == l {
                let m = a.len();
                jump_through(
                    m,
                    |r| m - 1 - r,
                    p,
                    rng,
                    |r, c| {
                        edges.push((a[r], a[r + 1 + c]));
                    },
                );
            } else {
                jump_through(
                    a.len(),
                    |_| b.len(),
                    p,
                    rng,
                    |r, c| {
                        let (u, v) = (a[r], b[c]);
                        edges.push((u.min(v), u.max(v)));
                    },
                );
            }
        }
    }
    edges
}

/// Visits a ragged grid of `rows` rows and keeps each cell with probability
/// `p`, jumping ahead by Geometric(p) gaps.
fn jump_through(
    rows: usize,
    row_len: impl Fn(usize) -> usize,
    p: f64,
    rng: &mut SimRng,
    mut keep: impl FnMut(usize, usize),
) {
    if !(p > 0.0) {
        return;
    }
    let log_q = (-p).ln_1p();
    let (mut row, mut col) = (0usize, 0usize);
    loop {
        if p < 1.0 {
            let u = 1.0 - rng.random::<f64>();
            let gap = (u.ln() / log_q).floor();
            col = col.saturating_add(if gap >= usize::MAX as f64 {
                usize::MAX
            } else {
                gap as usize
            });
        }
        while row < rows && col >= row_len(row) {
            col -= row_len(row);
            row += 1;
        }
        if row >= rows {
            return;
        }
        keep(row, col);
        col += 1;
    }
}

/// Stratum sizes, link counts and pair totals of a full realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientCounts {
    pub strata_counts: Vec<u64>,
    /// `M[k][k]` within-stratum links, `M[k][l]` (k < l) between-stratum links.
    pub link_counts: SymMatrix<u64>,
    /// `C(N_k, 2)` on the diagonal, `N_k * N_l` off it.
    pub pair_totals: SymMatrix<u64>,
}

impl SufficientCounts {
    pub fn from_parts(strata_counts: Vec<u64>, link_counts: SymMatrix<u64>) -> Self {
        let pair_totals = pair_totals(&strata_counts);
        Self {
            strata_counts,
            link_counts,
            pair_totals,
        }
    }

    pub fn population(&self) -> u64 {
        self.strata_counts.iter().sum()
    }

    /// Log of the full-graph likelihood for these counts.
    ///
    /// `-inf` when the counts are impossible under `params` (a link where
    /// `beta = 0`, a missing link where `beta = 1`, a member of a stratum
    /// with `lambda = 0`).
    pub fn log_likelihood(&self, params: &SbmParams) -> Result<f64> {
        if params.strata() != self.strata_counts.len() {
            return Err(Error::InvalidParams(format!(
                "params have G={} but the graph has {} strata",
                params.strata(),
                self.strata_counts.len()
            )));
        }
        let strata_term: f64 = self
            .strata_counts
            .iter()
            .zip(params.lambda())
            .map(|(&n, &l)| count_ln(n as f64, l))
            .sum();
        let link_term: f64 = self
            .link_counts
            .iter_upper()
            .map(|(k, l, m)| {
                let total = self.pair_totals.get(k, l);
                let b = params.beta_at(k, l);
                count_ln(m as f64, b) + count_ln_1m((total - m) as f64, b)
            })
            .sum();
        Ok(strata_term + link_term)
    }
}

pub(crate) fn pair_totals(strata_counts: &[u64]) -> SymMatrix<u64> {
    SymMatrix::from_fn(strata_counts.len(), |k, l| {
        if k == l {
            pairs_within(strata_counts[k])
        } else {
            strata_counts[k] * strata_counts[l]
        }
    })
}

pub fn sufficient_counts(graph: &PopulationGraph) -> SufficientCounts {
    let g = graph.strata_count();
    let mut strata_counts = vec![0u64; g];
    for &c in graph.strata() {
        strata_counts[usize::from(c)] += 1;
    }
    let mut links = SymMatrix::filled(g, 0u64);
    for (u, v) in graph.edges() {
        links.add(graph.stratum(u), graph.stratum(v), 1);
    }
    SufficientCounts::from_parts(strata_counts, links)
}

/// Log-likelihood of a full realization (strata and all links).
pub fn full_log_likelihood(graph: &PopulationGraph, params: &SbmParams) -> Result<f64> {
    sufficient_counts(graph).log_likelihood(params)
}

/// Maximum-likelihood estimates from a full realization. `beta` entries
/// whose pair total is zero are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullGraphMle {
    pub population: u64,
    pub lambda: Vec<f64>,
    pub beta: SymMatrix<Option<f64>>,
}

impl FullGraphMle {
    /// Substitutes `fallback` for undefined `beta` entries.
    pub fn to_params(&self, fallback: f64) -> Result<SbmParams> {
        SbmParams::new(
            self.lambda.clone(),
            self.beta.map(|b| b.unwrap_or(fallback)),
        )
    }
}

pub fn mle_from_full_graph(graph: &PopulationGraph) -> Result<FullGraphMle> {
    if graph.node_count() == 0 {
        return Err(Error::EmptyPopulation);
    }
    Ok(mle_from_counts(&sufficient_counts(graph)))
}

pub(crate) fn mle_from_counts(counts: &SufficientCounts) -> FullGraphMle {
    let n = counts.population();
    let lambda = counts
        .strata_counts
        .iter()
        .map(|&c| c as f64 / n as f64)
        .collect();
    let beta = SymMatrix::from_fn(counts.strata_counts.len(), |k, l| {
        let total = counts.pair_totals.get(k, l);
        (total > 0).then(|| counts.link_counts.get(k, l) as f64 / total as f64)
    });
    FullGraphMle {
        population: n,
        lambda,
        beta,
    }
}
