//! File formats.
//!
//! * Graph: an edge-list TSV with header `u<TAB>v` and ids `0..N-1`, plus a
//!   strata CSV (`node_id,stratum`, strata numbered from 1) listing every
//!   node, isolated ones included.
//! * Parameters: JSON `{"G": .., "lambda": [..], "beta": [upper triangle]}`.
//! * Sample: JSON `{"n0", "n1", "strata_s0", "strata_s1", "links"}`.
//! * Likelihood profile: CSV `N,observed,ignored`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, PopulationGraph};
use crate::likelihood::ProfileRow;
use crate::sbm::SbmParams;
use crate::snowball::IgnoredData;

pub const EDGE_HEADER: [&str; 2] = ["u", "v"];
pub const STRATA_HEADER: [&str; 2] = ["node_id", "stratum"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_graph(graph: &PopulationGraph, edges_path: &Path, strata_path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(create(edges_path)?);
    w.write_record(EDGE_HEADER)
        .map_err(|e| csv_error(edges_path, e))?;
    for (u, v) in graph.edges() {
        w.write_record([u.to_string(), v.to_string()])
            .map_err(|e| csv_error(edges_path, e))?;
    }
    w.flush().map_err(|e| Error::io(edges_path, e))?;

    let mut w = csv::Writer::from_writer(create(strata_path)?);
    w.write_record(STRATA_HEADER)
        .map_err(|e| csv_error(strata_path, e))?;
    for (i, &c) in graph.strata().iter().enumerate() {
        w.write_record([i.to_string(), (c + 1).to_string()])
            .map_err(|e| csv_error(strata_path, e))?;
    }
    w.flush().map_err(|e| Error::io(strata_path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::parse(path, e.to_string())
}

/// Reads a graph. `strata_count` defaults to the largest stratum listed.
pub fn read_graph(
    edges_path: &Path,
    strata_path: &Path,
    strata_count: Option<usize>,
) -> Result<PopulationGraph> {
    let strata_rows = read_pairs(strata_path, b',', &STRATA_HEADER)?;
    let n = strata_rows.len();
    let mut strata = vec![None; n];
    for (line, id, stratum) in strata_rows {
        let slot = strata.get_mut(id as usize).ok_or_else(|| {
            Error::parse(
                strata_path,
                format!("line {line}: node id {id} outside 0..{n}"),
            )
        })?;
        if slot.is_some() {
            return Err(Error::parse(
                strata_path,
                format!("line {line}: node {id} listed twice"),
            ));
        }
        let c = u16::try_from(stratum)
            .ok()
            .and_then(|s| s.checked_sub(1))
            .ok_or_else(|| {
                Error::parse(
                    strata_path,
                    format!("line {line}: stratum {stratum} not in 1..=65535"),
                )
            })?;
        *slot = Some(c);
    }
    let strata: Vec<u16> = strata
        .into_iter()
        .map(|c| c.expect("ids are a permutation of 0..n"))
        .collect();
    let g = strata_count.unwrap_or_else(|| {
        strata
            .iter()
            .map(|&c| usize::from(c) + 1)
            .max()
            .unwrap_or(1)
    });

    let edges: Vec<(NodeId, NodeId)> = read_pairs(edges_path, b'\t', &EDGE_HEADER)?
        .into_iter()
        .map(|(_, u, v)| (u as NodeId, v as NodeId))
        .collect();
    PopulationGraph::from_edges(g, strata, edges)
        .map_err(|e| Error::parse(edges_path, e.to_string()))
}

/// Two-column integer table, optional header row matching `header`.
fn read_pairs(path: &Path, delimiter: u8, header: &[&str; 2]) -> Result<Vec<(usize, u64, u64)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let line = i + 1;
        if i == 0
            && record.len() == 2
            && record.get(0) == Some(header[0])
            && record.get(1) == Some(header[1])
        {
            continue;
        }
        if record.len() == 1 && record.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::parse(
                path,
                format!("line {line}: expected 2 fields, found {}", record.len()),
            ));
        }
        let field = |j: usize| -> Result<u64> {
            let raw = record.get(j).unwrap_or_default().trim();
            raw.parse().map_err(|_| {
                Error::parse(
                    path,
                    format!("line {line}: '{raw}' is not a non-negative integer"),
                )
            })
        };
        rows.push((line, field(0)?, field(1)?));
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

pub fn read_params(path: &Path) -> Result<SbmParams> {
    read_json(path)
}

pub fn read_sample(path: &Path) -> Result<IgnoredData> {
    read_json(path)
}

pub const PROFILE_HEADER: [&str; 3] = ["N", "observed", "ignored"];

pub fn write_profile(rows: &[ProfileRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(PROFILE_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.observed.to_string(),
            r.ignored.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_population, sufficient_counts};

    #[test]
    fn graph_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = SbmParams::from_upper(vec![0.3, 0.7], vec![0.2, 0.05, 0.1]).unwrap();
        let g = generate_population(&p, 60, 3).unwrap();
        let (e, s) = (dir.path().join("g.tsv"), dir.path().join("g.csv"));
        write_graph(&g, &e, &s).unwrap();
        let back = read_graph(&e, &s, Some(2)).unwrap();
        assert_eq!(back, g);
        assert_eq!(sufficient_counts(&back), sufficient_counts(&g));
    }

    #[test]
    fn profile_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let rows = [ProfileRow {
            n: 7,
            observed: -1.5,
            ignored: -0.25,
        }];
        write_profile(&rows, &path).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "N,observed,ignored\n7,-1.5,-0.25\n"
        );
    }

    #[test]
    fn empty_graph_files_have_headers() {
        let dir = tempfile::tempdir().unwrap();
        let g = PopulationGraph::from_edges(1, vec![], []).unwrap();
        let (e, s) = (dir.path().join("g.tsv"), dir.path().join("g.csv"));
        write_graph(&g, &e, &s).unwrap();
        assert_eq!(fs::read_to_string(&e).unwrap(), "u\tv\n");
        assert_eq!(fs::read_to_string(&s).unwrap(), "node_id,stratum\n");
        assert_eq!(read_graph(&e, &s, Some(1)).unwrap().node_count(), 0);
    }

    #[test]
    fn headerless_files_are_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let (e, s) = (dir.path().join("g.tsv"), dir.path().join("g.csv"));
        fs::write(&e, "0\t1\n1\t2\n").unwrap();
        fs::write(&s, "2,1\n0,2\n1,2\n3,1\n").unwrap();
        let g = read_graph(&e, &s, None).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.strata_count(), 2);
        assert_eq!(g.strata(), &[1, 1, 0, 0]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn malformed_graph_files() {
        let dir = tempfile::tempdir().unwrap();
        let (e, s) = (dir.path().join("g.tsv"), dir.path().join("g.csv"));
        fs::write(&s, "node_id,stratum\n0,1\n1,1\n").unwrap();
        for bad in ["0\t5\n", "0\t0\n", "0\t1\n1\t0\n", "0\tx\n", "0\t1\t2\n"] {
            fs::write(&e, bad).unwrap();
            assert!(read_graph(&e, &s, None).is_err(), "{bad:?}");
        }
        fs::write(&e, "").unwrap();
        for bad in ["0,1\n0,1\n", "0,1\n2,1\n", "0,0\n"] {
            fs::write(&s, bad).unwrap();
            assert!(read_graph(&e, &s, None).is_err(), "{bad:?}");
        }
        assert!(read_graph(&dir.path().join("missing"), &s, None).is_err());
    }
}
