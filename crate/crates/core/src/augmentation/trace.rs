use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AugmentedState, SweepStats};
use crate::error::{Error, Result};

/// One recorded chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub n: u64,
    pub lambda: Vec<f64>,
    /// Upper triangle of `beta`, row-major.
    pub beta: Vec<f64>,
}

impl TraceRow {
    pub(crate) fn from_state(iter: usize, state: &AugmentedState) -> Self {
        Self {
            iter,
            n: state.n,
            lambda: state.params.lambda().to_vec(),
            beta: state.params.beta().upper().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub cap: u64,
    /// Sweeps whose population-size proposal landed above the cap at least once.
    pub cap_hits: u64,
    pub cap_rejections: u64,
    /// Sweeps that sampled `N` by inversion on the truncated support.
    pub inverted_draws: u64,
}

impl ChainDiagnostics {
    pub(crate) fn record(&mut self, stats: &SweepStats) {
        if stats.cap_rejections > 0 {
            self.cap_hits += 1;
        }
        self.cap_rejections += u64::from(stats.cap_rejections);
        if stats.inverted {
            self.inverted_draws += 1;
        }
    }
}

/// Posterior means and standard deviations over the retained iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesEstimates {
    pub retained: usize,
    pub n_mean: f64,
    pub n_rounded: u64,
    pub n_sd: f64,
    pub lambda_mean: Vec<f64>,
    pub lambda_sd: Vec<f64>,
    pub beta_mean: Vec<f64>,
    pub beta_sd: Vec<f64>,
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = values
        .clone()
        .fold((0usize, 0.0), |(c, s), v| (c + 1, s + v));
    let mean = sum / count as f64;
    let sd = if count > 1 {
        (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

impl BayesEstimates {
    fn from_rows(rows: &[TraceRow]) -> Self {
        let (n_mean, n_sd) = mean_sd(rows.iter().map(|r| r.n as f64));
        let column = |pick: fn(&TraceRow) -> &Vec<f64>, width: usize| -> (Vec<f64>, Vec<f64>) {
            (0..width)
                .map(|i| mean_sd(rows.iter().map(move |r| pick(r)[i])))
                .unzip()
        };
        let (lambda_mean, lambda_sd) = column(|r| &r.lambda, rows[0].lambda.len());
        let (beta_mean, beta_sd) = column(|r| &r.beta, rows[0].beta.len());
        Self {
            retained: rows.len(),
            n_mean,
            n_rounded: n_mean.round() as u64,
            n_sd,
            lambda_mean,
            lambda_sd,
            beta_mean,
            beta_sd,
        }
    }
}

/// Every state of a chain plus the Bayes estimates from its post-burn-in
/// suffix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    strata_count: usize,
    rows: Vec<TraceRow>,
    burn_in: usize,
    estimates: BayesEstimates,
    diagnostics: ChainDiagnostics,
    seed: u64,
}

impl ChainTrace {
    pub(crate) fn new(
        strata_count: usize,
        rows: Vec<TraceRow>,
        burn_in: usize,
        diagnostics: ChainDiagnostics,
        seed: u64,
    ) -> Self {
        let estimates = BayesEstimates::from_rows(&rows[burn_in..]);
        Self {
            strata_count,
            rows,
            burn_in,
            estimates,
            diagnostics,
            seed,
        }
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn retained(&self) -> &[TraceRow] {
        &self.rows[self.burn_in..]
    }

    pub fn estimates(&self) -> &BayesEstimates {
        &self.estimates
    }

    pub fn diagnostics(&self) -> &ChainDiagnostics {
        &self.diagnostics
    }

    pub fn strata_count(&self) -> usize {
        self.strata_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `iter,N,lambda_1..lambda_G,beta_1_1,beta_1_2,...`
    pub fn csv_header(strata_count: usize) -> Vec<String> {
        let mut header = vec!["iter".to_string(), "N".to_string()];
        header.extend((1..=strata_count).map(|k| format!("lambda_{k}")));
        for k in 1..=strata_count {
            for l in k..=strata_count {
                header.push(format!("beta_{k}_{l}"));
            }
        }
        header
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::csv_header(self.strata_count))
            .map_err(csv_error)?;
        for r in &self.rows {
            let mut record = vec![r.iter.to_string(), r.n.to_string()];
            record.extend(r.lambda.iter().map(f64::to_string));
            record.extend(r.beta.iter().map(f64::to_string));
            w.write_record(&record).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::io("<trace>", e))
    }

    /// Reads rows written by [`ChainTrace::write_csv`].
    pub fn read_csv_rows(input: impl Read) -> Result<(usize, Vec<TraceRow>)> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(csv_error)?.clone();
        let g = header.iter().filter(|h| h.starts_with("lambda_")).count();
        if header.iter().collect::<Vec<_>>() != Self::csv_header(g) {
            return Err(Error::parse("<trace>", "unexpected trace header"));
        }
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(csv_error)?;
            let field = |i: usize| record.get(i).unwrap_or_default();
            let bad = |i: usize| Error::parse("<trace>", format!("bad value '{}'", field(i)));
            let float = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
            rows.push(TraceRow {
                iter: field(0).parse().map_err(|_| bad(0))?,
                n: field(1).parse().map_err(|_| bad(1))?,
                lambda: (2..2 + g).map(float).collect::<Result<_>>()?,
                beta: (2 + g..record.len()).map(float).collect::<Result<_>>()?,
            });
        }
        Ok((g, rows))
    }

    pub fn summary(&self) -> ChainSummary {
        ChainSummary {
            strata_count: self.strata_count,
            chain_length: self.rows.len(),
            burn_in: self.burn_in,
            seed: self.seed,
            posterior: self.estimates.clone(),
            diagnostics: self.diagnostics,
            conditioning:
                "inference conditions on the initial sample size (simple random sample of fixed n0)"
                    .into(),
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::parse("<trace>", e.to_string())
}

/// Summary JSON written next to a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    #[serde(rename = "G")]
    pub strata_count: usize,
    pub chain_length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub posterior: BayesEstimates,
    pub diagnostics: ChainDiagnostics,
    pub conditioning: String,
}
