//! Monte Carlo harness: replication batches, cumulant estimation, normality
//! and concentration checks, cumulant scaling fits and Monte Carlo checks of
//! the spanning-tree integral bound.
//!
//! The moderate deviation principle is asymptotic and cannot be checked at a
//! finite size; the reports use the Kolmogorov–Smirnov distance to the normal
//! law and the scaling of standardized cumulants with the intensity as
//! surrogates.

mod cumulants;
mod integral;
mod normality;
mod scaling;

pub use cumulants::*;
pub use integral::*;
pub use normality::*;
pub use scaling::*;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::functionals::{count_subgraphs, powered_edge_length};
use crate::graph::sample_graph_replication;
use crate::process::csv_err;
use crate::rng::{stream_seed, Stream};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const SURROGATE_NOTE: &str =
    "MDP is asymptotic; finite-size surrogates are the KS distance to N(0,1) \
     and the log-log slope of standardized cumulants against the intensity";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalChoice {
    /// Copies of the configured pattern.
    Subgraph,
    /// Sum of `length^τ` over edges.
    EdgePower,
}

impl FunctionalChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            FunctionalChoice::Subgraph => "subgraph",
            FunctionalChoice::EdgePower => "edge-power",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "subgraph" => Some(FunctionalChoice::Subgraph),
            "edge-power" => Some(FunctionalChoice::EdgePower),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationBatch {
    /// The configuration that produced the batch, as TOML.
    pub config: String,
    pub functional: FunctionalChoice,
    pub master_seed: u64,
    /// One value per replication, in replication order.
    pub values: Vec<f64>,
    /// Seed of the vertex stream of each replication.
    pub seeds: Vec<u64>,
}

impl ReplicationBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Columns `replication, seed, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["replication", "seed", "value"])
            .map_err(csv_err)?;
        for (i, (s, v)) in self.seeds.iter().zip(&self.values).enumerate() {
            w.write_record([i.to_string(), s.to_string(), format!("{v:?}")])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluate one functional on replication `index`.
pub fn replication_value(
    config: &SimulationConfig,
    functional: FunctionalChoice,
    index: u64,
) -> Result<f64> {
    let graph = sample_graph_replication(config, index)?;
    Ok(match functional {
        FunctionalChoice::Subgraph => count_subgraphs(&graph, &config.pattern).value,
        FunctionalChoice::EdgePower => powered_edge_length(&graph, config.tau).value,
    })
}

/// Run `n` replications on `workers` threads (0 picks the rayon default).
/// Results are in replication order whatever the schedule.
pub fn run_replications(
    config: &SimulationConfig,
    functional: FunctionalChoice,
    n: usize,
    workers: usize,
) -> Result<ReplicationBatch> {
    if n < 2 {
        return Err(Error::precondition("need at least 2 replications"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::precondition(format!("cannot start worker pool: {e}")))?;
    let values: Vec<f64> = pool.install(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                replication_value(config, functional, i).map_err(|e| Error::Replication {
                    index: i as usize,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()
    })?;
    Ok(ReplicationBatch {
        config: config.to_toml(),
        functional,
        master_seed: config.master_seed,
        values,
        seeds: (0..n as u64)
            .map(|i| stream_seed(config.master_seed, i, Stream::Points))
            .collect(),
    })
}

/// Column-aligned text table.
pub(crate) fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    pub(crate) fn rcm_config(t: f64, nu: f64, reps: usize) -> SimulationConfig {
        parse_config(&format!(
            r#"
spec_version = 1
[window]
sides = [1.0, 1.0]
boundary = "torus"
[model]
intensity = {t}
volume_scale = {nu}
[profile]
family = "indicator"
[kernel]
family = "unit"
[weights]
family = "constant-one"
[vertex_process]
kind = "poisson"
[pattern]
q = 2
edges = [[1, 2]]
[run]
master_seed = 11
replications = {reps}
"#
        ))
        .unwrap()
    }

    #[test]
    fn batches_are_deterministic_and_schedule_free() {
        let c = rcm_config(100.0, 0.02, 50);
        let a = run_replications(&c, FunctionalChoice::Subgraph, 50, 1).unwrap();
        let b = run_replications(&c, FunctionalChoice::Subgraph, 50, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        let mut csv_a = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        let mut csv_b = Vec::new();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        assert!(run_replications(&c, FunctionalChoice::Subgraph, 1, 1).is_err());
    }

    #[test]
    fn edge_count_mean_matches_closed_form() {
        // E = t²|W|ν/2 on the torus
        let c = rcm_config(100.0, 0.02, 400);
        let b = run_replications(&c, FunctionalChoice::Subgraph, 400, 0).unwrap();
        let n = b.len() as f64;
        let mean = b.values.iter().sum::<f64>() / n;
        let sd = (b.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 100.0).abs() < 3.0 * sd / n.sqrt(), "{mean}");
    }

    #[test]
    fn verdicts_combine() {
        use Verdict::*;
        assert_eq!(Pass.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Fail), Fail);
        assert_eq!(Pass.combine(Pass), Pass);
    }

    #[test]
    fn table_aligns() {
        let t = text_table(&["a", "bbb"], &[vec!["1234".into(), "x".into()]]);
        assert_eq!(t, "   a  bbb\n1234    x\n");
    }
}
