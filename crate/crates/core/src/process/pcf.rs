use serde::Serialize;

use super::PointSample;
use crate::config::{ball_volume, WindowSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCorrelationBin {
    pub r_lo: f64,
    pub r_hi: f64,
    /// `None` when no pair fell in the bin in any sample.
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
}

/// Histogram estimator of `g(r) = ρ₂(r)/ρ₁²` on a torus.
///
/// `r_edges` are increasing bin edges. Each sample yields
/// `ĝ_s = (ordered pairs in ring)·|W| / (|ring|·n̄²)` with `n̄` the mean count
/// over all samples; the estimate is the mean of `ĝ_s` and the standard error
/// is their standard deviation over `√S`.
pub fn estimate_pair_correlation(
    samples: &[PointSample],
    window: &WindowSpec,
    r_edges: &[f64],
) -> Result<Vec<PairCorrelationBin>> {
    if samples.len() < 2 {
        return Err(Error::precondition(
            "pair correlation needs at least 2 samples",
        ));
    }
    if !window.is_torus() {
        return Err(Error::precondition(
            "pair correlation estimator requires a torus window",
        ));
    }
    if r_edges.len() < 2 || r_edges.windows(2).any(|w| !(w[1] > w[0])) || r_edges[0] < 0.0 {
        return Err(Error::precondition(
            "r_grid must be at least two increasing non-negative edges",
        ));
    }
    let half = window.sides.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
    let r_max = *r_edges.last().unwrap();
    if r_max > half {
        return Err(Error::precondition(
            "largest radius exceeds half the smallest torus side",
        ));
    }
    let d = window.dim();
    let nbins = r_edges.len() - 1;
    let s = samples.len() as f64;
    let nbar = samples.iter().map(|p| p.len() as f64).sum::<f64>() / s;
    let volume = window.volume();

    let mut per_sample = vec![vec![0u64; nbins]; samples.len()];
    for (sample, counts) in samples.iter().zip(per_sample.iter_mut()) {
        let pts = &sample.points;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let r = window.distance(&pts[i].location, &pts[j].location);
                if r < r_edges[0] || r >= r_max {
                    continue;
                }
                let b = r_edges.partition_point(|&e| e <= r) - 1;
                counts[b] += 2;
            }
        }
    }

    let bins = (0..nbins)
        .map(|b| {
            let (lo, hi) = (r_edges[b], r_edges[b + 1]);
            let total: u64 = per_sample.iter().map(|c| c[b]).sum();
            if total == 0 || nbar == 0.0 {
                return PairCorrelationBin {
                    r_lo: lo,
                    r_hi: hi,
                    estimate: None,
                    std_error: None,
                };
            }
            let ring = ball_volume(hi, d) - ball_volume(lo, d);
            let scale = volume / (ring * nbar * nbar);
            let g: Vec<f64> = per_sample.iter().map(|c| c[b] as f64 * scale).collect();
            let mean = g.iter().sum::<f64>() / s;
            let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1.0);
            PairCorrelationBin {
                r_lo: lo,
                r_hi: hi,
                estimate: Some(mean),
                std_error: Some((var / s).sqrt()),
            }
        })
        .collect();
    Ok(bins)
}
