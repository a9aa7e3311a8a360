use std::io::Write;

use rand::Rng;
use serde::Serialize;

use super::{k_statistics, k_statistics_values, text_table, REPORT_SCHEMA_VERSION, SURROGATE_NOTE};
use crate::bounds::statulevicius_envelope;
use crate::error::{Error, Result};
use crate::process::csv_err;
use crate::rng::{stream_rng, Stream};

/// One sweep point: the swept parameter and the batch of functional values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub x: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub schema_version: u32,
    pub note: &'static str,
    pub order: usize,
    pub x: Vec<f64>,
    /// Standardized cumulant `κ̂_m/κ̂_2^{m/2}` per point.
    pub standardized: Vec<f64>,
    /// Jackknife standard error of the standardized cumulant.
    pub std_errors: Vec<f64>,
    pub envelope: Vec<Option<f64>>,
    pub slope: f64,
    pub intercept: f64,
    /// Percentile bootstrap interval for the slope (95%).
    pub slope_ci: (f64, f64),
    /// `-(m-2)/2`
    pub expected_slope: f64,
    pub sign_flips: bool,
    pub bootstrap_replicates: usize,
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn standardized(values: &[f64], m: usize) -> Result<f64> {
    let k = k_statistics_values(values, m.max(2))?;
    if !(k[1] > 0.0) {
        return Err(Error::precondition(
            "batch has no positive variance estimate",
        ));
    }
    Ok(k[m - 1] / k[1].powf(m as f64 / 2.0))
}

/// OLS slope of `log|κ̂_m|` (standardized) against `log x`, with a
/// percentile bootstrap interval from resampling every batch.
pub fn cumulant_scaling_fit(
    points: &[ScalingPoint],
    m: usize,
    bootstrap: usize,
    seed: u64,
) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::precondition(
            "scaling fit needs at least 4 sweep points",
        ));
    }
    if points.iter().any(|p| !(p.x > 0.0)) {
        return Err(Error::precondition("sweep values must be positive"));
    }
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
        (lo.min(p.x), hi.max(p.x))
    });
    if hi / lo < 10.0 {
        return Err(Error::precondition("sweep must span at least one decade"));
    }
    if !(2..=6).contains(&m) {
        return Err(Error::precondition("scaling order must lie in 2..=6"));
    }

    let mut z = Vec::with_capacity(points.len());
    let mut se = Vec::with_capacity(points.len());
    for p in points {
        let r = k_statistics(&p.values, m)?;
        let k2 = r.estimates[1];
        if !(k2 > 0.0) {
            return Err(Error::precondition(format!(
                "sweep point x={} has no positive variance",
                p.x
            )));
        }
        z.push(r.estimates[m - 1] / k2.powf(m as f64 / 2.0));
        se.push(r.std_errors[m - 1] / k2.powf(m as f64 / 2.0));
    }
    let sign_flips = z.iter().any(|v| v.signum() != z[0].signum());
    let lx: Vec<f64> = points.iter().map(|p| p.x.ln()).collect();
    let ly: Vec<f64> = z.iter().map(|v| v.abs().ln()).collect();
    let (slope, intercept) = ols(&lx, &ly);

    let mut slopes = Vec::with_capacity(bootstrap);
    let mut buf = Vec::new();
    for b in 0..bootstrap {
        let mut rng = stream_rng(seed, b as u64, Stream::Bootstrap);
        let mut by = Vec::with_capacity(points.len());
        for p in points {
            buf.clear();
            let n = p.values.len();
            buf.extend((0..n).map(|_| p.values[rng.random_range(0..n)]));
            match standardized(&buf, m) {
                Ok(v) => by.push(v.abs().ln()),
                Err(_) => break,
            }
        }
        if by.len() == points.len() && by.iter().all(|v| v.is_finite()) {
            slopes.push(ols(&lx, &by).0);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let slope_ci = if slopes.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let q = |p: f64| {
            slopes[((p * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)]
        };
        (q(0.025), q(0.975))
    };

    Ok(ScalingFit {
        schema_version: REPORT_SCHEMA_VERSION,
        note: SURROGATE_NOTE,
        order: m,
        x: points.iter().map(|p| p.x).collect(),
        standardized: z,
        std_errors: se,
        envelope: vec![None; points.len()],
        slope,
        intercept,
        slope_ci,
        expected_slope: -(m as f64 - 2.0) / 2.0,
        sign_flips,
        bootstrap_replicates: slopes.len(),
    })
}

impl ScalingFit {
    pub fn slope_within(&self, tolerance: f64) -> bool {
        (self.slope - self.expected_slope).abs() <= tolerance
    }

    /// Attach `(m!)^{1+γ}/Δ_i^{m-2}` per sweep point.
    pub fn with_envelopes(mut self, gamma_exp: f64, deltas: &[f64]) -> Self {
        for (e, &d) in self.envelope.iter_mut().zip(deltas) {
            *e = Some(statulevicius_envelope(self.order as u32, gamma_exp, d));
        }
        self
    }

    /// Plot-ready columns `x, y, y_err, envelope`, then a slope row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "y_err", "envelope"])
            .map_err(csv_err)?;
        for i in 0..self.x.len() {
            w.write_record([
                format!("{:?}", self.x[i]),
                format!("{:?}", self.standardized[i]),
                format!("{:?}", self.std_errors[i]),
                self.envelope[i].map_or(String::new(), |e| format!("{e:?}")),
            ])
            .map_err(csv_err)?;
        }
        w.write_record([
            "slope".to_string(),
            format!("{:?}", self.slope),
            format!("{:?}", 0.5 * (self.slope_ci.1 - self.slope_ci.0)),
            format!("{:?}", self.expected_slope),
        ])
        .map_err(csv_err)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = (0..self.x.len())
            .map(|i| {
                vec![
                    format!("{}", self.x[i]),
                    format!("{:.6}", self.standardized[i]),
                    format!("{:.6}", self.std_errors[i]),
                ]
            })
            .collect();
        format!(
            "# {}\n# order {}: slope {:.4} (95% CI {:.4} .. {:.4}), expected {:.4}{}\n{}",
            self.note,
            self.order,
            self.slope,
            self.slope_ci.0,
            self.slope_ci.1,
            self.expected_slope,
            if self.sign_flips {
                ", sign flips across the sweep"
            } else {
                ""
            },
            text_table(&["x", "standardized", "se"], &rows)
        )
    }
}
