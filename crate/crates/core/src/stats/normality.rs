use libm::erfc;
use serde::Serialize;

use super::{text_table, Verdict, REPORT_SCHEMA_VERSION, SURROGATE_NOTE};
use crate::error::{Error, Result};

pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Kolmogorov–Smirnov distance between the standardized sample and `N(0,1)`.
pub fn ks_normal_distance(values: &[f64]) -> Result<f64> {
    if values.len() < 100 {
        return Err(Error::precondition("KS distance needs at least 100 values"));
    }
    let (mean, sd) = mean_sd(values);
    if !(sd > 0.0) {
        return Err(Error::precondition("batch has zero variance"));
    }
    let mut z: Vec<f64> = values.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        let f = standard_normal_cdf(zi);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Tail bound `2 exp(-¼ min{z²/2^{1+γ}, (zΔ)^{1/(1+γ)}})`, written
/// independently of the copy in the bounds module.
pub fn ci_envelope(z: f64, gamma_exp: f64, delta: f64) -> f64 {
    let p = 1.0 + gamma_exp;
    let gaussian = z.powi(2) * (-p * std::f64::consts::LN_2).exp();
    let linear = if z == 0.0 {
        0.0
    } else {
        ((z * delta).ln() / p).exp()
    };
    2.0 * (-(gaussian.min(linear)) / 4.0).exp()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Normal quantile used for the Wilson slack (two-sided 99%).
pub const WILSON_Z: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub z: f64,
    pub envelope: f64,
    pub exceedances: usize,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub schema_version: u32,
    pub note: &'static str,
    pub gamma: f64,
    pub delta: f64,
    pub n: usize,
    pub rows: Vec<ConcentrationRow>,
    pub verdict: Verdict,
}

/// Empirical `P(|X - mean| ≥ z·sd)` against the concentration envelope at
/// `(γ, Δ)`. A row fails when the lower end of the 99% Wilson interval of
/// the tail frequency lies above the envelope.
pub fn concentration_check(
    values: &[f64],
    gamma_exp: f64,
    delta: f64,
    z_grid: &[f64],
) -> Result<ConcentrationReport> {
    if values.len() < 2 {
        return Err(Error::precondition(
            "concentration check needs at least 2 values",
        ));
    }
    let (mean, sd) = mean_sd(values);
    if !(sd > 0.0) {
        return Err(Error::precondition("batch has zero variance"));
    }
    let n = values.len();
    let rows: Vec<ConcentrationRow> = z_grid
        .iter()
        .map(|&z| {
            let exceedances = values
                .iter()
                .filter(|&&x| (x - mean).abs() >= z * sd)
                .count();
            let (lo, hi) = wilson_interval(exceedances, n, WILSON_Z);
            let envelope = ci_envelope(z, gamma_exp, delta);
            ConcentrationRow {
                z,
                envelope,
                exceedances,
                frequency: exceedances as f64 / n as f64,
                wilson_lo: lo,
                wilson_hi: hi,
                verdict: Verdict::from_bool(lo <= envelope),
            }
        })
        .collect();
    let verdict = rows
        .iter()
        .fold(Verdict::Pass, |acc, r| acc.combine(r.verdict));
    Ok(ConcentrationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        note: SURROGATE_NOTE,
        gamma: gamma_exp,
        delta,
        n,
        rows,
        verdict,
    })
}

impl ConcentrationReport {
    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}", r.z),
                    format!("{:.6}", r.envelope),
                    format!("{:.6}", r.frequency),
                    format!("{:.6}", r.wilson_lo),
                    format!("{:.6}", r.wilson_hi),
                    r.verdict.as_str().to_string(),
                ]
            })
            .collect();
        format!(
            "# {}\n# gamma = {}, delta = {}, n = {}\n{}",
            self.note,
            self.gamma,
            self.delta,
            self.n,
            text_table(
                &[
                    "z",
                    "envelope",
                    "tail_freq",
                    "wilson_lo",
                    "wilson_hi",
                    "verdict"
                ],
                &rows
            )
        )
    }
}
