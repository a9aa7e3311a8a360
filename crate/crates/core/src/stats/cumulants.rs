use serde::Serialize;

use super::{fmt_opt, text_table, Verdict, REPORT_SCHEMA_VERSION, SURROGATE_NOTE};
use crate::bounds::statulevicius_envelope;
use crate::error::{Error, Result};

pub const MAX_K_ORDER: usize = 6;

/// k-statistics from the central moments `m[r] = Σ(x - x̄)^r / n`, `r ≤ 6`.
fn k_from_central(n: f64, m: &[f64; 7], m_max: usize) -> Vec<f64> {
    let (m2, m3, m4, m5, m6) = (m[2], m[3], m[4], m[5], m[6]);
    let n1 = n - 1.0;
    let n2 = n - 2.0;
    let n3 = n - 3.0;
    let n4 = n - 4.0;
    let n5 = n - 5.0;
    let mut k = Vec::with_capacity(m_max);
    for r in 1..=m_max {
        k.push(match r {
            1 => m[1],
            2 => n / n1 * m2,
            3 => n * n / (n1 * n2) * m3,
            4 => n * n * ((n + 1.0) * m4 - 3.0 * n1 * m2 * m2) / (n1 * n2 * n3),
            5 => n.powi(3) * ((n + 5.0) * m5 - 10.0 * n1 * m2 * m3) / (n1 * n2 * n3 * n4),
            6 => {
                n * n
                    * ((n + 1.0) * (n * n + 15.0 * n - 4.0) * m6
                        - 15.0 * n1 * n1 * (n + 4.0) * m2 * m4
                        - 10.0 * n1 * (n * n - n + 4.0) * m3 * m3
                        + 30.0 * n * n1 * n2 * m2.powi(3))
                    / (n1 * n2 * n3 * n4 * n5)
            }
            _ => unreachable!(),
        });
    }
    k
}

/// Central moments of a sample given power sums `p[r] = Σ y^r` of values
/// shifted by an arbitrary constant; `m[1]` holds the mean of `y`.
fn central_from_power_sums(n: f64, p: &[f64; 7]) -> [f64; 7] {
    let mean = p[1] / n;
    let mut m = [0.0; 7];
    m[1] = mean;
    for r in 2..=6 {
        // Σ (y - mean)^r = Σ_k C(r,k) (-mean)^{r-k} p[k]
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 0..=r {
            acc += binom * (-mean).powi((r - k) as i32) * p[k];
            binom = binom * (r - k) as f64 / (k + 1) as f64;
        }
        m[r] = acc / n;
    }
    m
}

/// Unbiased cumulant estimates of orders `1..=m_max`.
pub fn k_statistics_values(values: &[f64], m_max: usize) -> Result<Vec<f64>> {
    check_order(values.len(), m_max)?;
    let n = values.len() as f64;
    let shift = values.iter().sum::<f64>() / n;
    let p = shifted_power_sums(values, shift);
    let mut m = central_from_power_sums(n, &p);
    m[1] += shift;
    Ok(k_from_central(n, &m, m_max))
}

fn check_order(n: usize, m_max: usize) -> Result<()> {
    if m_max == 0 || m_max > MAX_K_ORDER {
        return Err(Error::precondition(format!(
            "cumulant order must lie in 1..={MAX_K_ORDER}"
        )));
    }
    if n <= m_max {
        return Err(Error::precondition(format!(
            "need more than {m_max} values for order {m_max}, got {n}"
        )));
    }
    Ok(())
}

fn shifted_power_sums(values: &[f64], shift: f64) -> [f64; 7] {
    let mut p = [0.0; 7];
    for &x in values {
        let y = x - shift;
        let mut pow = 1.0;
        for s in p.iter_mut() {
            *s += pow;
            pow *= y;
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantReport {
    pub schema_version: u32,
    pub note: &'static str,
    pub n: usize,
    pub orders: Vec<usize>,
    pub estimates: Vec<f64>,
    /// Leave-one-out jackknife standard errors.
    pub std_errors: Vec<f64>,
    /// `κ̂_m / κ̂_2^{m/2}`; absent when `κ̂_2 ≤ 0`.
    pub standardized: Vec<Option<f64>>,
    /// `(m!)^{1+γ}/Δ^{m-2}` for `m ≥ 3` when an envelope was requested.
    pub envelope: Vec<Option<f64>>,
    pub verdicts: Vec<Option<Verdict>>,
}

/// k-statistics with jackknife standard errors.
pub fn k_statistics(values: &[f64], m_max: usize) -> Result<CumulantReport> {
    check_order(values.len(), m_max)?;
    let estimates = k_statistics_values(values, m_max)?;
    let n = values.len();
    let nf = n as f64;

    // leave-one-out estimates from downdated power sums
    let shift = values.iter().sum::<f64>() / nf;
    let p = shifted_power_sums(values, shift);
    let mut loo = vec![Vec::with_capacity(n); m_max];
    let mut q = [0.0; 7];
    for &x in values {
        let y = x - shift;
        let mut pow = 1.0;
        for r in 0..7 {
            q[r] = p[r] - pow;
            pow *= y;
        }
        let mut m = central_from_power_sums(nf - 1.0, &q);
        m[1] += shift;
        for (r, k) in k_from_central(nf - 1.0, &m, m_max).into_iter().enumerate() {
            loo[r].push(k);
        }
    }
    let std_errors = loo
        .iter()
        .map(|ks| {
            let mean = ks.iter().sum::<f64>() / nf;
            let ss: f64 = ks.iter().map(|k| (k - mean).powi(2)).sum();
            ((nf - 1.0) / nf * ss).sqrt()
        })
        .collect();

    let k2 = estimates.get(1).copied();
    let standardized = estimates
        .iter()
        .enumerate()
        .map(|(i, &k)| match k2 {
            Some(k2) if k2 > 0.0 => Some(k / k2.powf((i + 1) as f64 / 2.0)),
            _ => None,
        })
        .collect();
    Ok(CumulantReport {
        schema_version: REPORT_SCHEMA_VERSION,
        note: SURROGATE_NOTE,
        n,
        orders: (1..=m_max).collect(),
        estimates,
        std_errors,
        standardized,
        envelope: vec![None; m_max],
        verdicts: vec![None; m_max],
    })
}

impl CumulantReport {
    /// Compare standardized cumulants of order `m ≥ 3` with the growth
    /// envelope; an order passes when `|κ̂_m| - 3·SE ≤ envelope`.
    pub fn with_envelope(mut self, gamma_exp: f64, delta: f64) -> Self {
        let k2 = self.estimates.get(1).copied().unwrap_or(0.0);
        for (i, &m) in self.orders.iter().enumerate() {
            if m < 3 {
                continue;
            }
            let env = statulevicius_envelope(m as u32, gamma_exp, delta);
            self.envelope[i] = Some(env);
            self.verdicts[i] = self.standardized[i].map(|s| {
                let se = self.std_errors[i] / k2.powf(m as f64 / 2.0);
                Verdict::from_bool(s.abs() - 3.0 * se <= env)
            });
        }
        self
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<Vec<String>> = (0..self.orders.len())
            .map(|i| {
                vec![
                    self.orders[i].to_string(),
                    format!("{:.6}", self.estimates[i]),
                    format!("{:.6}", self.std_errors[i]),
                    fmt_opt(self.standardized[i]),
                    fmt_opt(self.envelope[i]),
                    self.verdicts[i].map_or("-", Verdict::as_str).to_string(),
                ]
            })
            .collect();
        format!(
            "# {}\n# n = {}\n{}",
            self.note,
            self.n,
            text_table(
                &[
                    "order",
                    "k_stat",
                    "jackknife_se",
                    "standardized",
                    "envelope",
                    "verdict"
                ],
                &rows
            )
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    /// Cumulants from raw moments `mu[0..=6]` by the standard recursion.
    fn cumulants_from_moments(mu: &[f64]) -> Vec<f64> {
        let n = mu.len() - 1;
        let mut k = vec![0.0; n + 1];
        for r in 1..=n {
            let mut acc = mu[r];
            let mut binom = 1.0; // C(r-1, j-1)
            for j in 1..r {
                acc -= binom * k[j] * mu[r - j];
                binom = binom * (r - j) as f64 / j as f64;
            }
            k[r] = acc;
        }
        k
    }

    #[test]
    fn textbook_examples() {
        let k = k_statistics_values(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap();
        assert!((k[0] - 3.0).abs() < 1e-12 && (k[1] - 2.5).abs() < 1e-12);
        let k = k_statistics_values(&[-2.0, -1.0, 0.0, 1.0, 2.0], 3).unwrap();
        assert!(k[2].abs() < 1e-12);
        assert!(k_statistics_values(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(k_statistics_values(&[1.0; 10], 7).is_err());
    }

    #[test]
    fn unbiased_by_exhaustive_enumeration() {
        // every sample of size 7 from a three-point law, weighted exactly
        let support = [0.0, 1.0, 3.5];
        let prob = [0.5, 0.3, 0.2];
        let n = 7;
        let mut expect = [0.0; 6];
        let mut idx = vec![0usize; n];
        loop {
            let sample: Vec<f64> = idx.iter().map(|&i| support[i]).collect();
            let w: f64 = idx.iter().map(|&i| prob[i]).product();
            for (e, k) in expect
                .iter_mut()
                .zip(k_statistics_values(&sample, 6).unwrap())
            {
                *e += w * k;
            }
            let mut pos = 0;
            while pos < n {
                idx[pos] += 1;
                if idx[pos] < 3 {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        let mu: Vec<f64> = (0..=6)
            .map(|r| support.iter().zip(&prob).map(|(x, p)| p * x.powi(r)).sum())
            .collect();
        let kappa = cumulants_from_moments(&mu);
        for r in 1..=6 {
            assert!(
                (expect[r - 1] - kappa[r]).abs() < 1e-9 * (1.0 + kappa[r].abs()),
                "order {r}"
            );
        }
    }

    #[test]
    fn shift_invariance_above_order_one() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 7919) % 101) as f64 * 0.37).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 1e6).collect();
        let a = k_statistics_values(&xs, 6).unwrap();
        let b = k_statistics_values(&ys, 6).unwrap();
        assert!((b[0] - a[0] - 1e6).abs() < 1e-6);
        for r in 1..6 {
            assert!(
                (a[r] - b[r]).abs() < 1e-6 * (1.0 + a[r].abs()),
                "order {}",
                r + 1
            );
        }
    }

    #[test]
    fn jackknife_matches_naive_leave_one_out() {
        let xs: Vec<f64> = (0..30)
            .map(|i| ((i * 37) % 17) as f64 + 0.1 * i as f64)
            .collect();
        let report = k_statistics(&xs, 4).unwrap();
        let n = xs.len() as f64;
        for r in 0..4 {
            let loo: Vec<f64> = (0..xs.len())
                .map(|i| {
                    let rest: Vec<f64> = xs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, &x)| x)
                        .collect();
                    k_statistics_values(&rest, 4).unwrap()[r]
                })
                .collect();
            let mean = loo.iter().sum::<f64>() / n;
            let se = ((n - 1.0) / n * loo.iter().map(|k| (k - mean).powi(2)).sum::<f64>()).sqrt();
            assert!(
                (report.std_errors[r] - se).abs() < 1e-8 * (1.0 + se),
                "order {}",
                r + 1
            );
        }
    }

    #[test]
    fn poisson_cumulants_are_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pois = Poisson::new(100.0).unwrap();
        let xs: Vec<f64> = (0..10_000).map(|_| pois.sample(&mut rng)).collect();
        let r = k_statistics(&xs, 4).unwrap();
        for i in 0..4 {
            assert!(
                (r.estimates[i] - 100.0).abs() < 5.0 * r.std_errors[i],
                "order {}: {r:?}",
                i + 1
            );
        }
    }

    #[test]
    fn standardization_refused_without_variance() {
        let r = k_statistics(&[2.0; 10], 3).unwrap();
        assert!(r.standardized.iter().all(Option::is_none));
        let r = r.with_envelope(1.0, 10.0);
        assert_eq!(r.verdicts[2], None);
        assert!(r.to_text().contains("verdict"));
    }
}
