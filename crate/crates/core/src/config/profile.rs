//! Profile functions φ: non-increasing maps `[0, ∞) → [0, 1]` with unit integral.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `φ(t) = exp(-π t² / 4)`; the π/4 factor gives unit integral with `φ(0) = 1`.
const GAUSS_RATE: f64 = std::f64::consts::PI / 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `φ = 1` on `[0, 1]`.
    Indicator,
    /// `φ(t) = e^{-t}`.
    Exponential,
    /// `φ(t) = e^{-π t²/4}`.
    GaussianTail,
    /// Step function: `values[i]` on `[breaks[i-1], breaks[i])` with an
    /// implicit `breaks[-1] = 0`, zero after the last break. Rescaled in `t`
    /// at load so that the integral is one.
    Table { breaks: Vec<f64>, values: Vec<f64> },
}

impl ProfileSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ProfileSpec::Indicator => "indicator",
            ProfileSpec::Exponential => "exponential",
            ProfileSpec::GaussianTail => "gaussian-tail",
            ProfileSpec::Table { .. } => "table",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ProfileSpec::Table { breaks, values } = self {
            if breaks.is_empty() || breaks.len() != values.len() {
                return Err(Error::validation(
                    "profile.breaks",
                    "table profile needs equally many breaks and values (at least one)",
                ));
            }
            let mut prev = 0.0;
            for &b in breaks {
                if !(b.is_finite() && b > prev) {
                    return Err(Error::validation(
                        "profile.breaks",
                        "breaks must be finite, positive and strictly increasing",
                    ));
                }
                prev = b;
            }
            let mut prev_v = f64::INFINITY;
            for &v in values {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::validation(
                        "profile.values",
                        "profile values must lie in [0, 1] (φ maps into [0,1])",
                    ));
                }
                if v > prev_v {
                    return Err(Error::validation(
                        "profile.values",
                        "profile must be non-increasing",
                    ));
                }
                prev_v = v;
            }
            if self.raw_integral() <= 0.0 {
                return Err(Error::validation(
                    "profile.values",
                    "profile integral must be positive to be normalized",
                ));
            }
        }
        Ok(())
    }

    fn raw_integral(&self) -> f64 {
        match self {
            ProfileSpec::Table { breaks, values } => {
                let mut lo = 0.0;
                let mut acc = 0.0;
                for (&b, &v) in breaks.iter().zip(values) {
                    acc += v * (b - lo);
                    lo = b;
                }
                acc
            }
            _ => 1.0,
        }
    }

    /// Rescale a table profile along `t` so that `∫φ = 1`.
    pub fn normalized(self) -> Self {
        match self {
            ProfileSpec::Table { breaks, values } => {
                let integral = ProfileSpec::Table {
                    breaks: breaks.clone(),
                    values: values.clone(),
                }
                .raw_integral();
                if (integral - 1.0).abs() < 1e-12 {
                    ProfileSpec::Table { breaks, values }
                } else {
                    ProfileSpec::Table {
                        breaks: breaks.iter().map(|b| b / integral).collect(),
                        values,
                    }
                }
            }
            other => other,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ProfileSpec::Indicator => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ProfileSpec::Exponential => (-t).exp(),
            ProfileSpec::GaussianTail => (-GAUSS_RATE * t * t).exp(),
            ProfileSpec::Table { breaks, values } => {
                // first break strictly greater than t
                let idx = breaks.partition_point(|&b| b <= t);
                values.get(idx).copied().unwrap_or(0.0)
            }
        }
    }

    /// Right end of the support, if bounded.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            ProfileSpec::Indicator => Some(1.0),
            ProfileSpec::Table { breaks, values } => {
                let last_pos = values.iter().rposition(|&v| v > 0.0)?;
                Some(breaks[last_pos])
            }
            _ => None,
        }
    }

    /// `inf { t ≥ 0 : φ(s) ≤ eps for all s > t }`.
    pub fn tail_cutoff(&self, eps: f64) -> f64 {
        if eps >= 1.0 {
            return 0.0;
        }
        match self {
            ProfileSpec::Indicator => 1.0,
            ProfileSpec::Exponential => (-eps.ln()).max(0.0),
            ProfileSpec::GaussianTail => (-eps.ln() / GAUSS_RATE).max(0.0).sqrt(),
            ProfileSpec::Table { breaks, values } => match values.iter().position(|&v| v <= eps) {
                Some(0) => 0.0,
                Some(i) => breaks[i - 1],
                None => *breaks.last().unwrap(),
            },
        }
    }

    /// `M_φ(x) = ∫_0^∞ φ(t) t^x dt`, closed form for every family.
    pub fn moment(&self, x: f64) -> f64 {
        use statrs::function::gamma::gamma;
        match self {
            ProfileSpec::Indicator => 1.0 / (1.0 + x),
            ProfileSpec::Exponential => gamma(1.0 + x),
            ProfileSpec::GaussianTail => {
                let p = 0.5 * (x + 1.0);
                gamma(p) / (2.0 * GAUSS_RATE.powf(p))
            }
            ProfileSpec::Table { breaks, values } => {
                let mut lo: f64 = 0.0;
                let mut acc = 0.0;
                for (&b, &v) in breaks.iter().zip(values) {
                    acc += v * (b.powf(x + 1.0) - lo.powf(x + 1.0)) / (x + 1.0);
                    lo = b;
                }
                acc
            }
        }
    }

    /// `M'_φ(x) = sup_{t>0} φ(t) t^x`.
    pub fn sup_moment(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.eval(0.0);
        }
        match self {
            ProfileSpec::Indicator => 1.0,
            ProfileSpec::Exponential => (x * x.ln() - x).exp(),
            ProfileSpec::GaussianTail => {
                let t = (x / (2.0 * GAUSS_RATE)).sqrt();
                (x * t.ln() - GAUSS_RATE * t * t).exp()
            }
            // On each step the sup is approached at the right end.
            ProfileSpec::Table { breaks, values } => breaks
                .iter()
                .zip(values)
                .map(|(&b, &v)| v * b.powf(x))
                .fold(0.0, f64::max),
        }
    }

    /// Draw `s` with density `φ(s)` on `[0, ∞)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ProfileSpec::Indicator => rng.random::<f64>(),
            ProfileSpec::Exponential => Exp1.sample(rng),
            ProfileSpec::GaussianTail => {
                let z: f64 = StandardNormal.sample(rng);
                z.abs() * (2.0 / std::f64::consts::PI).sqrt()
            }
            ProfileSpec::Table { breaks, values } => {
                let u: f64 = rng.random::<f64>();
                let mut lo = 0.0;
                let mut acc = 0.0;
                for (&b, &v) in breaks.iter().zip(values) {
                    let mass = v * (b - lo);
                    if u < acc + mass && mass > 0.0 {
                        return lo + (u - acc) / v;
                    }
                    acc += mass;
                    lo = b;
                }
                lo
            }
        }
    }

    /// Largest `ε` with `φ(ε) ≥ φ(0)/2`.
    pub fn default_epsilon(&self) -> f64 {
        match self {
            ProfileSpec::Indicator => 1.0,
            ProfileSpec::Exponential => std::f64::consts::LN_2,
            ProfileSpec::GaussianTail => (std::f64::consts::LN_2 / GAUSS_RATE).sqrt(),
            ProfileSpec::Table { breaks, values } => {
                let half = 0.5 * values[0];
                let idx = values.iter().rposition(|&v| v >= half).unwrap_or(0);
                // largest point inside the step (steps are half-open)
                breaks[idx] * (1.0 - 1e-12)
            }
        }
    }

    /// Growth exponent `c_{φ,2}` for which the built-in family satisfies the
    /// moment condition.
    pub fn default_c2(&self) -> f64 {
        match self {
            ProfileSpec::Indicator | ProfileSpec::Table { .. } => 0.0,
            ProfileSpec::Exponential => 1.0,
            ProfileSpec::GaussianTail => 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn builtins() -> Vec<ProfileSpec> {
        vec![
            ProfileSpec::Indicator,
            ProfileSpec::Exponential,
            ProfileSpec::GaussianTail,
            ProfileSpec::Table {
                breaks: vec![0.5, 1.0, 3.0],
                values: vec![1.0, 0.5, 0.25],
            }
            .normalized(),
        ]
    }

    #[test]
    fn profiles_integrate_to_one() {
        for p in builtins() {
            // tail beyond t_max is below 1e-9 analytically
            let t_max = match p {
                ProfileSpec::Exponential => 21.0 * std::f64::consts::LN_10,
                ProfileSpec::GaussianTail => 6.0,
                _ => p.support_end().unwrap(),
            };
            let mut knots = vec![0.0];
            if let ProfileSpec::Table { breaks, .. } = &p {
                knots.extend(breaks.iter().copied());
            } else {
                knots.push(t_max);
            }
            let total: f64 = knots
                .windows(2)
                .map(|w| integrate(|t| p.eval(t), w[0], w[1], 1e-12, 1e-14))
                .sum();
            assert!((total - 1.0).abs() < 1e-6, "{p:?}: {total}");
        }
    }

    #[test]
    fn profiles_are_monotone_and_bounded() {
        for p in builtins() {
            let mut prev = f64::INFINITY;
            for k in 0..2000 {
                let v = p.eval(k as f64 * 0.005);
                assert!((0.0..=1.0).contains(&v));
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn table_renormalization_rescales_breaks() {
        let p = ProfileSpec::Table {
            breaks: vec![1.0, 2.0],
            values: vec![1.0, 1.0],
        }
        .normalized();
        assert_eq!(
            p,
            ProfileSpec::Table {
                breaks: vec![0.5, 1.0],
                values: vec![1.0, 1.0]
            }
        );
        assert_eq!(p.clone().normalized(), p);
    }

    #[test]
    fn tail_cutoff_matches_profile() {
        let eps = 1e-6;
        for p in builtins() {
            let t = p.tail_cutoff(eps);
            assert!(
                p.eval(t * (1.0 + 1e-9) + 1e-12) <= eps * (1.0 + 1e-6),
                "{p:?}"
            );
            if t > 0.0 {
                assert!(p.eval(t * (1.0 - 1e-6)) >= eps * (1.0 - 1e-6), "{p:?}");
            }
        }
        assert_eq!(ProfileSpec::Exponential.tail_cutoff((-10.0f64).exp()), 10.0);
    }

    #[test]
    fn moments_match_quadrature() {
        for p in builtins() {
            for &x in &[0.0, 0.5, 1.0, 2.5, 7.0] {
                let t_max = p.support_end().unwrap_or(60.0);
                let q = integrate(|t| p.eval(t) * t.powf(x), 0.0, t_max, 1e-12, 1e-14);
                let exact = p.moment(x);
                assert!(
                    (q - exact).abs() <= 1e-7 * exact.max(1.0),
                    "{p:?} x={x}: {q} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn sampler_matches_profile_density() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for p in builtins() {
            let n = 100_000;
            let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
            let sd = (p.moment(2.0) - p.moment(1.0).powi(2)).sqrt();
            assert!(
                (mean - p.moment(1.0)).abs() < 4.0 * sd / (n as f64).sqrt(),
                "{p:?}"
            );
        }
    }
}
