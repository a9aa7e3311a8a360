//! Weight laws for `U ≥ 1`.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    ConstantOne,
    /// `U = 1 + X` with `X ~ Exp(rate)`.
    ShiftedExponential {
        rate: f64,
    },
    /// `U ~ X | X > 1` with `X` standard normal.
    TruncatedNormal,
    /// Pareto with scale 1: `P(U > u) = u^{-shape}`. Only finitely many
    /// moments exist, so this family exists for negative controls.
    ShiftedPareto {
        shape: f64,
    },
}

impl WeightSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            WeightSpec::ConstantOne => "constant-one",
            WeightSpec::ShiftedExponential { .. } => "shifted-exponential",
            WeightSpec::TruncatedNormal => "truncated-normal",
            WeightSpec::ShiftedPareto { .. } => "shifted-pareto",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::ShiftedExponential { rate } if !(rate.is_finite() && rate > 0.0) => Err(
                Error::validation("weights.rate", "exponential rate must be positive"),
            ),
            WeightSpec::ShiftedPareto { shape } if !(shape.is_finite() && shape > 0.0) => Err(
                Error::validation("weights.shape", "pareto shape must be positive"),
            ),
            _ => Ok(()),
        }
    }

    pub fn is_check_only(&self) -> bool {
        matches!(self, WeightSpec::ShiftedPareto { .. })
    }

    /// Growth exponent `c_{U,2}` under which the family satisfies the weight
    /// moment condition; `None` when no such exponent exists.
    pub fn default_c2(&self) -> Option<f64> {
        match self {
            WeightSpec::ConstantOne => Some(0.0),
            WeightSpec::ShiftedExponential { .. } => Some(1.0),
            WeightSpec::TruncatedNormal => Some(0.5),
            WeightSpec::ShiftedPareto { .. } => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightSpec::ConstantOne => 1.0,
            WeightSpec::ShiftedExponential { rate } => {
                1.0 + Exp::new(rate).expect("validated rate").sample(rng)
            }
            WeightSpec::TruncatedNormal => sample_normal_tail(rng, 1.0),
            WeightSpec::ShiftedPareto { shape } => {
                let v: f64 = rng.random::<f64>();
                (1.0 - v).powf(-1.0 / shape)
            }
        }
    }
}

/// Standard normal conditioned on `X > a`, `a ≥ 0`.
///
/// Exponential proposal with the optimal rate (Robert, 1995).
fn sample_normal_tail<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    let exp = Exp::new(lambda).unwrap();
    loop {
        let z = a + exp.sample(rng);
        let u: f64 = rng.random::<f64>();
        if u <= (-0.5 * (z - lambda) * (z - lambda)).exp() {
            return z;
        }
    }
}

/// Plain rejection from the full normal; used to cross-check the tail sampler.
#[allow(dead_code)]
fn sample_normal_tail_naive<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z > a {
            return z;
        }
    }
}
