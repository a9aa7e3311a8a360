use serde::{Deserialize, Serialize};

use super::{
    default_mphi_grid, default_mu_grid, fit_condition_constants, variance_lower_bound_edge,
    variance_lower_bound_subgraph, MomentConditionReport, MomentSubject, VarianceBound,
};
use crate::config::{SimulationConfig, VertexProcess};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Subgraph counts over Poisson input.
    #[serde(rename = "SG")]
    Subgraph,
    /// Power-weighted edge length over Poisson input.
    #[serde(rename = "EL")]
    EdgeLength,
    /// Subgraph counts over α-DPP input.
    #[serde(rename = "SG'")]
    SubgraphDpp,
    /// Power-weighted edge length over α-DPP input.
    #[serde(rename = "EL'")]
    EdgeLengthDpp,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Subgraph => "SG",
            Theorem::EdgeLength => "EL",
            Theorem::SubgraphDpp => "SG'",
            Theorem::EdgeLengthDpp => "EL'",
        }
    }

    pub fn parse(s: &str) -> Option<Theorem> {
        match s {
            "SG" => Some(Theorem::Subgraph),
            "EL" => Some(Theorem::EdgeLength),
            "SG'" => Some(Theorem::SubgraphDpp),
            "EL'" => Some(Theorem::EdgeLengthDpp),
            _ => None,
        }
    }

    pub fn is_edge_length(self) -> bool {
        matches!(self, Theorem::EdgeLength | Theorem::EdgeLengthDpp)
    }

    pub fn is_dpp(self) -> bool {
        matches!(self, Theorem::SubgraphDpp | Theorem::EdgeLengthDpp)
    }

    /// The pair matching a vertex process and functional.
    pub fn for_process(process: &VertexProcess, edge_length: bool) -> Theorem {
        match (process.dpp().is_some(), edge_length) {
            (false, false) => Theorem::Subgraph,
            (false, true) => Theorem::EdgeLength,
            (true, false) => Theorem::SubgraphDpp,
            (true, true) => Theorem::EdgeLengthDpp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremInputs {
    /// Pattern size; ignored by the edge-length theorems.
    pub q: usize,
    /// Edge-length exponent; ignored by the subgraph theorems.
    pub tau: f64,
    pub d: usize,
    pub c_u1: f64,
    pub c_u2: f64,
    pub c_phi1: f64,
    pub c_phi2: f64,
    /// `t_n`
    pub intensity: f64,
    /// `ν_n`
    pub volume_scale: f64,
    /// `|W|` or `|W_n|`
    pub volume: f64,
    /// `‖K₀‖₁`; used by the α-DPP theorems only.
    pub k0_l1: f64,
    pub v: f64,
    /// Use `(1 ∨ t^{q-1}ν^{q-1})` in the subgraph variance hypothesis.
    #[serde(default)]
    pub vsg_proof_variant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremParams {
    pub theorem: Theorem,
    /// Cumulant growth exponent `A`.
    pub a: f64,
    pub b: f64,
    pub beta_n: f64,
    pub variance_threshold: f64,
    pub v_used: f64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::precondition(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

fn b_subgraph(q: f64, c_u1: f64, c_u2: f64) -> f64 {
    ((1f64).max(c_u1 * c_u1) * (q - 1.0).powf(c_u2)).powf(q - 1.0)
}

fn b_edge(tau_d: f64, c_u1: f64, c_u2: f64, c_phi1: f64, c_phi2: f64) -> f64 {
    (c_phi1 * tau_d.max(1.0).powf(c_phi2)).powf(tau_d)
        * (c_u1 * (tau_d + 1.0).powf(c_u2)).powf(2.0 * (tau_d + 1.0))
}

/// Exact evaluation of `A`, `b`, `β_n` and the variance hypothesis threshold.
pub fn theorem_params(theorem: Theorem, inputs: &TheoremInputs) -> Result<TheoremParams> {
    let i = inputs;
    for (name, x) in [
        ("c_u1", i.c_u1),
        ("intensity", i.intensity),
        ("volume_scale", i.volume_scale),
        ("volume", i.volume),
        ("v", i.v),
    ] {
        positive(name, x)?;
    }
    if i.d == 0 {
        return Err(Error::precondition("dimension must be positive"));
    }
    if !(i.c_u2 <= 1.0) || !(i.c_phi2 <= 1.0) {
        return Err(Error::precondition("c_u2 and c_phi2 must be at most 1"));
    }
    if theorem.is_edge_length() {
        positive("c_phi1", i.c_phi1)?;
        if !(i.tau >= 0.0) {
            return Err(Error::precondition("tau must be non-negative"));
        }
    } else if i.q < 2 {
        return Err(Error::precondition("pattern needs at least two vertices"));
    }
    if theorem.is_dpp() && !(i.k0_l1 >= 0.0) {
        return Err(Error::precondition("‖K₀‖₁ must be non-negative"));
    }

    let (t, nu, w, v) = (i.intensity, i.volume_scale, i.volume, i.v);
    let q = i.q as f64;
    let tau_d = i.tau / i.d as f64;
    let k_factor = i.k0_l1.max(1.0);
    let spread = |b: f64| b.max(b * b * b / v);

    let (a, b, beta_n, threshold) = match theorem {
        Theorem::Subgraph => {
            let a = (q - 1.0) * (1.0 + i.c_u2);
            let b = b_subgraph(q, i.c_u1, i.c_u2);
            let beta = (v * w * t * (t * nu).min(1.0).powf(q - 1.0)).sqrt()
                / (q.powf(3.0 * q) * spread(b));
            let growth = if i.vsg_proof_variant {
                (t * nu).powf(q - 1.0).max(1.0)
            } else {
                (t * nu).max(1.0).powf(q - 1.0)
            };
            (a, b, beta, v * w * t.powf(q) * nu.powf(q - 1.0) * growth)
        }
        Theorem::EdgeLength => {
            let a = 1.0 + 2.0 * i.c_u2 * (tau_d + 1.0) + i.c_phi2 * tau_d;
            let b = b_edge(tau_d, i.c_u1, i.c_u2, i.c_phi1, i.c_phi2);
            let beta = (v * w * t * (t * nu).min(1.0)).sqrt() / (64.0 * spread(b));
            (
                a,
                b,
                beta,
                v * w * t * t * nu.powf(2.0 * tau_d + 1.0) * (t * nu).max(1.0),
            )
        }
        Theorem::SubgraphDpp => {
            let a = 2.0 * q + (q - 1.0) * i.c_u2 - 1.0;
            let b = k_factor.powf(q - 1.0) * b_subgraph(q, i.c_u1, i.c_u2);
            let beta = (v * w * nu.min(1.0).powf(q - 1.0)).sqrt()
                / ((2.0 * q * q).powf(3.0 * q) * spread(b));
            (
                a,
                b,
                beta,
                v * w * nu.powf(q - 1.0) * nu.powf(q - 1.0).max(1.0),
            )
        }
        Theorem::EdgeLengthDpp => {
            let a = 3.0 + i.c_phi2 * tau_d + 2.0 * i.c_u2 * (tau_d + 1.0);
            let b = k_factor * b_edge(tau_d, i.c_u1, i.c_u2, i.c_phi1, i.c_phi2);
            let beta = (v * w * nu.min(1.0)).sqrt() / (64.0 * spread(b));
            (a, b, beta, v * w * nu.powf(2.0 * tau_d + 1.0) * nu.max(1.0))
        }
    };
    Ok(TheoremParams {
        theorem,
        a,
        b,
        beta_n,
        variance_threshold: threshold,
        v_used: v,
    })
}

/// Theorem parameters with every constant derived from a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedTheoremParams {
    pub params: TheoremParams,
    pub inputs: TheoremInputs,
    pub weight_condition: MomentConditionReport,
    pub profile_condition: Option<MomentConditionReport>,
    pub variance_bound: VarianceBound,
}

/// Fit the moment constants, evaluate the variance lower bound and turn it
/// into the `v` of the theorem's variance hypothesis at this configuration.
///
/// The Poisson theorems state their hypothesis as `v·shape(t, ν)`, while the
/// variance bound is expressed as `v'·shape'(ν)`; `v` is chosen so that both
/// sides agree at the configured `(t, ν)`.
pub fn derive_theorem_params(
    config: &SimulationConfig,
    theorem: Theorem,
) -> Result<DerivedTheoremParams> {
    if theorem.is_dpp() != config.vertex_process.dpp().is_some() {
        return Err(Error::precondition(format!(
            "theorem {} does not apply to a {} vertex process",
            theorem.name(),
            config.vertex_process.label()
        )));
    }
    let c_u2 = match config.bounds.c_u2.or_else(|| config.weights.default_c2()) {
        Some(c) => c,
        None => {
            return Err(Error::precondition(format!(
                "weight family {} satisfies no moment growth condition",
                config.weights.family_name()
            )))
        }
    };
    let weight_condition = fit_condition_constants(
        MomentSubject::Weights(&config.weights),
        c_u2,
        &default_mu_grid(),
    )?;
    if !weight_condition.pass {
        return Err(Error::precondition(format!(
            "weights fail the moment condition at c2={c_u2} (failing x: {:?})",
            weight_condition.failing_x
        )));
    }
    let c_phi2 = config
        .bounds
        .c_phi2
        .unwrap_or_else(|| config.profile.default_c2());
    let profile_condition = if theorem.is_edge_length() {
        let r = fit_condition_constants(
            MomentSubject::Profile(&config.profile),
            c_phi2,
            &default_mphi_grid(),
        )?;
        if !r.pass {
            return Err(Error::precondition(format!(
                "profile fails the moment condition at c2={c_phi2}"
            )));
        }
        Some(r)
    } else {
        None
    };

    let variance_bound = if theorem.is_edge_length() {
        variance_lower_bound_edge(config, config.bounds.epsilon)?
    } else {
        variance_lower_bound_subgraph(config, config.bounds.epsilon)?
    };

    let mut inputs = TheoremInputs {
        q: config.pattern.q(),
        tau: config.tau,
        d: config.dim(),
        c_u1: weight_condition.c1_fitted,
        c_u2,
        c_phi1: profile_condition.as_ref().map_or(1.0, |r| r.c1_fitted),
        c_phi2,
        intensity: config.intensity,
        volume_scale: config.volume_scale,
        volume: config.volume,
        k0_l1: config
            .vertex_process
            .dpp()
            .map_or(0.0, |k| k.l1_norm(config.dim())),
        v: 1.0,
        vsg_proof_variant: config.bounds.vsg_proof_variant,
    };
    // threshold is linear in v
    let unit = theorem_params(theorem, &inputs)?.variance_threshold;
    inputs.v = variance_bound.threshold / unit;
    let params = theorem_params(theorem, &inputs)?;
    Ok(DerivedTheoremParams {
        params,
        inputs,
        weight_condition,
        profile_condition,
        variance_bound,
    })
}
