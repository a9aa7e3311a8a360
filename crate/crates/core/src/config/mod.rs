//! Experiment description.
//!
//! A config file is TOML with one table per model ingredient:
//!
//! ```toml
//! spec_version = 1
//!
//! [window]
//! sides = [1.0, 1.0]
//! boundary = "torus"          # or "hard"
//!
//! [model]
//! intensity = 200.0           # t_n; omitted for alpha-dpp (then t_n = K₀(o))
//! volume_scale = 0.02         # ν_n
//! tau = 1.0
//! truncation_epsilon = 1e-12
//!
//! [profile]
//! family = "indicator"        # exponential | gaussian-tail | table
//!
//! [kernel]
//! family = "unit"             # product | min (cap) | power (gamma)
//!
//! [weights]
//! family = "constant-one"     # shifted-exponential (rate) | truncated-normal | shifted-pareto (shape)
//!
//! [vertex_process]
//! kind = "poisson"            # or "alpha-dpp" with alpha, k0_origin and a [vertex_process.kernel] table
//!
//! [pattern]
//! q = 2
//! edges = [[1, 2]]
//!
//! [run]
//! master_seed = 42
//! replications = 1000
//! ```
//!
//! An optional `[bounds]` table overrides ε and the moment-condition
//! exponents used by the verification suites, and the intensity sweep of the
//! scaling suite (`sweep_product`, `sweep_replications`).

mod dpp;
mod kernel;
mod profile;
mod weights;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dpp::{classify_alpha, AlphaKind, DppKernelFamily, DppKernelSpec};
pub use kernel::{
    check_kernel_grid, default_grid, validate_kernel_grid, KernelGridReport, KernelSpec,
};
pub use profile::ProfileSpec;
pub use weights::WeightSpec;

use crate::error::{Error, Result};
use crate::functionals::PatternGraph;

pub const SPEC_VERSION: u32 = 1;

/// `|B_1| = π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
}

/// `|B_r|` in dimension `d`.
#[inline]
pub fn ball_volume(r: f64, d: usize) -> f64 {
    unit_ball_volume(d) * r.powi(d as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Hard,
    Torus,
}

/// Axis-aligned box `∏ [0, sides[i]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub sides: Vec<f64>,
    pub boundary: Boundary,
}

impl WindowSpec {
    pub fn new(sides: Vec<f64>, boundary: Boundary) -> Self {
        WindowSpec { sides, boundary }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn is_torus(&self) -> bool {
        self.boundary == Boundary::Torus
    }

    /// Displacement `x - y`, reduced to the minimum image on the torus.
    #[inline]
    pub fn displacement(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            let mut dx = x[i] - y[i];
            if self.boundary == Boundary::Torus {
                let l = self.sides[i];
                dx -= l * (dx / l).round();
            }
            out[i] = dx;
        }
    }

    /// Distance in the window metric.
    #[inline]
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..x.len() {
            let mut dx = (x[i] - y[i]).abs();
            if self.boundary == Boundary::Torus {
                let l = self.sides[i];
                dx %= l;
                dx = dx.min(l - dx);
            }
            acc += dx * dx;
        }
        acc.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sides.is_empty() {
            return Err(Error::validation(
                "window.sides",
                "dimension must be at least 1",
            ));
        }
        if self.sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::validation(
                "window.sides",
                "side lengths must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VertexProcess {
    Poisson,
    AlphaDpp(DppKernelSpec),
}

impl VertexProcess {
    pub fn label(&self) -> &'static str {
        match self {
            VertexProcess::Poisson => "poisson",
            VertexProcess::AlphaDpp(_) => "alpha-dpp",
        }
    }

    /// `K₀(o)` for α-DPPs; `None` for Poisson.
    pub fn dpp(&self) -> Option<&DppKernelSpec> {
        match self {
            VertexProcess::Poisson => None,
            VertexProcess::AlphaDpp(k) => Some(k),
        }
    }
}

/// Settings for the bounds and verification suites.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSettings {
    /// ε of the variance lower bounds; defaults to the profile's half-height point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_u2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_phi2: Option<f64>,
    /// Use `(1 ∨ t^{q-1}ν^{q-1})` in the subgraph variance hypothesis.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vsg_proof_variant: bool,
    /// `t·ν` held fixed along the intensity sweep of the scaling suite;
    /// defaults to the configured product.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_product: Option<f64>,
    /// Replications per sweep point; defaults to `run.replications`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_replications: Option<usize>,
}

// ---- file layout -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intensity: Option<f64>,
    volume_scale: f64,
    #[serde(default)]
    tau: f64,
    #[serde(default = "default_truncation_epsilon")]
    truncation_epsilon: f64,
}

fn default_truncation_epsilon() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternSection {
    q: usize,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    master_seed: u64,
    replications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    spec_version: u32,
    window: WindowSpec,
    model: ModelSection,
    profile: ProfileSpec,
    kernel: KernelSpec,
    weights: WeightSpec,
    vertex_process: VertexProcess,
    pattern: PatternSection,
    run: RunSection,
    #[serde(default, skip_serializing_if = "is_default_bounds")]
    bounds: BoundsSettings,
}

fn is_default_bounds(b: &BoundsSettings) -> bool {
    *b == BoundsSettings::default()
}

// ---- validated config ------------------------------------------------------

/// A validated experiment for one fixed `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub window: WindowSpec,
    /// `t_n`; equals `K₀(o)` for α-DPP vertex processes.
    pub intensity: f64,
    /// `ν_n`
    pub volume_scale: f64,
    pub profile: ProfileSpec,
    pub kernel: KernelSpec,
    pub weights: WeightSpec,
    pub vertex_process: VertexProcess,
    pub pattern: PatternGraph,
    pub tau: f64,
    pub master_seed: u64,
    pub replications: usize,
    pub truncation_epsilon: f64,
    pub bounds: BoundsSettings,
    /// `τ_d = τ / d`
    pub tau_d: f64,
    /// `|W|`
    pub volume: f64,
}

impl SimulationConfig {
    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Recompute derived fields and validate every invariant.
    pub fn finalize(mut self) -> Result<Self> {
        self.window.validate()?;
        self.profile.validate()?;
        self.profile = self.profile.normalized();
        self.kernel.validate()?;
        self.weights.validate()?;
        self.volume = self.window.volume();
        self.tau_d = self.tau / self.window.dim() as f64;

        if let VertexProcess::AlphaDpp(k) = &self.vertex_process {
            k.validate()?;
        }
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(Error::validation(
                "model.intensity",
                "intensity must be non-negative",
            ));
        }
        if !(self.volume_scale.is_finite() && self.volume_scale > 0.0) {
            return Err(Error::validation(
                "model.volume_scale",
                "volume_scale must be positive",
            ));
        }
        if self.volume_scale > self.volume {
            return Err(Error::validation(
                "model.volume_scale",
                "volume_scale exceeds window volume",
            ));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::validation("model.tau", "tau must be non-negative"));
        }
        if !(self.truncation_epsilon > 0.0 && self.truncation_epsilon <= 1e-6) {
            return Err(Error::validation(
                "model.truncation_epsilon",
                "truncation_epsilon must lie in (0, 1e-6]",
            ));
        }
        if self.replications == 0 {
            return Err(Error::validation(
                "run.replications",
                "replications must be positive",
            ));
        }
        if let Some(e) = self.bounds.epsilon {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::validation(
                    "bounds.epsilon",
                    "epsilon must be positive",
                ));
            }
        }
        for (name, c) in [
            ("bounds.c_u2", self.bounds.c_u2),
            ("bounds.c_phi2", self.bounds.c_phi2),
        ] {
            if let Some(c) = c {
                if !(c.is_finite() && c <= 1.0) {
                    return Err(Error::validation(name, "moment exponent c2 must be ≤ 1"));
                }
            }
        }
        if let Some(p) = self.bounds.sweep_product {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::validation(
                    "bounds.sweep_product",
                    "sweep product must be positive",
                ));
            }
        }
        if self.bounds.sweep_replications.is_some_and(|n| n < 2) {
            return Err(Error::validation(
                "bounds.sweep_replications",
                "need at least 2 replications per sweep point",
            ));
        }
        Ok(self)
    }

    fn from_file(f: ConfigFile) -> Result<Self> {
        if f.spec_version != SPEC_VERSION {
            return Err(Error::validation(
                "spec_version",
                format!(
                    "unsupported spec_version {} (expected {SPEC_VERSION})",
                    f.spec_version
                ),
            ));
        }
        let intensity = match (&f.vertex_process, f.model.intensity) {
            (VertexProcess::Poisson, Some(t)) => t,
            (VertexProcess::Poisson, None) => {
                return Err(Error::validation(
                    "model.intensity",
                    "intensity is required for a Poisson vertex process",
                ))
            }
            (VertexProcess::AlphaDpp(k), given) => {
                if let Some(t) = given {
                    if (t - k.k0_origin).abs() > 1e-12 {
                        return Err(Error::validation(
                            "model.intensity",
                            "an alpha-dpp has intensity K₀(o); omit intensity or set it to k0_origin",
                        ));
                    }
                }
                k.k0_origin
            }
        };
        let edges: Vec<(usize, usize)> = f
            .pattern
            .edges
            .iter()
            .map(|&[a, b]| {
                if a == 0 || b == 0 {
                    Err(Error::validation(
                        "pattern.edges",
                        "pattern vertices are numbered from 1",
                    ))
                } else {
                    Ok((a - 1, b - 1))
                }
            })
            .collect::<Result<_>>()?;
        let pattern = PatternGraph::new(f.pattern.q, &edges)?;
        SimulationConfig {
            window: f.window,
            intensity,
            volume_scale: f.model.volume_scale,
            profile: f.profile,
            kernel: f.kernel,
            weights: f.weights,
            vertex_process: f.vertex_process,
            pattern,
            tau: f.model.tau,
            master_seed: f.run.master_seed,
            replications: f.run.replications,
            truncation_epsilon: f.model.truncation_epsilon,
            bounds: f.bounds,
            tau_d: 0.0,
            volume: 0.0,
        }
        .finalize()
    }

    fn to_file(&self) -> ConfigFile {
        ConfigFile {
            spec_version: SPEC_VERSION,
            window: self.window.clone(),
            model: ModelSection {
                intensity: match self.vertex_process {
                    VertexProcess::Poisson => Some(self.intensity),
                    VertexProcess::AlphaDpp(_) => None,
                },
                volume_scale: self.volume_scale,
                tau: self.tau,
                truncation_epsilon: self.truncation_epsilon,
            },
            profile: self.profile.clone(),
            kernel: self.kernel.clone(),
            weights: self.weights.clone(),
            vertex_process: self.vertex_process.clone(),
            pattern: PatternSection {
                q: self.pattern.q(),
                edges: self
                    .pattern
                    .edges()
                    .iter()
                    .map(|&(a, b)| [a + 1, b + 1])
                    .collect(),
            },
            run: RunSection {
                master_seed: self.master_seed,
                replications: self.replications,
            },
            bounds: self.bounds.clone(),
        }
    }

    /// TOML text that [`parse_config`] maps back to an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("config serializes")
    }
}

pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    SimulationConfig::from_file(file)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_config(&text)
}
