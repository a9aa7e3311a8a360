//! Stationary kernels `K₀` of α-determinantal vertex processes.

use serde::{Deserialize, Serialize};

use super::unit_ball_volume;
use crate::error::{Error, Result};

fn default_field_points() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DppKernelFamily {
    /// `K₀(x) = K₀(o)·exp(-‖x‖²/(2s²))`.
    Gaussian { scale: f64 },
    /// `K₀(x) = K₀(o)·values[i]` for `radii[i-1] ≤ ‖x‖ < radii[i]`, zero beyond
    /// the last radius; `values[0]` must be 1.
    TableIsotropic { radii: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DppKernelSpec {
    /// `0`, `±1` or `±1/m` with `m ≤ 4`.
    pub alpha: f64,
    pub k0_origin: f64,
    pub kernel: DppKernelFamily,
    /// Grid points per kernel scale `s` and dimension for the Gaussian field
    /// of the permanental sampler.
    #[serde(default = "default_field_points")]
    pub field_points_per_scale: usize,
}

/// Sampling strategy implied by α.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaKind {
    Poisson,
    /// α = -1/m
    Determinantal {
        m: u32,
    },
    /// α = +1/m
    Permanental {
        m: u32,
    },
}

impl DppKernelSpec {
    pub fn alpha_kind(&self) -> Result<AlphaKind> {
        classify_alpha(self.alpha)
    }

    #[inline]
    pub fn eval_norm(&self, r: f64) -> f64 {
        match &self.kernel {
            DppKernelFamily::Gaussian { scale } => {
                self.k0_origin * (-r * r / (2.0 * scale * scale)).exp()
            }
            DppKernelFamily::TableIsotropic { radii, values } => {
                let idx = radii.partition_point(|&b| b <= r);
                self.k0_origin * values.get(idx).copied().unwrap_or(0.0)
            }
        }
    }

    /// `K(x, y) = K₀(x - y)` with the Euclidean norm.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.eval_norm(r2.sqrt())
    }

    /// `‖K₀‖₁ = ∫_{ℝ^d} |K₀(x)| dx`.
    pub fn l1_norm(&self, d: usize) -> f64 {
        match &self.kernel {
            DppKernelFamily::Gaussian { scale } => {
                self.k0_origin * (2.0 * std::f64::consts::PI * scale * scale).powf(d as f64 / 2.0)
            }
            DppKernelFamily::TableIsotropic { radii, values } => {
                let b1 = unit_ball_volume(d);
                let mut lo: f64 = 0.0;
                let mut acc = 0.0;
                for (&r, &v) in radii.iter().zip(values) {
                    acc += v.abs() * b1 * (r.powi(d as i32) - lo.powi(d as i32));
                    lo = r;
                }
                self.k0_origin * acc
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        classify_alpha(self.alpha)?;
        if !(0.0..=1.0).contains(&self.k0_origin) {
            return Err(Error::validation(
                "vertex_process.k0_origin",
                "K₀(o) must lie in [0, 1]",
            ));
        }
        if self.field_points_per_scale < 2 {
            return Err(Error::validation(
                "vertex_process.field_points_per_scale",
                "need at least 2 field points per kernel scale",
            ));
        }
        match &self.kernel {
            DppKernelFamily::Gaussian { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::validation(
                        "vertex_process.kernel.scale",
                        "kernel scale must be positive",
                    ));
                }
            }
            DppKernelFamily::TableIsotropic { radii, values } => {
                if radii.is_empty() || radii.len() != values.len() {
                    return Err(Error::validation(
                        "vertex_process.kernel.radii",
                        "table kernel needs equally many radii and values",
                    ));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
                    return Err(Error::validation(
                        "vertex_process.kernel.radii",
                        "radii must be positive and strictly increasing",
                    ));
                }
                if values[0] != 1.0 {
                    return Err(Error::validation(
                        "vertex_process.kernel.values",
                        "first table value must be 1 (K₀(o) carries the scale)",
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
                    return Err(Error::validation(
                        "vertex_process.kernel.values",
                        "table values must lie in [-1, 1]",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Map α onto `{0} ∪ {±1/m : m ≤ 4}`.
pub fn classify_alpha(alpha: f64) -> Result<AlphaKind> {
    if alpha == 0.0 {
        return Ok(AlphaKind::Poisson);
    }
    if alpha.is_finite() {
        let m = (1.0 / alpha.abs()).round();
        if (1.0..=4.0).contains(&m) && (alpha.abs() - 1.0 / m).abs() < 1e-9 {
            let m = m as u32;
            return Ok(if alpha < 0.0 {
                AlphaKind::Determinantal { m }
            } else {
                AlphaKind::Permanental { m }
            });
        }
    }
    Err(Error::validation(
        "vertex_process.alpha",
        format!("alpha = {alpha} is not in {{0, ±1, ±1/2, ±1/3, ±1/4}}"),
    ))
}
