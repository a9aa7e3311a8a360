//! Interaction kernels κ(u, v) between vertex weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelSpec {
    /// κ ≡ 1
    Unit,
    /// κ(u,v) = uv
    Product,
    /// κ(u,v) = min(uv, cap)
    Min { cap: f64 },
    /// κ(u,v) = (uv)^γ with 0 ≤ γ ≤ 1
    Power { gamma: f64 },
}

impl KernelSpec {
    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match *self {
            KernelSpec::Unit => 1.0,
            KernelSpec::Product => u * v,
            KernelSpec::Min { cap } => (u * v).min(cap),
            KernelSpec::Power { gamma } => (u * v).powf(gamma),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::Unit => "unit",
            KernelSpec::Product => "product",
            KernelSpec::Min { .. } => "min",
            KernelSpec::Power { .. } => "power",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Min { cap } if !(cap.is_finite() && cap >= 1.0) => {
                return Err(Error::validation(
                    "kernel.cap",
                    "min kernel cap must be >= 1 so that κ >= 1",
                ))
            }
            KernelSpec::Power { gamma } if !(0.0..=1.0).contains(&gamma) => {
                return Err(Error::validation(
                    "kernel.gamma",
                    "power kernel exponent must lie in [0, 1] so that κ <= uv",
                ))
            }
            _ => {}
        }
        let report = validate_kernel_grid(self, &default_grid());
        match report.violation {
            None => Ok(()),
            Some(msg) => Err(Error::validation("kernel", msg)),
        }
    }
}

/// Outcome of checking `1 ≤ κ ≤ uv` and monotonicity on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelGridReport {
    pub pass: bool,
    pub violation: Option<String>,
    pub values: Vec<((f64, f64), f64)>,
}

/// Weight pairs used when validating a configured kernel.
pub fn default_grid() -> Vec<(f64, f64)> {
    let axis = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 100.0];
    axis.iter()
        .flat_map(|&u| axis.iter().map(move |&v| (u, v)))
        .collect()
}

pub fn validate_kernel_grid(spec: &KernelSpec, grid: &[(f64, f64)]) -> KernelGridReport {
    check_kernel_grid(|u, v| spec.eval(u, v), grid)
}

/// Reports the first pair violating `1 ≤ κ(u,v) ≤ uv`, then the first pair of
/// grid points violating coordinate-wise monotonicity.
pub fn check_kernel_grid<F: Fn(f64, f64) -> f64>(
    kappa: F,
    grid: &[(f64, f64)],
) -> KernelGridReport {
    let values: Vec<((f64, f64), f64)> = grid.iter().map(|&(u, v)| ((u, v), kappa(u, v))).collect();
    let fail = |msg: String, values| KernelGridReport {
        pass: false,
        violation: Some(msg),
        values,
    };
    for &((u, v), k) in &values {
        if u < 1.0 || v < 1.0 {
            return fail(format!("grid point ({u},{v}) has a weight below 1"), values);
        }
        if !(k >= 1.0) {
            return fail(format!("κ < 1 at ({u},{v})"), values);
        }
        if k > u * v * (1.0 + 1e-12) {
            return fail(format!("κ > uv at ({u},{v})"), values);
        }
    }
    for &((u1, v1), k1) in &values {
        for &((u2, v2), k2) in &values {
            if u1 <= u2 && v1 <= v2 && k1 > k2 * (1.0 + 1e-12) {
                return fail(
                    format!("κ not non-decreasing between ({u1},{v1}) and ({u2},{v2})"),
                    values,
                );
            }
        }
    }
    KernelGridReport {
        pass: true,
        violation: None,
        values,
    }
}
