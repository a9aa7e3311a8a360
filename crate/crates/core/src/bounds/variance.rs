use serde::Serialize;

use crate::config::{unit_ball_volume, ProfileSpec, SimulationConfig, WindowSpec};
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// `|W^{-a}|/|W|`: the fraction of the window whose volume-`a` ball stays
/// inside. A torus has no boundary, so the ratio is one.
pub fn eroded_window_ratio(window: &WindowSpec, a: f64) -> f64 {
    if window.is_torus() {
        return 1.0;
    }
    let d = window.dim();
    let r = (a / unit_ball_volume(d)).powf(1.0 / d as f64);
    window
        .sides
        .iter()
        .map(|&s| ((s - 2.0 * r) / s).max(0.0))
        .product()
}

/// `∫_0^ε t^x φ(t) dt` by quadrature, split at the profile's steps.
pub fn profile_partial_moment(profile: &ProfileSpec, x: f64, eps: f64) -> f64 {
    let mut cuts = vec![0.0];
    match profile {
        ProfileSpec::Indicator => cuts.push(1.0),
        ProfileSpec::Table { breaks, .. } => cuts.extend(breaks.iter().copied()),
        _ => {}
    }
    cuts.retain(|&c| c < eps);
    cuts.push(eps);
    cuts.windows(2)
        .map(|w| {
            // evaluate inside the piece so the right-open steps are respected
            let (a, b) = (w[0], w[1]);
            let mid = |t: f64| {
                if t >= b {
                    profile.eval(b - (b - a) * 1e-15)
                } else {
                    profile.eval(t)
                }
            };
            integrate(|t| t.powf(x) * mid(t), a, b, 1e-12, 1e-300)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceBound {
    pub v: f64,
    /// The lower bound on the variance implied by `v`.
    pub threshold: f64,
    pub epsilon: f64,
    pub eroded_ratio: f64,
    /// `K₀(o)`, the intensity of the vertex process.
    pub k0_origin: f64,
}

/// `v` for the power-weighted edge length with exponent `τ_d·d`:
/// `ratio · |B_1|^{-2τ_d} K₀² I (1 ∧ 2K₀ I)` with `I = ∫_0^ε t^{2τ_d+1} φ(t) dt`.
pub fn edge_variance_constant(
    profile: &ProfileSpec,
    tau_d: f64,
    d: usize,
    k0: f64,
    eps: f64,
    ratio: f64,
) -> f64 {
    let i = profile_partial_moment(profile, 2.0 * tau_d + 1.0, eps);
    ratio * unit_ball_volume(d).powf(-2.0 * tau_d) * k0 * k0 * i * (2.0 * k0 * i).min(1.0)
}

/// `v` for the subgraph count on `q` vertices:
/// `ratio · φ(ε)^{2·C(q,2)} K₀ (εK₀/2^d)^{q-1} (1 ∧ q(εK₀/2^d)^{q-1})`.
pub fn subgraph_variance_constant(
    profile: &ProfileSpec,
    q: usize,
    d: usize,
    k0: f64,
    eps: f64,
    ratio: f64,
) -> f64 {
    let p = profile.eval(eps);
    let pairs = (q * (q - 1) / 2) as f64;
    let r = (eps * k0 / 2f64.powi(d as i32)).powi(q as i32 - 1);
    ratio * p.powf(2.0 * pairs) * k0 * r * (q as f64 * r).min(1.0)
}

fn setup(config: &SimulationConfig, eps: Option<f64>) -> Result<(f64, f64)> {
    if let Some(k) = config.vertex_process.dpp() {
        if k.alpha < 0.0 {
            return Err(Error::precondition("variance lower bounds need α ≥ 0"));
        }
    }
    let eps = eps.unwrap_or_else(|| config.profile.default_epsilon());
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::validation("bounds.epsilon", "must be positive"));
    }
    if config.profile.eval(eps) <= 0.0 {
        return Err(Error::validation("bounds.epsilon", "profile vanishes at ε"));
    }
    // for α-DPP input the intensity already equals K₀(o)
    Ok((eps, config.intensity))
}

/// Lower bound `v|W|ν^{2τ_d+1}(1 ∨ ν)` on the variance of the power-weighted
/// edge length.
pub fn variance_lower_bound_edge(
    config: &SimulationConfig,
    eps: Option<f64>,
) -> Result<VarianceBound> {
    let (eps, k0) = setup(config, eps)?;
    let nu = config.volume_scale;
    let ratio = eroded_window_ratio(&config.window, eps * nu);
    let v = edge_variance_constant(&config.profile, config.tau_d, config.dim(), k0, eps, ratio);
    Ok(VarianceBound {
        v,
        threshold: v * config.volume * nu.powf(2.0 * config.tau_d + 1.0) * nu.max(1.0),
        epsilon: eps,
        eroded_ratio: ratio,
        k0_origin: k0,
    })
}

/// Lower bound `v|W|ν^{q-1}(1 ∨ ν^{q-1})` on the variance of the subgraph count.
pub fn variance_lower_bound_subgraph(
    config: &SimulationConfig,
    eps: Option<f64>,
) -> Result<VarianceBound> {
    let (eps, k0) = setup(config, eps)?;
    let nu = config.volume_scale;
    let d = config.dim();
    let q = config.pattern.q();
    let ratio = eroded_window_ratio(&config.window, eps * nu / 2f64.powi(d as i32));
    let v = subgraph_variance_constant(&config.profile, q, d, k0, eps, ratio);
    let g = nu.powi(q as i32 - 1);
    Ok(VarianceBound {
        v,
        threshold: v * config.volume * g * g.max(1.0),
        epsilon: eps,
        eroded_ratio: ratio,
        k0_origin: k0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Boundary;
    use statrs::function::gamma::{gamma, gamma_lr};

    #[test]
    fn partial_moments_match_closed_forms() {
        for (x, eps) in [(1.0, 0.5), (1.0, 2.0), (3.0, 1.3), (0.5, 0.2)] {
            let ind = profile_partial_moment(&ProfileSpec::Indicator, x, eps);
            assert!((ind - eps.min(1.0).powf(x + 1.0) / (x + 1.0)).abs() < 1e-13);
            let exp = profile_partial_moment(&ProfileSpec::Exponential, x, eps);
            let want = gamma_lr(x + 1.0, eps) * gamma(x + 1.0);
            assert!((exp / want - 1.0).abs() < 1e-10);
            let a = std::f64::consts::PI / 4.0;
            let gt = profile_partial_moment(&ProfileSpec::GaussianTail, x, eps);
            let p = 0.5 * (x + 1.0);
            let want = gamma_lr(p, a * eps * eps) * gamma(p) / (2.0 * a.powf(p));
            assert!((gt / want - 1.0).abs() < 1e-10);
        }
        let table = ProfileSpec::Table {
            breaks: vec![0.5, 1.5],
            values: vec![1.0, 0.5],
        };
        // ∫_0^1 t φ = 0.125 + 0.5·(1 - 0.25)/2
        assert!((profile_partial_moment(&table, 1.0, 1.0) - 0.3125).abs() < 1e-13);
    }

    #[test]
    fn worked_examples() {
        // indicator, τ=0, K₀=1, ε=1: ratio·½·(1 ∧ 1)
        let v = edge_variance_constant(&ProfileSpec::Indicator, 0.0, 2, 1.0, 1.0, 0.8);
        assert!((v - 0.4).abs() < 1e-14);
        assert_eq!(
            edge_variance_constant(&ProfileSpec::Indicator, 0.0, 2, 0.0, 1.0, 1.0),
            0.0
        );
        // q=2, d=2: ratio·1·(1/4)·(1 ∧ 1/2)
        let v = subgraph_variance_constant(&ProfileSpec::Indicator, 2, 2, 1.0, 1.0, 0.8);
        assert!((v - 0.1).abs() < 1e-15);
    }

    #[test]
    fn eroded_ratio_is_monotone() {
        let w = WindowSpec::new(vec![2.0, 3.0], Boundary::Hard);
        let a = std::f64::consts::PI * 0.25;
        // radius 0.5
        assert!((eroded_window_ratio(&w, a) - (1.0 / 2.0) * (2.0 / 3.0)).abs() < 1e-14);
        let mut last = 1.0;
        for a in [0.01, 0.1, 0.5, 1.0, 3.0] {
            let r = eroded_window_ratio(&w, a);
            assert!(r < last);
            last = r;
        }
        assert_eq!(eroded_window_ratio(&w, 100.0), 0.0);
        let t = WindowSpec::new(vec![2.0, 3.0], Boundary::Torus);
        assert_eq!(eroded_window_ratio(&t, 1.0), 1.0);
    }

    #[test]
    fn positive_when_profile_positive() {
        for p in [
            ProfileSpec::Indicator,
            ProfileSpec::Exponential,
            ProfileSpec::GaussianTail,
        ] {
            let eps = p.default_epsilon();
            assert!(edge_variance_constant(&p, 0.5, 2, 3.0, eps, 0.5) > 0.0);
            assert!(subgraph_variance_constant(&p, 3, 2, 3.0, eps, 0.5) > 0.0);
        }
    }
}
