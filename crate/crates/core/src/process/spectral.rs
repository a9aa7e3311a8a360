//! Determinantal sampling on the torus via the Fourier spectrum of the
//! periodized kernel.

use rand::Rng;
use rustfft::num_complex::Complex64;

use super::PointSample;
use crate::config::{DppKernelFamily, DppKernelSpec, WeightSpec, WindowSpec};
use crate::error::{Result, SamplerError};

/// Modes with eigenvalue at or below this are dropped.
pub const MODE_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct TorusSpectrum {
    pub modes: Vec<Vec<i64>>,
    pub eigenvalues: Vec<f64>,
    /// `Σ` of the dropped eigenvalues (expected number of points lost).
    pub truncated_mass: f64,
}

/// Eigenvalues `λ_k = c·(2πs²)^{d/2}·exp(-2π²s²Σ(k_i/L_i)²)` of the periodized
/// Gaussian kernel with `K₀(o) = c`, eigenfunctions `e^{2πi k·x/L}/√|W|`.
pub fn gaussian_torus_spectrum(window: &WindowSpec, k0: f64, scale: f64) -> Result<TorusSpectrum> {
    let d = window.dim();
    let two_pi2s2 = 2.0 * std::f64::consts::PI.powi(2) * scale * scale;
    let lambda0 = k0 * (2.0 * std::f64::consts::PI * scale * scale).powf(d as f64 / 2.0);
    if lambda0 > 1.0 {
        return Err(SamplerError::EigenvalueAboveOne {
            mode: vec![0; d],
            value: lambda0,
        }
        .into());
    }
    // Per-axis theta sums give the trace Σ_k λ_k exactly.
    let mut trace = lambda0;
    for &l in &window.sides {
        let mut s = 1.0;
        let mut k = 1i64;
        loop {
            let term = 2.0 * (-two_pi2s2 * (k as f64 / l).powi(2)).exp();
            s += term;
            if term < 1e-18 * s {
                break;
            }
            k += 1;
        }
        trace *= s;
    }
    if lambda0 <= MODE_CUTOFF {
        return Ok(TorusSpectrum {
            modes: vec![],
            eigenvalues: vec![],
            truncated_mass: trace,
        });
    }
    let log_ratio = (lambda0 / MODE_CUTOFF).ln();
    let kmax: Vec<i64> = window
        .sides
        .iter()
        .map(|&l| (l * (log_ratio / two_pi2s2).sqrt()).floor() as i64)
        .collect();
    let mut modes = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut k: Vec<i64> = kmax.iter().map(|&m| -m).collect();
    'outer: loop {
        let q: f64 = k
            .iter()
            .zip(&window.sides)
            .map(|(&ki, &l)| (ki as f64 / l).powi(2))
            .sum();
        let lam = lambda0 * (-two_pi2s2 * q).exp();
        if lam > MODE_CUTOFF {
            modes.push(k.clone());
            eigenvalues.push(lam);
        }
        for axis in (0..d).rev() {
            if k[axis] < kmax[axis] {
                k[axis] += 1;
                continue 'outer;
            }
            k[axis] = -kmax[axis];
        }
        break;
    }
    let kept: f64 = eigenvalues.iter().sum();
    Ok(TorusSpectrum {
        modes,
        eigenvalues,
        truncated_mass: (trace - kept).max(0.0),
    })
}

/// Determinantal process with kernel `factor·K₀` on a torus window.
pub fn sample_determinantal_with<R: Rng + ?Sized>(
    window: &WindowSpec,
    kernel: &DppKernelSpec,
    factor: f64,
    weights: &WeightSpec,
    rng: &mut R,
) -> Result<PointSample> {
    if !window.is_torus() {
        return Err(SamplerError::RequiresTorus("determinantal".into()).into());
    }
    let scale = match kernel.kernel {
        DppKernelFamily::Gaussian { scale } => scale,
        DppKernelFamily::TableIsotropic { .. } => {
            return Err(SamplerError::KernelNotSupported(
                "spectral sampling needs the gaussian kernel family".into(),
            )
            .into())
        }
    };
    let spectrum = gaussian_torus_spectrum(window, factor * kernel.k0_origin, scale)?;
    let freqs: Vec<Vec<f64>> = spectrum
        .modes
        .iter()
        .zip(&spectrum.eigenvalues)
        .filter(|(_, &lam)| rng.random::<f64>() < lam)
        .map(|(k, _)| {
            k.iter()
                .zip(&window.sides)
                .map(|(&ki, &l)| 2.0 * std::f64::consts::PI * ki as f64 / l)
                .collect()
        })
        .collect();
    let locations = sample_projection(window, &freqs, rng);
    Ok(PointSample::from_locations(
        locations,
        weights,
        "dpp(-1)".into(),
        rng,
    ))
}

fn feature(freqs: &[Vec<f64>], x: &[f64], out: &mut [Complex64]) {
    for (slot, w) in out.iter_mut().zip(freqs) {
        let phase: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
        *slot = Complex64::from_polar(1.0, phase);
    }
}

fn project_out(basis: &[Vec<Complex64>], v: &mut [Complex64]) {
    for b in basis {
        let c: Complex64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi -= c * bi;
        }
    }
}

/// Projection DPP onto the span of the given Fourier modes, one point at a
/// time by rejection from the uniform proposal.
fn sample_projection<R: Rng + ?Sized>(
    window: &WindowSpec,
    freqs: &[Vec<f64>],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let n = freqs.len();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut locations = Vec::with_capacity(n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    let mut x = vec![0.0; window.dim()];
    while locations.len() < n {
        for (xi, &l) in x.iter_mut().zip(&window.sides) {
            *xi = rng.random::<f64>() * l;
        }
        feature(freqs, &x, &mut v);
        project_out(&basis, &mut v);
        let norm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if rng.random::<f64>() * n as f64 >= norm2 {
            continue;
        }
        // second pass restores orthogonality lost to rounding
        project_out(&basis, &mut v);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        basis.push(v.iter().map(|c| c / norm).collect());
        locations.push(x.clone());
    }
    locations
}
