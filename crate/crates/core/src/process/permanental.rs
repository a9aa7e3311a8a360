//! Permanental sampling as a Cox process with intensity `|G|²`, where `G` is a
//! circular complex Gaussian field with covariance `K₀`, simulated by
//! circulant embedding on the torus.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rustfft::num_complex::Complex64;

use super::PointSample;
use crate::config::{DppKernelFamily, DppKernelSpec, WeightSpec, WindowSpec};
use crate::error::{Result, SamplerError};
use crate::fft::fft_nd;

const MAX_CELLS: usize = 1 << 24;
const MAX_REFINEMENTS: u32 = 4;
/// Periodic images `|n_i| ≤ IMAGES` enter the torus covariance.
const IMAGES: i64 = 2;

struct FieldGrid {
    shape: Vec<usize>,
    cell: Vec<f64>,
    sqrt_ev: Vec<f64>,
}

fn embed(window: &WindowSpec, k0: f64, scale: f64, points_per_scale: usize) -> Result<FieldGrid> {
    let mut pps = points_per_scale;
    let mut last_failure = None;
    for _ in 0..=MAX_REFINEMENTS {
        let shape: Vec<usize> = window
            .sides
            .iter()
            .map(|&l| ((l * pps as f64 / scale).ceil() as usize).max(1))
            .collect();
        let total: usize = shape.iter().product();
        if total > MAX_CELLS {
            return Err(SamplerError::KernelNotSupported(format!(
                "field grid {shape:?} exceeds {MAX_CELLS} cells"
            ))
            .into());
        }
        let cell: Vec<f64> = window
            .sides
            .iter()
            .zip(&shape)
            .map(|(&l, &n)| l / n as f64)
            .collect();
        // The Gaussian factorizes over axes, and so does its periodization.
        let axis_cov: Vec<Vec<f64>> = shape
            .iter()
            .zip(&cell)
            .zip(&window.sides)
            .map(|((&n, &h), &l)| {
                (0..n)
                    .map(|j| {
                        (-IMAGES..=IMAGES)
                            .map(|img| {
                                let x = j as f64 * h + img as f64 * l;
                                (-x * x / (2.0 * scale * scale)).exp()
                            })
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let mut cov = vec![Complex64::new(k0, 0.0); total];
        let mut idx = vec![0usize; shape.len()];
        for c in cov.iter_mut() {
            for (axis, &j) in idx.iter().enumerate() {
                c.re *= axis_cov[axis][j];
            }
            for axis in (0..shape.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        fft_nd(&mut cov, &shape, false);
        let max = cov.iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let min = cov.iter().map(|c| c.re).fold(f64::MAX, f64::min);
        if min < -1e-9 * max.abs() {
            last_failure = Some((shape, min));
            pps *= 2;
            continue;
        }
        let sqrt_ev = cov.iter().map(|c| c.re.max(0.0).sqrt()).collect();
        return Ok(FieldGrid {
            shape,
            cell,
            sqrt_ev,
        });
    }
    let (grid, min_eigenvalue) = last_failure.expect("loop ran");
    Err(SamplerError::EmbeddingNotNonnegative {
        grid,
        min_eigenvalue,
    }
    .into())
}

/// Permanental process with kernel `factor·K₀` on a torus window.
pub fn sample_permanental_with<R: Rng + ?Sized>(
    window: &WindowSpec,
    kernel: &DppKernelSpec,
    factor: f64,
    weights: &WeightSpec,
    rng: &mut R,
) -> Result<PointSample> {
    if !window.is_torus() {
        return Err(SamplerError::RequiresTorus("permanental".into()).into());
    }
    let scale = match kernel.kernel {
        DppKernelFamily::Gaussian { scale } => scale,
        DppKernelFamily::TableIsotropic { .. } => {
            return Err(SamplerError::KernelNotSupported(
                "circulant embedding needs the gaussian kernel family".into(),
            )
            .into())
        }
    };
    let grid = embed(
        window,
        factor * kernel.k0_origin,
        scale,
        kernel.field_points_per_scale,
    )?;
    let m = grid.sqrt_ev.len();
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut field: Vec<Complex64> = grid
        .sqrt_ev
        .iter()
        .map(|&s| {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            Complex64::new(a * inv_sqrt2, b * inv_sqrt2) * s
        })
        .collect();
    fft_nd(&mut field, &grid.shape, true);
    let norm = 1.0 / m as f64;
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0.0;
    for g in &field {
        acc += g.norm_sqr() * norm;
        cumulative.push(acc);
    }
    let cell_volume: f64 = grid.cell.iter().product();
    let mass = acc * cell_volume;
    let n = if mass > 0.0 {
        Poisson::new(mass).expect("finite mass").sample(rng) as usize
    } else {
        0
    };
    let d = window.dim();
    let mut locations = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random::<f64>() * acc;
        let mut flat = cumulative.partition_point(|&c| c <= target).min(m - 1);
        let mut loc = vec![0.0; d];
        for axis in (0..d).rev() {
            let j = flat % grid.shape[axis];
            flat /= grid.shape[axis];
            loc[axis] = j as f64;
        }
        for (x, h) in loc.iter_mut().zip(&grid.cell) {
            *x = (*x + rng.random::<f64>()) * h;
        }
        locations.push(loc);
    }
    Ok(PointSample::from_locations(
        locations,
        weights,
        "permanental(1)".into(),
        rng,
    ))
}
