//! Product and cumulant densities of α-determinantal processes as
//! permutation sums.

use crate::config::DppKernelSpec;
use crate::error::{Error, Result};

pub const MAX_DENSITY_ORDER: usize = 8;

fn guard(k: usize, points: &[Vec<f64>]) -> Result<()> {
    if k == 0 || k > MAX_DENSITY_ORDER {
        return Err(Error::Guard(format!(
            "density order must lie in 1..={MAX_DENSITY_ORDER}, got {k}"
        )));
    }
    if points.len() != k {
        return Err(Error::precondition("need exactly k points"));
    }
    Ok(())
}

/// Visit every permutation of `0..k` (Heap's algorithm).
pub fn for_each_permutation<F: FnMut(&[usize])>(k: usize, mut visit: F) {
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    visit(&a);
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn cycle_count(perm: &[usize]) -> usize {
    let mut seen = 0u32;
    let mut cycles = 0;
    for start in 0..perm.len() {
        if seen >> start & 1 == 1 {
            continue;
        }
        cycles += 1;
        let mut x = start;
        while seen >> x & 1 == 0 {
            seen |= 1 << x;
            x = perm[x];
        }
    }
    cycles
}

fn kernel_matrix(points: &[Vec<f64>], kernel: &DppKernelSpec) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|x| points.iter().map(|y| kernel.eval(x, y)).collect())
        .collect()
}

/// `ρ_k = Σ_{π ∈ Per(k)} α^{k - n(π)} ∏_i K(x_i, x_{π(i)})` with `0⁰ = 1`.
pub fn product_density(k: usize, points: &[Vec<f64>], kernel: &DppKernelSpec) -> Result<f64> {
    guard(k, points)?;
    let kmat = kernel_matrix(points, kernel);
    let mut total = 0.0;
    for_each_permutation(k, |perm| {
        let weight = kernel.alpha.powi((k - cycle_count(perm)) as i32);
        if weight != 0.0 {
            let prod: f64 = (0..k).map(|i| kmat[i][perm[i]]).product();
            total += weight * prod;
        }
    });
    Ok(total)
}

/// `c^{(k)} = α^{k-1} Σ K(x_1, x_{π(2)}) K(x_{π(2)}, x_{π(3)}) ⋯ K(x_{π(k)}, x_1)`
/// over the orderings `π` of `{2, …, k}`, i.e. over the `(k-1)!` cyclic
/// permutations with a single cycle.
pub fn cumulant_density(k: usize, points: &[Vec<f64>], kernel: &DppKernelSpec) -> Result<f64> {
    guard(k, points)?;
    let kmat = kernel_matrix(points, kernel);
    if k == 1 {
        return Ok(kmat[0][0]);
    }
    let mut total = 0.0;
    for_each_permutation(k - 1, |perm| {
        let mut prev = 0;
        let mut prod = 1.0;
        for &p in perm {
            prod *= kmat[prev][p + 1];
            prev = p + 1;
        }
        total += prod * kmat[prev][0];
    });
    Ok(kernel.alpha.powi((k - 1) as i32) * total)
}
