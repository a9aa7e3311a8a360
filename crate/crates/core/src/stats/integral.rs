use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{Verdict, REPORT_SCHEMA_VERSION};
use crate::bounds::moment_u;
use crate::config::{unit_ball_volume, KernelSpec, SimulationConfig};
use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::rng::{stream_rng, Stream};

/// Estimates with a relative standard error above this are inconclusive.
pub const MAX_RELATIVE_SE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralBoundReport {
    pub schema_version: u32,
    pub sigma: String,
    pub m: usize,
    pub q: usize,
    /// `|σ|`
    pub blocks: usize,
    /// Block pairs joined by a connection factor.
    pub edges: Vec<(usize, usize)>,
    pub tree_edges: Vec<(usize, usize)>,
    /// Monte Carlo estimate of `∫ (f^{⊗m})_σ dμ^{|σ|}`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `t^{|σ|} ν^{|σ|-1} |W| E[∏_tree κ(U_i, U_j)]`
    pub rhs: f64,
    pub kappa_expectation: f64,
    /// Whether `kappa_expectation` is exact or the bound `∏ M_U(deg)`.
    pub kappa_exact: bool,
    pub samples: usize,
    pub verdict: Verdict,
}

/// Distinct block pairs carrying a connection factor in `(f^{⊗m})_σ` for a
/// complete pattern on `q` vertices.
fn block_edges(sigma: &Partition) -> Vec<(usize, usize)> {
    let q = sigma.q();
    let mut edges = Vec::new();
    for row in 0..sigma.m() {
        for a in 0..q {
            for b in a + 1..q {
                let (i, j) = (sigma.block_of(row * q + a), sigma.block_of(row * q + b));
                let e = (i.min(j), i.max(j));
                if !edges.contains(&e) {
                    edges.push(e);
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// BFS spanning tree rooted at block 0 as `(parent, child)` pairs in
/// visiting order; `None` if the block graph is disconnected.
fn spanning_tree(blocks: usize, edges: &[(usize, usize)]) -> Option<Vec<(usize, usize)>> {
    let mut seen = vec![false; blocks];
    seen[0] = true;
    let mut queue = vec![0];
    let mut tree = Vec::new();
    let mut head = 0;
    while head < queue.len() {
        let p = queue[head];
        head += 1;
        for &(i, j) in edges {
            let c = if i == p {
                j
            } else if j == p {
                i
            } else {
                continue;
            };
            if !seen[c] {
                seen[c] = true;
                tree.push((p, c));
                queue.push(c);
            }
        }
    }
    (queue.len() == blocks).then_some(tree)
}

/// Monte Carlo check of the spanning-tree bound on `∫ (f^{⊗m})_σ dμ^{|σ|}`
/// for a single-edge or triangle pattern.
///
/// The integral runs over the window as a subset of `ℝ^d`. Sampling: the
/// root block is uniform on `W`, and each tree child sits at a uniform
/// direction from its parent with ball volume `νκ·S`, where `S` has density
/// `φ`. The tree factors then cancel against the proposal density.
pub fn mc_integral_bound_check(
    config: &SimulationConfig,
    sigma: &Partition,
    n_mc: usize,
    seed: u64,
) -> Result<IntegralBoundReport> {
    let q = config.pattern.q();
    let complete = config.pattern.edges().len() == q * (q - 1) / 2;
    if !(complete && (q == 2 || q == 3)) {
        return Err(Error::precondition(
            "integral check supports the single edge and the triangle",
        ));
    }
    if sigma.q() != q {
        return Err(Error::precondition(
            "partition rows must match the pattern size",
        ));
    }
    if sigma.m() > 4 || sigma.m() * q > 8 {
        return Err(Error::precondition("integral check needs m ≤ 4 and mq ≤ 8"));
    }
    if !sigma.respects_rows() {
        return Err(Error::precondition(
            "partition puts two elements of one row in a block",
        ));
    }
    if n_mc < 2 {
        return Err(Error::precondition("need at least 2 Monte Carlo samples"));
    }
    let k = sigma.len();
    let edges = block_edges(sigma);
    let tree = spanning_tree(k, &edges)
        .ok_or_else(|| Error::precondition("block graph of σ is disconnected"))?;
    let extra: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|&(i, j)| !tree.contains(&(i, j)) && !tree.contains(&(j, i)))
        .collect();

    let d = config.dim();
    let b1 = unit_ball_volume(d);
    let nu = config.volume_scale;
    let t = config.intensity;
    let w = config.volume;
    let sides = &config.window.sides;
    let scale = t.powi(k as i32) * w;

    let mut rng = stream_rng(seed, 0, Stream::Integral);
    let mut u = vec![0.0; k];
    let mut x = vec![vec![0.0; d]; k];
    let mut dir = vec![0.0; d];
    let (mut mean, mut m2) = (0.0, 0.0);
    for s in 0..n_mc {
        for ui in u.iter_mut() {
            *ui = config.weights.sample(&mut rng);
        }
        for (xi, &l) in x[0].iter_mut().zip(sides) {
            *xi = rng.random::<f64>() * l;
        }
        let mut weight = scale;
        let mut inside = true;
        for &(p, c) in &tree {
            let kappa = config.kernel.eval(u[p], u[c]);
            let vol = config.profile.sample(&mut rng) * nu * kappa;
            let r = (vol / b1).powf(1.0 / d as f64);
            let mut norm = 0.0f64;
            for di in dir.iter_mut() {
                *di = StandardNormal.sample(&mut rng);
                norm += *di * *di;
            }
            let norm = norm.sqrt();
            for i in 0..d {
                let v = x[p][i] + r * dir[i] / norm;
                inside &= (0.0..=sides[i]).contains(&v);
                x[c][i] = v;
            }
            weight *= nu * kappa;
        }
        let value = if inside {
            extra.iter().fold(weight, |acc, &(i, j)| {
                let r2: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                let ball = b1 * r2.powf(d as f64 / 2.0);
                acc * config
                    .profile
                    .eval(ball / (nu * config.kernel.eval(u[i], u[j])))
            })
        } else {
            0.0
        };
        let delta = value - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (value - mean);
    }
    let lhs_se = (m2 / (n_mc - 1) as f64 / n_mc as f64).sqrt();

    let mut degree = vec![0u32; k];
    for &(p, c) in &tree {
        degree[p] += 1;
        degree[c] += 1;
    }
    let (kappa_expectation, kappa_exact) = match config.kernel {
        KernelSpec::Unit => (1.0, true),
        _ => {
            let mut prod = 1.0;
            for &deg in &degree {
                prod *= moment_u(&config.weights, f64::from(deg))?;
            }
            (prod, matches!(config.kernel, KernelSpec::Product))
        }
    };
    if !kappa_expectation.is_finite() {
        return Err(Error::precondition(
            "weight moments diverge; the bound is infinite",
        ));
    }
    let rhs = t.powi(k as i32) * nu.powi(k as i32 - 1) * w * kappa_expectation;

    let verdict = if mean <= 0.0 || lhs_se / mean > MAX_RELATIVE_SE {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(mean <= rhs * (1.0 + 3.0 * lhs_se / mean))
    };
    Ok(IntegralBoundReport {
        schema_version: REPORT_SCHEMA_VERSION,
        sigma: sigma.to_canonical_string(),
        m: sigma.m(),
        q,
        blocks: k,
        edges,
        tree_edges: tree,
        lhs: mean,
        lhs_se,
        rhs,
        kappa_expectation,
        kappa_exact,
        samples: n_mc,
        verdict,
    })
}
