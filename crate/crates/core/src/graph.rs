//! WRCM edge sampling over a marked point sample.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{unit_ball_volume, SimulationConfig, WindowSpec};
use crate::error::Result;
use crate::process::{csv_err, PointSample};
use crate::rng::pair_uniform;

/// Sample size above which cells are processed in parallel.
const PARALLEL_THRESHOLD: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub i: u64,
    pub j: u64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WrcmGraph {
    pub points: PointSample,
    /// Sorted by `(i, j)` with `i < j`.
    pub edges: Vec<Edge>,
    /// Upper bound on the expected number of edges missed by truncation.
    pub truncation_bias_bound: f64,
}

impl WrcmGraph {
    /// Neighbour lists indexed by point id.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self
            .points
            .points
            .iter()
            .map(|p| p.id as usize + 1)
            .max()
            .unwrap_or(0);
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.i as usize].push(e.j as usize);
            adj[e.j as usize].push(e.i as usize);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    /// CSV with a `# n=… seed=… truncation_bias_bound=…` preamble and rows
    /// `id_i, id_j, length`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# n={} seed={} truncation_bias_bound={}",
            self.points.len(),
            self.points.seed_used,
            self.truncation_bias_bound
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id_i", "id_j", "length"])
            .map_err(csv_err)?;
        for e in &self.edges {
            w.write_record([e.i.to_string(), e.j.to_string(), e.length.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `φ(|B_r| / (ν κ(u, v)))` with `r` the window-metric distance.
pub fn connection_probability(
    x: &[f64],
    y: &[f64],
    u: f64,
    v: f64,
    config: &SimulationConfig,
) -> f64 {
    let r = config.window.distance(x, y);
    probability_at(r, u, v, config, unit_ball_volume(config.dim()))
}

#[inline]
fn probability_at(r: f64, u: f64, v: f64, config: &SimulationConfig, b1: f64) -> f64 {
    let ball = b1 * r.powi(config.dim() as i32);
    config
        .profile
        .eval(ball / (config.volume_scale * config.kernel.eval(u, v)))
}

/// Smallest `r` with `φ(|B_s|/(νκ(u,v))) ≤ ε` for every `s > r`.
pub fn truncation_radius(u_max: f64, v_max: f64, config: &SimulationConfig) -> f64 {
    radius_for_kappa(config.kernel.eval(u_max, v_max), config)
}

fn radius_for_kappa(kappa: f64, config: &SimulationConfig) -> f64 {
    let t_star = config.profile.tail_cutoff(config.truncation_epsilon);
    let d = config.dim() as f64;
    (config.volume_scale * kappa * t_star / unit_ball_volume(config.dim())).powf(1.0 / d)
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub index: Vec<i64>,
    /// Positions in `PointSample::points`.
    pub members: Vec<usize>,
    pub max_weight: f64,
}

#[derive(Debug, Clone)]
pub struct SpatialGrid {
    pub cell_side: f64,
    /// Cells per axis.
    pub shape: Vec<i64>,
    /// Occupied cells in increasing linear-index order.
    pub cells: Vec<GridCell>,
    lookup: HashMap<u64, usize>,
    torus: bool,
}

impl SpatialGrid {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn linear(&self, index: &[i64]) -> u64 {
        index
            .iter()
            .zip(&self.shape)
            .fold(0u64, |acc, (&i, &n)| acc * n as u64 + i as u64)
    }

    /// Linear indices of the distinct occupied cells adjacent to (or equal to) `cell`.
    fn neighbours(&self, cell: &GridCell) -> BTreeSet<usize> {
        let d = self.shape.len();
        let mut out = BTreeSet::new();
        let mut offset = vec![-1i64; d];
        let mut idx = vec![0i64; d];
        'outer: loop {
            let mut inside = true;
            for a in 0..d {
                let mut v = cell.index[a] + offset[a];
                if self.torus {
                    v = v.rem_euclid(self.shape[a]);
                } else if v < 0 || v >= self.shape[a] {
                    inside = false;
                }
                idx[a] = v;
            }
            if inside {
                if let Some(&pos) = self.lookup.get(&self.linear(&idx)) {
                    out.insert(pos);
                }
            }
            for a in (0..d).rev() {
                if offset[a] < 1 {
                    offset[a] += 1;
                    continue 'outer;
                }
                offset[a] = -1;
            }
            break;
        }
        out
    }
}

/// Torus axes must be tiled exactly by cells no narrower than the radius;
/// hard axes may end in a partial cell.
fn axis_cells(side_len: f64, radius: f64, cap: i64, torus: bool) -> i64 {
    if !(radius > 0.0) || !radius.is_finite() {
        return 1;
    }
    let ratio = side_len / radius;
    let n = if torus { ratio.floor() } else { ratio.ceil() };
    (n.min(cap as f64) as i64).clamp(1, cap)
}

/// Bucket the sample into cells whose side is at least the truncation radius
/// of the largest in-sample weight pair.
pub fn build_grid(sample: &PointSample, config: &SimulationConfig) -> SpatialGrid {
    let window = &config.window;
    let d = window.dim();
    if sample.is_empty() {
        return SpatialGrid {
            cell_side: 0.0,
            shape: vec![1; d],
            cells: vec![],
            lookup: HashMap::new(),
            torus: window.is_torus(),
        };
    }
    let u_max = sample.points.iter().map(|p| p.weight).fold(1.0, f64::max);
    let radius = truncation_radius(u_max, u_max, config);
    let cap = 1i64 << (60 / d as u32).min(20);
    let torus = window.is_torus();
    let shape: Vec<i64> = window
        .sides
        .iter()
        .map(|&l| axis_cells(l, radius, cap, torus))
        .collect();
    let widths: Vec<f64> = window
        .sides
        .iter()
        .zip(&shape)
        .map(|(&l, &n)| {
            if n == 1 {
                l
            } else if torus {
                l / n as f64
            } else {
                radius.max(l / n as f64)
            }
        })
        .collect();
    let cell_side = widths
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(radius);
    let mut keyed: Vec<(u64, Vec<i64>, usize)> = sample
        .points
        .iter()
        .enumerate()
        .map(|(pos, p)| {
            let index: Vec<i64> = p
                .location
                .iter()
                .zip(shape.iter().zip(&widths))
                .map(|(&x, (&n, &w))| ((x / w).floor() as i64).clamp(0, n - 1))
                .collect();
            let key = index
                .iter()
                .zip(&shape)
                .fold(0u64, |acc, (&i, &n)| acc * n as u64 + i as u64);
            (key, index, pos)
        })
        .collect();
    keyed.sort_by_key(|k| (k.0, k.2));
    let mut cells: Vec<GridCell> = Vec::new();
    let mut lookup = HashMap::new();
    let mut last_key = None;
    for (key, index, pos) in keyed {
        if last_key != Some(key) {
            lookup.insert(key, cells.len());
            cells.push(GridCell {
                index,
                members: vec![],
                max_weight: 1.0,
            });
            last_key = Some(key);
        }
        let cell = cells.last_mut().unwrap();
        cell.members.push(pos);
        cell.max_weight = cell.max_weight.max(sample.points[pos].weight);
    }
    SpatialGrid {
        cell_side,
        shape,
        cells,
        lookup,
        torus: window.is_torus(),
    }
}

struct PairContext<'a> {
    config: &'a SimulationConfig,
    window: &'a WindowSpec,
    sample: &'a PointSample,
    key: u64,
    b1: f64,
    t_star: f64,
}

impl PairContext<'_> {
    /// Returns (tested, edge).
    #[inline]
    fn try_pair(&self, a: usize, b: usize) -> (bool, Option<Edge>) {
        let (pa, pb) = (&self.sample.points[a], &self.sample.points[b]);
        let kappa = self.config.kernel.eval(pa.weight, pb.weight);
        let r = self.window.distance(&pa.location, &pb.location);
        let arg = self.b1 * r.powi(self.window.dim() as i32) / (self.config.volume_scale * kappa);
        if arg > self.t_star {
            return (false, None);
        }
        let p = self.config.profile.eval(arg);
        let t = pair_uniform(self.key, pa.id, pb.id);
        let edge = (t <= p).then(|| {
            let (i, j) = if pa.id < pb.id {
                (pa.id, pb.id)
            } else {
                (pb.id, pa.id)
            };
            Edge { i, j, length: r }
        });
        (true, edge)
    }
}

fn bias_bound(config: &SimulationConfig, n: usize, tested: u64) -> f64 {
    let t_star = config.profile.tail_cutoff(config.truncation_epsilon);
    if let Some(end) = config.profile.support_end() {
        if end <= t_star {
            return 0.0;
        }
    }
    let all = n as u64 * n.saturating_sub(1) as u64 / 2;
    config.truncation_epsilon * (all - tested) as f64
}

/// Edge set per the connection rule, with pair uniforms keyed by point ids.
pub fn sample_edges(sample: &PointSample, config: &SimulationConfig, key: u64) -> WrcmGraph {
    let grid = build_grid(sample, config);
    let ctx = PairContext {
        config,
        window: &config.window,
        sample,
        key,
        b1: unit_ball_volume(config.dim()),
        t_star: config.profile.tail_cutoff(config.truncation_epsilon),
    };
    let per_cell = |ci: usize| -> (u64, Vec<Edge>) {
        let cell = &grid.cells[ci];
        let mut tested = 0u64;
        let mut edges = Vec::new();
        let mut visit = |a: usize, b: usize| {
            let (t, e) = ctx.try_pair(a, b);
            tested += t as u64;
            edges.extend(e);
        };
        for (x, &a) in cell.members.iter().enumerate() {
            for &b in &cell.members[x + 1..] {
                visit(a, b);
            }
        }
        for nj in grid.neighbours(cell) {
            if nj <= ci {
                continue;
            }
            for &a in &cell.members {
                for &b in &grid.cells[nj].members {
                    visit(a, b);
                }
            }
        }
        (tested, edges)
    };
    let results: Vec<(u64, Vec<Edge>)> = if sample.len() >= PARALLEL_THRESHOLD {
        (0..grid.cells.len())
            .into_par_iter()
            .map(per_cell)
            .collect()
    } else {
        (0..grid.cells.len()).map(per_cell).collect()
    };
    let tested: u64 = results.iter().map(|r| r.0).sum();
    let mut edges: Vec<Edge> = results.into_iter().flat_map(|r| r.1).collect();
    edges.sort_by_key(|e| (e.i, e.j));
    WrcmGraph {
        truncation_bias_bound: bias_bound(config, sample.len(), tested),
        points: sample.clone(),
        edges,
    }
}

/// O(n²) reference: tests every pair without truncation.
pub fn sample_edges_all_pairs(
    sample: &PointSample,
    config: &SimulationConfig,
    key: u64,
) -> WrcmGraph {
    let b1 = unit_ball_volume(config.dim());
    let pts = &sample.points;
    let mut edges = Vec::new();
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            let r = config.window.distance(&pts[a].location, &pts[b].location);
            let p = probability_at(r, pts[a].weight, pts[b].weight, config, b1);
            if pair_uniform(key, pts[a].id, pts[b].id) <= p {
                let (i, j) = if pts[a].id < pts[b].id {
                    (pts[a].id, pts[b].id)
                } else {
                    (pts[b].id, pts[a].id)
                };
                edges.push(Edge { i, j, length: r });
            }
        }
    }
    edges.sort_by_key(|e| (e.i, e.j));
    WrcmGraph {
        points: sample.clone(),
        edges,
        truncation_bias_bound: 0.0,
    }
}

/// Vertex sample and edges of replication `replication`.
pub fn sample_graph_replication(config: &SimulationConfig, replication: u64) -> Result<WrcmGraph> {
    let sample = crate::process::sample_replication(config, replication)?;
    Ok(sample_edges(
        &sample,
        config,
        crate::rng::edge_key(config.master_seed, replication),
    ))
}
