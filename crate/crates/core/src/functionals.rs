//! Subgraph counts and power-weighted edge lengths.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::unit_ball_volume;
use crate::error::{Error, Result};
use crate::graph::WrcmGraph;
use crate::process::csv_err;

/// Largest host accepted by [`brute_force_count`].
pub const BRUTE_FORCE_MAX_VERTICES: usize = 300;
const MAX_PATTERN_VERTICES: usize = 16;

/// Connected simple graph on vertices `0..q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    q: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<u32>,
}

impl PatternGraph {
    pub fn new(q: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if !(2..=MAX_PATTERN_VERTICES).contains(&q) {
            return Err(Error::validation(
                "pattern.q",
                format!("pattern needs 2..={MAX_PATTERN_VERTICES} vertices"),
            ));
        }
        let mut adj = vec![0u32; q];
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= q || b >= q {
                return Err(Error::validation(
                    "pattern.edges",
                    "edge endpoint outside 1..=q",
                ));
            }
            if a == b {
                return Err(Error::validation(
                    "pattern.edges",
                    "self-loops are not allowed",
                ));
            }
            if adj[a] >> b & 1 == 1 {
                return Err(Error::validation("pattern.edges", "duplicate edge"));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        let mut seen = 1u32;
        let mut frontier = 1u32;
        while frontier != 0 {
            let mut next = 0;
            for v in 0..q {
                if frontier >> v & 1 == 1 {
                    next |= adj[v];
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        if seen.count_ones() as usize != q {
            return Err(Error::validation(
                "pattern",
                "pattern graph must be connected",
            ));
        }
        Ok(PatternGraph {
            q,
            edges: norm,
            adj,
        })
    }

    pub fn single_edge() -> Self {
        PatternGraph::new(2, &[(0, 1)]).unwrap()
    }

    pub fn triangle() -> Self {
        PatternGraph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    pub fn path(q: usize) -> Self {
        let edges: Vec<_> = (1..q).map(|i| (i - 1, i)).collect();
        PatternGraph::new(q, &edges).unwrap()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    /// Relabel vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(a, b)| (perm[a], perm[b]))
            .collect();
        PatternGraph::new(self.q, &edges).expect("relabeling preserves validity")
    }

    /// `"q=3;1-2,2-3"` (1-based).
    pub fn describe(&self) -> String {
        let e: Vec<String> = self
            .edges
            .iter()
            .map(|(a, b)| format!("{}-{}", a + 1, b + 1))
            .collect();
        format!("q={};{}", self.q, e.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalKind {
    SubgraphCount,
    EdgePower,
    BallVolumePower,
}

impl FunctionalKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FunctionalKind::SubgraphCount => "subgraph-count",
            FunctionalKind::EdgePower => "edge-power",
            FunctionalKind::BallVolumePower => "ball-volume-power",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub kind: FunctionalKind,
    pub value: f64,
    /// Pattern description or exponent.
    pub parameter: String,
    /// Ordered injective tuples for subgraph counts.
    pub tuples: Option<u64>,
    pub note: &'static str,
}

const SUBGRAPH_NOTE: &str =
    "ordered injective q-tuples realizing every pattern edge, divided by q!";
const EDGE_NOTE: &str = "sum over unordered edges";

fn factorial(q: usize) -> u64 {
    (1..=q as u64).product()
}

fn subgraph_value(tuples: u64, pattern: &PatternGraph) -> FunctionalValue {
    FunctionalValue {
        kind: FunctionalKind::SubgraphCount,
        value: tuples as f64 / factorial(pattern.q()) as f64,
        parameter: pattern.describe(),
        tuples: Some(tuples),
        note: SUBGRAPH_NOTE,
    }
}

/// Pattern vertices in BFS order from vertex 0, each with an earlier neighbour
/// (`None` for the anchor) and a mask of all earlier neighbours.
fn matching_order(pattern: &PatternGraph) -> Vec<(usize, Option<usize>, Vec<usize>)> {
    let q = pattern.q();
    let mut order = vec![0usize];
    let mut placed = 1u32;
    let mut head = 0;
    while order.len() < q {
        let v = order[head];
        head += 1;
        for w in 0..q {
            if placed >> w & 1 == 0 && pattern.has_edge(v, w) {
                placed |= 1 << w;
                order.push(w);
            }
        }
    }
    order
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let earlier: Vec<usize> = (0..k).filter(|&j| pattern.has_edge(order[j], v)).collect();
            let parent = earlier.first().copied();
            (v, parent, earlier)
        })
        .collect()
}

fn extend(
    adj: &[Vec<usize>],
    plan: &[(usize, Option<usize>, Vec<usize>)],
    image: &mut Vec<usize>,
) -> u64 {
    let k = image.len();
    if k == plan.len() {
        return 1;
    }
    let (_, parent, earlier) = &plan[k];
    let anchor = image[parent.expect("non-anchor has an earlier neighbour")];
    let mut total = 0;
    for &cand in &adj[anchor] {
        if image.contains(&cand) {
            continue;
        }
        if earlier[1..]
            .iter()
            .all(|&j| adj[image[j]].binary_search(&cand).is_ok())
        {
            image.push(cand);
            total += extend(adj, plan, image);
            image.pop();
        }
    }
    total
}

/// `S(G)`: ordered injective tuples mapping every pattern edge onto a graph
/// edge, divided by `q!`. Backtracking along the pattern's BFS order.
pub fn count_subgraphs(graph: &WrcmGraph, pattern: &PatternGraph) -> FunctionalValue {
    let adj = graph.adjacency();
    let plan = matching_order(pattern);
    let anchors: Vec<usize> = graph.points.points.iter().map(|p| p.id as usize).collect();
    let per_anchor = |&a: &usize| {
        let mut image = Vec::with_capacity(pattern.q());
        image.push(a);
        extend(&adj, &plan, &mut image)
    };
    let tuples: u64 = if anchors.len() > 5_000 {
        anchors.par_iter().map(per_anchor).sum()
    } else {
        anchors.iter().map(per_anchor).sum()
    };
    subgraph_value(tuples, pattern)
}

/// Literal enumeration of every ordered injective q-tuple.
pub fn brute_force_count(graph: &WrcmGraph, pattern: &PatternGraph) -> Result<FunctionalValue> {
    let n = graph.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::Guard(format!(
            "brute-force count needs at most {BRUTE_FORCE_MAX_VERTICES} vertices, got {n}"
        )));
    }
    let ids: Vec<usize> = graph.points.points.iter().map(|p| p.id as usize).collect();
    let size = ids.iter().map(|&i| i + 1).max().unwrap_or(0);
    let mut matrix = vec![false; size * size];
    for e in &graph.edges {
        matrix[e.i as usize * size + e.j as usize] = true;
        matrix[e.j as usize * size + e.i as usize] = true;
    }
    fn rec(
        ids: &[usize],
        size: usize,
        matrix: &[bool],
        pattern: &PatternGraph,
        tuple: &mut Vec<usize>,
    ) -> u64 {
        if tuple.len() == pattern.q() {
            let ok = pattern
                .edges()
                .iter()
                .all(|&(a, b)| matrix[tuple[a] * size + tuple[b]]);
            return ok as u64;
        }
        let mut total = 0;
        for &v in ids {
            if !tuple.contains(&v) {
                tuple.push(v);
                total += rec(ids, size, matrix, pattern, tuple);
                tuple.pop();
            }
        }
        total
    }
    let tuples = rec(
        &ids,
        size,
        &matrix,
        pattern,
        &mut Vec::with_capacity(pattern.q()),
    );
    Ok(subgraph_value(tuples, pattern))
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `S^(τ) = Σ_{edges} length^τ`.
pub fn powered_edge_length(graph: &WrcmGraph, tau: f64) -> FunctionalValue {
    let mut acc = NeumaierSum::default();
    for e in &graph.edges {
        acc.add(e.length.powf(tau));
    }
    FunctionalValue {
        kind: FunctionalKind::EdgePower,
        value: acc.value(),
        parameter: format!("tau={tau}"),
        tuples: None,
        note: EDGE_NOTE,
    }
}

/// `Σ_{edges} |B_length|^{τ_b}` in dimension `d`.
pub fn ball_volume_power_length(graph: &WrcmGraph, tau_ball: f64, d: usize) -> FunctionalValue {
    let b1 = unit_ball_volume(d);
    let mut acc = NeumaierSum::default();
    for e in &graph.edges {
        acc.add((b1 * e.length.powi(d as i32)).powf(tau_ball));
    }
    FunctionalValue {
        kind: FunctionalKind::BallVolumePower,
        value: acc.value(),
        parameter: format!("tau_ball={tau_ball}"),
        tuples: None,
        note: EDGE_NOTE,
    }
}

/// Rows `(replication_index, kind, parameter, value)`.
pub fn write_replication_csv<W: Write>(out: W, rows: &[(usize, FunctionalValue)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["replication_index", "kind", "parameter", "value"])
        .map_err(csv_err)?;
    for (i, v) in rows {
        w.write_record([
            i.to_string(),
            v.kind.as_str().to_string(),
            v.parameter.clone(),
            v.value.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::process::{MarkedPoint, PointSample};

    pub(crate) fn host(n: usize, edges: &[(u64, u64)]) -> WrcmGraph {
        let points = (0..n)
            .map(|i| MarkedPoint {
                id: i as u64,
                location: vec![i as f64],
                weight: 1.0,
            })
            .collect();
        let mut e: Vec<Edge> = edges
            .iter()
            .map(|&(a, b)| Edge {
                i: a.min(b),
                j: a.max(b),
                length: (a as f64 - b as f64).abs(),
            })
            .collect();
        e.sort_by_key(|e| (e.i, e.j));
        WrcmGraph {
            points: PointSample {
                points,
                process_label: "test".into(),
                seed_used: 0,
            },
            edges: e,
            truncation_bias_bound: 0.0,
        }
    }

    #[test]
    fn pattern_validation() {
        assert!(PatternGraph::new(1, &[]).is_err());
        assert!(PatternGraph::new(3, &[(0, 1)]).is_err());
        assert!(PatternGraph::new(2, &[(0, 0)]).is_err());
        assert!(PatternGraph::new(2, &[(0, 1), (1, 0)]).is_err());
        assert_eq!(PatternGraph::triangle().describe(), "q=3;1-2,1-3,2-3");
    }

    #[test]
    fn worked_examples() {
        let g = host(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(count_subgraphs(&g, &PatternGraph::single_edge()).value, 3.0);
        let tri = host(3, &[(0, 1), (1, 2), (0, 2)]);
        let v = count_subgraphs(&tri, &PatternGraph::triangle());
        assert_eq!((v.tuples, v.value), (Some(6), 1.0));
        let v = count_subgraphs(&tri, &PatternGraph::path(3));
        assert_eq!((v.tuples, v.value), (Some(6), 1.0));
        assert_eq!(
            brute_force_count(&host(2, &[(0, 1)]), &PatternGraph::triangle())
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            brute_force_count(&host(5, &[]), &PatternGraph::single_edge())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn brute_force_guard() {
        let g = host(301, &[]);
        assert!(matches!(
            brute_force_count(&g, &PatternGraph::single_edge()),
            Err(Error::Guard(_))
        ));
    }

    #[test]
    fn edge_powers() {
        let g = host(3, &[(0, 2)]);
        assert_eq!(powered_edge_length(&g, 3.0).value, 8.0);
        assert_eq!(powered_edge_length(&g, 0.0).value, 1.0);
        let g = host(2, &[(0, 1)]);
        assert!((ball_volume_power_length(&g, 2.0, 1).value - 4.0).abs() < 1e-12);
        assert_eq!(ball_volume_power_length(&g, 0.0, 1).value, 1.0);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut s = NeumaierSum::default();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-13).abs() < 1e-24);
    }
}
