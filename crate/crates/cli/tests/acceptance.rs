//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines always reach the test output. Pass
//! criterion numbers to run a subset: `cargo test --test acceptance -- 3 5`.
//!
//! The process exits non-zero when any criterion fails, except for sub-parts
//! listed in [`UNATTAINABLE`], which are still run and reported as FAIL.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use wrcm_core::bounds::{
    default_mphi_grid, default_mu_grid, derive_theorem_params, fit_condition_constants,
    variance_lower_bound_edge, variance_lower_bound_subgraph, MomentSubject, Theorem,
};
use wrcm_core::config::{
    parse_config, DppKernelFamily, DppKernelSpec, ProfileSpec, SimulationConfig, WeightSpec,
};
use wrcm_core::functionals::{count_subgraphs, powered_edge_length};
use wrcm_core::graph::sample_graph_replication;
use wrcm_core::partitions::{
    count_pim, enumerate_pim, partition_count_bound_check, product_density, PartitionClass,
};
use wrcm_core::process::{estimate_pair_correlation, sample_replication};
use wrcm_core::quadrature::integrate;
use wrcm_core::stats::{
    concentration_check, cumulant_scaling_fit, k_statistics, ks_normal_distance,
    mc_integral_bound_check, run_replications, FunctionalChoice, ScalingPoint, Verdict,
};

/// `(criterion, sub-part)` pairs that cannot pass by construction.
///
/// Criterion 7 asks the concentration check to fail once Δ is inflated
/// 10⁶-fold. The envelope `2exp(-¼ min{z²/2^{1+γ}, (zΔ)^{1/(1+γ)}})` then
/// reduces to `2exp(-z²/2^{3+γ})`, which for γ ≥ 0 is at least `2e^{-z²/8}`
/// and exceeds Chebyshev's `1/z²` at z = 1, 2, 3. No law with finite
/// variance can exceed the envelope there.
const UNATTAINABLE: &[(u32, &str)] = &[(7, "negative control")];

/// One-sided 99% normal quantile.
const Z_99: f64 = 2.326_347_874_040_840_8;

struct Part {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Outcome {
    parts: Vec<Part>,
}

impl Outcome {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.parts.push(Part {
            name: name.into(),
            ok,
            detail: detail.into(),
        });
    }
}

// ---- configuration ----------------------------------------------------------

#[derive(Clone)]
struct Cfg {
    side: f64,
    intensity: Option<f64>,
    volume_scale: f64,
    tau: f64,
    profile: &'static str,
    kernel: &'static str,
    weights: String,
    process: String,
    seed: u64,
    replications: usize,
}

impl Cfg {
    /// Poisson vertices on the unit torus with the indicator profile.
    fn classical(intensity: f64, volume_scale: f64) -> Cfg {
        Cfg {
            side: 1.0,
            intensity: Some(intensity),
            volume_scale,
            tau: 0.0,
            profile: "indicator",
            kernel: "unit",
            weights: "family = \"constant-one\"".into(),
            process: "kind = \"poisson\"".into(),
            seed: 20240601,
            replications: 1000,
        }
    }

    fn dpp(mut self, alpha: f64, scale: f64) -> Cfg {
        self.intensity = None;
        self.process = format!(
            "kind = \"alpha-dpp\"\nalpha = {alpha:?}\nk0_origin = 1.0\n[vertex_process.kernel]\nfamily = \"gaussian\"\nscale = {scale:?}"
        );
        self
    }

    fn toml(&self) -> String {
        let intensity = self
            .intensity
            .map_or(String::new(), |t| format!("intensity = {t:?}\n"));
        format!(
            "spec_version = 1\n[window]\nsides = [{s:?}, {s:?}]\nboundary = \"torus\"\n\
             [model]\n{intensity}volume_scale = {nu:?}\ntau = {tau:?}\n\
             [profile]\nfamily = \"{profile}\"\n[kernel]\nfamily = \"{kernel}\"\n\
             [weights]\n{weights}\n[vertex_process]\n{process}\n\
             [pattern]\nq = 2\nedges = [[1, 2]]\n\
             [run]\nmaster_seed = {seed}\nreplications = {n}\n",
            s = self.side,
            nu = self.volume_scale,
            tau = self.tau,
            profile = self.profile,
            kernel = self.kernel,
            weights = self.weights,
            process = self.process,
            seed = self.seed,
            n = self.replications,
        )
    }

    fn build(&self) -> SimulationConfig {
        parse_config(&self.toml()).unwrap_or_else(|e| panic!("{e}\n{}", self.toml()))
    }
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn batch(config: &SimulationConfig, f: FunctionalChoice, n: usize) -> Vec<f64> {
    run_replications(config, f, n, 0)
        .expect("replications run")
        .values
}

/// Edge counts and powered edge lengths from the same `n` graphs.
fn count_and_length(config: &SimulationConfig, n: usize) -> (Vec<f64>, Vec<f64>) {
    (0..n as u64)
        .into_par_iter()
        .map(|r| {
            let g = sample_graph_replication(config, r).expect("sampler runs");
            (
                count_subgraphs(&g, &config.pattern).value,
                powered_edge_length(&g, config.tau).value,
            )
        })
        .unzip()
}

// ---- criterion 1 --------------------------------------------------------------

#[derive(Default, Clone, Copy, PartialEq, Debug)]
struct ClassCounts {
    all: u64,
    min_two: u64,
    connected: u64,
    connected_min_two: u64,
}

/// Walk every set partition of `0..mq` as a restricted growth string and
/// classify it at the leaf.
fn brute_force_counts(
    m: usize,
    q: usize,
    keep: &mut dyn FnMut(&[usize], bool, bool),
) -> ClassCounts {
    fn rows_connected(m: usize, q: usize, rgs: &[usize]) -> bool {
        let blocks = rgs.iter().max().map_or(0, |b| b + 1);
        let mut row_of_block = vec![Vec::new(); blocks];
        for (e, &b) in rgs.iter().enumerate() {
            row_of_block[b].push(e / q);
        }
        let mut reached = vec![false; m];
        reached[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for rows in &row_of_block {
                if rows.iter().any(|&r| reached[r]) {
                    for &r in rows {
                        if !reached[r] {
                            reached[r] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        reached.iter().all(|&r| r)
    }

    fn walk(
        m: usize,
        q: usize,
        rgs: &mut Vec<usize>,
        next_block: usize,
        counts: &mut ClassCounts,
        keep: &mut dyn FnMut(&[usize], bool, bool),
    ) {
        let n = m * q;
        if rgs.len() == n {
            let rows_ok = (0..m).all(|r| {
                let row = &rgs[r * q..(r + 1) * q];
                (0..q).all(|i| (i + 1..q).all(|j| row[i] != row[j]))
            });
            if !rows_ok {
                return;
            }
            let mut sizes = vec![0usize; next_block];
            for &b in rgs.iter() {
                sizes[b] += 1;
            }
            let min_two = sizes.iter().all(|&s| s >= 2);
            let connected = rows_connected(m, q, rgs);
            counts.all += 1;
            counts.min_two += min_two as u64;
            counts.connected += connected as u64;
            counts.connected_min_two += (min_two && connected) as u64;
            keep(rgs, min_two, connected);
            return;
        }
        for b in 0..=next_block {
            rgs.push(b);
            walk(m, q, rgs, next_block.max(b + 1), counts, keep);
            rgs.pop();
        }
    }

    let mut counts = ClassCounts::default();
    walk(m, q, &mut Vec::with_capacity(m * q), 0, &mut counts, keep);
    counts
}

/// 1-based blocks in order of their smallest element.
fn canonical(rgs: &[usize]) -> String {
    let blocks = rgs.iter().max().map_or(0, |b| b + 1);
    (0..blocks)
        .map(|b| {
            let elems: Vec<String> = rgs
                .iter()
                .enumerate()
                .filter(|(_, &x)| x == b)
                .map(|(e, _)| (e + 1).to_string())
                .collect();
            format!("{{{}}}", elems.join(","))
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn criterion_1(o: &mut Outcome) {
    let classes = [
        PartitionClass::All,
        PartitionClass::MinBlockTwo,
        PartitionClass::Connected,
        PartitionClass::ConnectedMinBlockTwo,
    ];
    let mut mismatches = Vec::new();
    let mut instances = 0;
    let mut chain_ok = true;
    for m in 1..=12 {
        for q in 1..=12 / m {
            instances += 1;
            let list_sets = m * q <= 9;
            let mut sets: BTreeMap<&str, HashSet<String>> = BTreeMap::new();
            let brute = brute_force_counts(m, q, &mut |rgs, min_two, connected| {
                if list_sets {
                    let s = canonical(rgs);
                    sets.entry("all").or_default().insert(s.clone());
                    if min_two && connected {
                        sets.entry("cm2").or_default().insert(s);
                    }
                }
            });
            let got = ClassCounts {
                all: count_pim(m, q, classes[0]).unwrap(),
                min_two: count_pim(m, q, classes[1]).unwrap(),
                connected: count_pim(m, q, classes[2]).unwrap(),
                connected_min_two: count_pim(m, q, classes[3]).unwrap(),
            };
            if got != brute {
                mismatches.push(format!("({m},{q}): {got:?} vs {brute:?}"));
            }
            if list_sets {
                for (key, class) in [("all", classes[0]), ("cm2", classes[3])] {
                    let listed: HashSet<String> = enumerate_pim(m, q, class)
                        .unwrap()
                        .iter()
                        .map(|p| p.to_canonical_string())
                        .collect();
                    if listed != sets.remove(key).unwrap_or_default() {
                        mismatches.push(format!("({m},{q}) {key}: listing differs"));
                    }
                }
            }
            // |Π̃_{≥2}| ≤ |Π| ≤ q^{qm}(m!)^q, bound recomputed here
            let m_fact: u128 = (1..=m as u128).product();
            let bound = (q as u128).pow((q * m) as u32) * m_fact.pow(q as u32);
            let report = partition_count_bound_check(m, q).unwrap();
            chain_ok &= brute.connected_min_two <= brute.all
                && (brute.all as u128) <= bound
                && report.holds
                && report.bound == bound;
        }
    }
    o.check(
        "enumeration matches brute force",
        mismatches.is_empty(),
        format!(
            "{instances} instances with mq <= 12; {}",
            mismatches.join("; ")
        ),
    );
    let small = (
        count_pim(2, 2, PartitionClass::All).unwrap(),
        count_pim(2, 2, PartitionClass::ConnectedMinBlockTwo).unwrap(),
    );
    o.check(
        "small counts",
        small == (7, 2),
        format!("|Pi^2(2)| = {}, connected min-two = {}", small.0, small.1),
    );
    o.check("counting bound chain", chain_ok, "all instances");
}

// ---- criterion 2 --------------------------------------------------------------

/// Determinant by LU with partial pivoting.
fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}

fn gaussian_kernel(alpha: f64, k0: f64, scale: f64) -> DppKernelSpec {
    DppKernelSpec {
        alpha,
        k0_origin: k0,
        kernel: DppKernelFamily::Gaussian { scale },
        field_points_per_scale: 16,
    }
}

/// Ring average of `g(r) = 1 + α·exp(-r²/s²)` over `a ≤ r < b` in the plane.
fn ring_pcf(alpha: f64, s: f64, a: f64, b: f64) -> f64 {
    let mass = PI * s * s * ((-a * a / (s * s)).exp() - (-b * b / (s * s)).exp());
    1.0 + alpha * mass / (PI * (b * b - a * a))
}

fn criterion_2(o: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst2: f64 = 0.0;
    for alpha in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let k = gaussian_kernel(alpha, 0.8, 0.3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let kxy = k.eval(&x, &y);
            let want = 0.8 * 0.8 + alpha * kxy * kxy;
            let got = product_density(2, &[x, y], &k).unwrap();
            worst2 = worst2.max((got - want).abs());
        }
    }
    o.check(
        "second product density",
        worst2 <= 1e-12,
        format!("max abs error {worst2:.2e}"),
    );

    let k = gaussian_kernel(-1.0, 0.9, 0.4);
    let mut worst_det: f64 = 0.0;
    for size in 1..=6 {
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..size)
                .map(|_| (0..2).map(|_| rng.random_range(0.0..0.8)).collect())
                .collect();
            let matrix: Vec<Vec<f64>> = pts
                .iter()
                .map(|x| pts.iter().map(|y| k.eval(x, y)).collect())
                .collect();
            let want = determinant(matrix);
            let got = product_density(size, &pts, &k).unwrap();
            worst_det = worst_det.max((got - want).abs());
        }
    }
    o.check(
        "determinant oracle, k <= 6",
        worst_det <= 1e-10,
        format!("max abs error {worst_det:.2e}"),
    );

    let scale = 0.3;
    let edges: Vec<f64> = (0..=12).map(|i| 0.05 + 0.1 * i as f64).collect();
    for alpha in [-1.0, 1.0] {
        let mut cfg = Cfg::classical(1.0, 0.1).dpp(alpha, scale);
        cfg.side = 10.0;
        cfg.seed = 22;
        let config = cfg.build();
        let samples: Vec<_> = (0..500)
            .map(|r| sample_replication(&config, r).expect("sampler runs"))
            .collect();
        let bins = estimate_pair_correlation(&samples, &config.window, &edges).unwrap();
        let mut worst: f64 = 0.0;
        let mut ok = true;
        let mut zs = Vec::new();
        for b in &bins {
            let want = ring_pcf(alpha, scale, b.r_lo, b.r_hi);
            match (b.estimate, b.std_error) {
                (Some(est), Some(se)) if se > 0.0 => {
                    let z = (est - want) / se;
                    zs.push(format!("{z:.2}"));
                    worst = worst.max(z.abs());
                    ok &= z.abs() <= 3.0;
                }
                _ => ok = false,
            }
        }
        o.check(
            format!("pair correlation alpha = {alpha}"),
            ok,
            format!(
                "{} bins, worst |z| = {worst:.2}, z = [{}]",
                bins.len(),
                zs.join(", ")
            ),
        );
    }
}

// ---- criterion 3 --------------------------------------------------------------

fn criterion_3(o: &mut Outcome) {
    let (t, nu) = (200.0, 0.02);
    let mut cfg = Cfg::classical(t, nu);
    cfg.tau = 1.0;
    let config = cfg.build();
    let n = 1000;

    let counts = batch(&config, FunctionalChoice::Subgraph, n);
    let (mean, se) = mean_se(&counts);
    let want = 0.5 * t * t * nu;
    o.check(
        "mean edge count",
        (mean - want).abs() <= 3.0 * se,
        format!("{mean:.3} vs {want} (se {se:.3})"),
    );

    // E Σ|e| = ½t²|W| ∫ φ(|B_r|/ν)|x| dx
    let profile = &config.profile;
    let r_end = (profile.support_end().unwrap() * nu / PI).sqrt();
    let radial = integrate(
        |r| profile.eval(PI * r * r / nu) * r * 2.0 * PI * r,
        0.0,
        r_end,
        1e-12,
        0.0,
    );
    let closed = 2.0 * PI * r_end.powi(3) / 3.0;
    let oracle = 0.5 * t * t * config.volume * radial;
    let lengths = batch(&config, FunctionalChoice::EdgePower, n);
    let (mean, se) = mean_se(&lengths);
    o.check(
        "mean total edge length",
        (mean - oracle).abs() <= 3.0 * se && (radial / closed - 1.0).abs() < 1e-9,
        format!(
            "{mean:.4} vs quadrature {oracle:.4} (se {se:.4}, closed form {:.4})",
            0.5 * t * t * closed
        ),
    );
}

// ---- criterion 4 --------------------------------------------------------------

fn criterion_4(o: &mut Outcome) {
    let config = Cfg::classical(100.0, 0.01).build();
    let counts: Vec<f64> = (0..10_000)
        .map(|r| sample_replication(&config, r).unwrap().len() as f64)
        .collect();
    let report = k_statistics(&counts, 4).unwrap();
    let zs: Vec<f64> = (0..4)
        .map(|i| (report.estimates[i] - 100.0) / report.std_errors[i])
        .collect();
    o.check(
        "k-statistics of Poisson(100) counts",
        zs.iter().all(|z| z.abs() <= 5.0),
        format!(
            "k1..k4 = {:?}, z = {:?}",
            report
                .estimates
                .iter()
                .map(|k| format!("{k:.2}"))
                .collect::<Vec<_>>(),
            zs.iter().map(|z| format!("{z:.2}")).collect::<Vec<_>>()
        ),
    );
}

// ---- criterion 5 --------------------------------------------------------------

fn criterion_5(o: &mut Outcome) {
    let product = 0.002;
    let points: Vec<ScalingPoint> = [100.0, 200.0, 400.0, 800.0, 1600.0]
        .iter()
        .map(|&t| {
            let mut cfg = Cfg::classical(t, product / t);
            cfg.seed = 55;
            ScalingPoint {
                x: t,
                values: batch(&cfg.build(), FunctionalChoice::Subgraph, 4000),
            }
        })
        .collect();
    for (m, tol) in [(3, 0.15), (4, 0.25)] {
        let fit = cumulant_scaling_fit(&points, m, 200, 5).unwrap();
        o.check(
            format!("slope of standardized k{m}"),
            fit.slope_within(tol),
            format!(
                "{:.4} vs {:.1} +- {tol} (95% CI {:.3} .. {:.3})",
                fit.slope, fit.expected_slope, fit.slope_ci.0, fit.slope_ci.1
            ),
        );
    }
}

// ---- criterion 6 --------------------------------------------------------------

fn criterion_6(o: &mut Outcome) {
    let mut poisson = Cfg::classical(200.0, 0.02);
    poisson.tau = 1.0;
    let mut permanental = Cfg::classical(1.0, 0.5).dpp(1.0, 0.5);
    permanental.side = 20.0;
    permanental.tau = 1.0;
    for (label, cfg) in [("alpha = 0", poisson), ("alpha = 1", permanental)] {
        let config = cfg.build();
        assert!(config.profile.eval(config.profile.default_epsilon()) > 0.0);
        let (counts, lengths) = count_and_length(&config, 4000);
        for (name, values, bound) in [
            (
                "edge count",
                counts,
                variance_lower_bound_subgraph(&config, None).unwrap(),
            ),
            (
                "edge length",
                lengths,
                variance_lower_bound_edge(&config, None).unwrap(),
            ),
        ] {
            let k = k_statistics(&values, 2).unwrap();
            let lower = k.estimates[1] - Z_99 * k.std_errors[1];
            o.check(
                format!("{label} {name} variance bound"),
                lower >= bound.threshold,
                format!("99% lower {lower:.4} vs threshold {:.4}", bound.threshold),
            );
            o.check(
                format!("{label} {name} inflated bound rejected"),
                lower < 100.0 * bound.threshold,
                format!(
                    "99% lower {lower:.4} vs 100x threshold {:.4}",
                    100.0 * bound.threshold
                ),
            );
        }
    }
}

// ---- criterion 7 --------------------------------------------------------------

fn criterion_7(o: &mut Outcome) {
    let mut cfg = Cfg::classical(500.0, 0.02);
    cfg.seed = 77;
    let config = cfg.build();
    let values = batch(&config, FunctionalChoice::Subgraph, 2000);
    let ks = ks_normal_distance(&values).unwrap();
    o.check("KS distance", ks < 0.05, format!("{ks:.4} < 0.05"));

    let derived = derive_theorem_params(&config, Theorem::Subgraph).unwrap();
    let (gamma, delta) = (derived.params.a, derived.params.beta_n);
    let z = [1.0, 2.0, 3.0];
    let report = concentration_check(&values, gamma, delta, &z).unwrap();
    o.check(
        "concentration",
        report.verdict == Verdict::Pass,
        format!("gamma {gamma}, Delta {delta:.4e}"),
    );
    let control = concentration_check(&values, gamma, delta * 1e6, &z).unwrap();
    let worst = control
        .rows
        .iter()
        .map(|r| r.envelope)
        .fold(f64::INFINITY, f64::min);
    o.check(
        "negative control",
        control.verdict == Verdict::Fail,
        format!(
            "verdict {}, smallest envelope {worst:.3}",
            control.verdict.as_str()
        ),
    );
}

// ---- criterion 8 --------------------------------------------------------------

fn criterion_8(o: &mut Outcome) {
    for profile in ["indicator", "exponential"] {
        for kernel in ["unit", "product"] {
            let mut cfg = Cfg::classical(50.0, 0.02);
            cfg.profile = profile;
            cfg.kernel = kernel;
            if kernel == "product" {
                cfg.weights = "family = \"shifted-exponential\"\nrate = 2.0".into();
            }
            let config = cfg.build();
            let mut worst: f64 = 0.0;
            let mut verdicts = Vec::new();
            for m in [2, 3] {
                for sigma in enumerate_pim(m, 2, PartitionClass::ConnectedMinBlockTwo).unwrap() {
                    let r = mc_integral_bound_check(&config, &sigma, 20_000, 8).unwrap();
                    worst = worst.max(r.lhs / r.rhs);
                    verdicts.push(r.verdict);
                }
            }
            o.check(
                format!("{profile} profile, {kernel} kernel"),
                verdicts.iter().all(|v| *v == Verdict::Pass),
                format!("{} partitions, max lhs/rhs {worst:.3}", verdicts.len()),
            );
        }
    }
}

// ---- criterion 9 --------------------------------------------------------------

fn data_files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.jsonl" {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn criterion_9(o: &mut Outcome) {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/reference.toml");
    let tmp = tempfile::tempdir().unwrap();
    let sweep = tmp.path().join("sweep.toml");
    fs::write(
        &sweep,
        "parameter = \"intensity\"\nvalues = [50.0, 100.0, 200.0, 400.0, 800.0]\nhold_product = true\nreplications = 300\nbootstrap = 50\n",
    )
    .unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["sample", "--replication", "3"],
        vec!["graph", "--replication", "3"],
        vec!["compute", "--replications", "500"],
        vec![
            "compute",
            "--functional",
            "edge-power",
            "--replications",
            "500",
        ],
        vec!["sweep", "--sweep", sweep.to_str().unwrap()],
        vec!["bounds"],
        vec!["partitions", "--m", "3", "--q", "3", "--list"],
        vec!["verify", "--suite", "all"],
    ];
    let run = |workers: &str, tag: &str| -> Vec<BTreeMap<PathBuf, Vec<u8>>> {
        commands
            .iter()
            .enumerate()
            .map(|(i, args)| {
                let out = tmp.path().join(format!("{tag}_{i}"));
                let status = Command::new(env!("CARGO_BIN_EXE_wrcm"))
                    .arg("--config")
                    .arg(&config)
                    .args(["--workers", workers, "--out"])
                    .arg(&out)
                    .args(args)
                    .output()
                    .unwrap()
                    .status;
                assert!(status.success(), "{args:?} at {workers} workers: {status}");
                data_files(&out)
            })
            .collect()
    };
    let one = run("1", "a");
    let one_again = run("1", "b");
    let eight = run("8", "c");
    let files: usize = one.iter().map(|m| m.len()).sum();
    o.check(
        "repeat at 1 worker",
        one == one_again,
        format!("{files} files"),
    );
    o.check("1 vs 8 workers", one == eight, format!("{files} files"));
}

// ---- criterion 10 -------------------------------------------------------------

fn criterion_10(o: &mut Outcome) {
    let one = fit_condition_constants(
        MomentSubject::Weights(&WeightSpec::ConstantOne),
        0.0,
        &default_mu_grid(),
    )
    .unwrap();
    o.check(
        "constant-one weights",
        one.pass && (one.c1_fitted - 1.0).abs() < 1e-12,
        format!("c1 = {}, c2 = 0", one.c1_fitted),
    );
    let exp = WeightSpec::ShiftedExponential { rate: 1.0 };
    let r = fit_condition_constants(MomentSubject::Weights(&exp), 1.0, &default_mu_grid()).unwrap();
    o.check(
        "shifted-exponential weights at c2 = 1",
        r.pass,
        format!("c1 = {:.4}", r.c1_fitted),
    );
    let ind = fit_condition_constants(
        MomentSubject::Profile(&ProfileSpec::Indicator),
        0.0,
        &default_mphi_grid(),
    )
    .unwrap();
    o.check(
        "indicator profile",
        ind.pass && ind.c1_fitted <= 1.0 + 1e-12,
        format!("c_phi1 = {}, c_phi2 = 0", ind.c1_fitted),
    );
    let pareto = WeightSpec::ShiftedPareto { shape: 3.0 };
    let p =
        fit_condition_constants(MomentSubject::Weights(&pareto), 1.0, &default_mu_grid()).unwrap();
    o.check(
        "pareto negative control",
        !p.pass && p.failing_x.is_some(),
        format!("pass = {}, failing x = {:?}", p.pass, p.failing_x),
    );
}

// ---- driver -----------------------------------------------------------------

type Criterion = fn(&mut Outcome);

fn main() {
    let criteria: [(u32, Criterion); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut unexpected = 0;
    for (n, f) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = Outcome::default();
        f(&mut outcome);
        let secs = start.elapsed().as_secs_f64();
        let pass = outcome.parts.iter().all(|p| p.ok);
        println!(
            "criterion {n}: {} ({secs:.1} s)",
            if pass { "PASS" } else { "FAIL" }
        );
        for p in &outcome.parts {
            let known = UNATTAINABLE.contains(&(n, p.name.as_str()));
            println!(
                "    {} {}: {}{}",
                if p.ok { "pass" } else { "FAIL" },
                p.name,
                p.detail,
                if !p.ok && known {
                    " [unattainable, see UNATTAINABLE]"
                } else {
                    ""
                }
            );
            if !p.ok && !known {
                unexpected += 1;
            }
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} acceptance checks failed");
        std::process::exit(1);
    }
}
