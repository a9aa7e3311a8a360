//! Verification suites behind `wrcm verify`.

use serde::Serialize;
use serde_json::{json, Value};
use wrcm_core::bounds::{
    default_mphi_grid, default_mu_grid, derive_theorem_params, factorial_inequality_holds,
    fit_condition_constants, variance_lower_bound_edge, variance_lower_bound_subgraph,
    MomentSubject, Theorem, VarianceBound,
};
use wrcm_core::config::{
    default_grid, validate_kernel_grid, DppKernelFamily, DppKernelSpec, SimulationConfig,
    VertexProcess,
};
use wrcm_core::partitions::{
    count_pim, enumerate_pim, partition_count_bound_check, product_density, PartitionClass,
};
use wrcm_core::stats::{
    ci_envelope, concentration_check, cumulant_scaling_fit, k_statistics, ks_normal_distance,
    mc_integral_bound_check, run_replications, FunctionalChoice, ReplicationBatch, ScalingPoint,
    Verdict, REPORT_SCHEMA_VERSION, SURROGATE_NOTE,
};
use wrcm_core::{Error, Result};

/// One-sided 99% normal quantile.
const Z_99: f64 = 2.326_347_874_040_840_8;
pub const KS_LIMIT: f64 = 0.05;
pub const VARIANCE_CONTROL_FACTOR: f64 = 100.0;
pub const DELTA_CONTROL_FACTOR: f64 = 1e6;
pub const CONCENTRATION_Z: [f64; 3] = [1.0, 2.0, 3.0];
pub const INTEGRAL_SAMPLES: usize = 20_000;
const SWEEP_FACTORS: [f64; 5] = [0.5, 1.0, 2.0, 4.0, 8.0];
const BOOTSTRAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Moments,
    Partitions,
    Variance,
    Scaling,
    Clt,
    Concentration,
    IntegralBounds,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Moments => "moments",
            Suite::Partitions => "partitions",
            Suite::Variance => "variance",
            Suite::Scaling => "scaling",
            Suite::Clt => "clt",
            Suite::Concentration => "concentration",
            Suite::IntegralBounds => "integral-bounds",
            Suite::All => "all",
        }
    }

    pub fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Moments,
                Suite::Partitions,
                Suite::Variance,
                Suite::Scaling,
                Suite::Clt,
                Suite::Concentration,
                Suite::IntegralBounds,
            ],
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub schema_version: u32,
    pub suite: &'static str,
    pub name: String,
    pub verdict: Verdict,
    pub detail: Value,
    /// Extra data files written next to the check's JSON.
    #[serde(skip)]
    pub files: Vec<(String, Vec<u8>)>,
}

fn check(suite: Suite, name: &str, verdict: Verdict, detail: Value) -> Check {
    Check {
        schema_version: REPORT_SCHEMA_VERSION,
        suite: suite.name(),
        name: name.to_string(),
        verdict,
        detail,
        files: Vec::new(),
    }
}

fn inconclusive(suite: Suite, name: &str, reason: impl std::fmt::Display) -> Check {
    check(
        suite,
        name,
        Verdict::Inconclusive,
        json!({ "reason": reason.to_string() }),
    )
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

/// Shared state of one `verify` invocation: replication batches are drawn
/// once and reused across suites.
pub struct Verifier<'a> {
    config: &'a SimulationConfig,
    workers: usize,
    subgraph: Option<ReplicationBatch>,
    edge_power: Option<ReplicationBatch>,
}

impl<'a> Verifier<'a> {
    pub fn new(config: &'a SimulationConfig, workers: usize) -> Self {
        Verifier {
            config,
            workers,
            subgraph: None,
            edge_power: None,
        }
    }

    fn batch(&mut self, functional: FunctionalChoice) -> Result<&ReplicationBatch> {
        let slot = match functional {
            FunctionalChoice::Subgraph => &mut self.subgraph,
            FunctionalChoice::EdgePower => &mut self.edge_power,
        };
        if slot.is_none() {
            eprintln!(
                "running {} replications of {}",
                self.config.replications,
                functional.as_str()
            );
            *slot = Some(run_replications(
                self.config,
                functional,
                self.config.replications,
                self.workers,
            )?);
        }
        Ok(slot.as_ref().unwrap())
    }

    pub fn run(&mut self, suite: Suite) -> Result<Vec<Check>> {
        match suite {
            Suite::Moments => Ok(self.moments()),
            Suite::Partitions => self.partitions(),
            Suite::Variance => self.variance(),
            Suite::Scaling => self.scaling(),
            Suite::Clt => self.clt(),
            Suite::Concentration => self.concentration(),
            Suite::IntegralBounds => self.integral_bounds(),
            Suite::All => {
                let mut out = Vec::new();
                for s in suite.members() {
                    out.extend(self.run(s)?);
                }
                Ok(out)
            }
        }
    }

    fn moments(&self) -> Vec<Check> {
        let c = self.config;
        let s = Suite::Moments;
        let mut out = Vec::new();
        let c_u2 = c.bounds.c_u2.or(c.weights.default_c2()).unwrap_or(1.0);
        out.push(
            match fit_condition_constants(
                MomentSubject::Weights(&c.weights),
                c_u2,
                &default_mu_grid(),
            ) {
                Ok(r) => check(s, "weights-mu", Verdict::from_bool(r.pass), to_json(&r)),
                Err(e) => inconclusive(s, "weights-mu", e),
            },
        );
        let c_phi2 = c.bounds.c_phi2.unwrap_or_else(|| c.profile.default_c2());
        out.push(
            match fit_condition_constants(
                MomentSubject::Profile(&c.profile),
                c_phi2,
                &default_mphi_grid(),
            ) {
                Ok(r) => check(s, "profile-mphi", Verdict::from_bool(r.pass), to_json(&r)),
                Err(e) => inconclusive(s, "profile-mphi", e),
            },
        );
        let grid = validate_kernel_grid(&c.kernel, &default_grid());
        out.push(check(
            s,
            "kernel-grid",
            Verdict::from_bool(grid.pass),
            to_json(&grid),
        ));
        out
    }

    fn partitions(&self) -> Result<Vec<Check>> {
        let s = Suite::Partitions;
        let mut out = Vec::new();

        let mut reports = Vec::new();
        for m in 1..=12 {
            for q in 1..=12 / m {
                reports.push(partition_count_bound_check(m, q)?);
            }
        }
        let holds = reports.iter().all(|r| r.holds);
        out.push(check(
            s,
            "count-bound-chain",
            Verdict::from_bool(holds),
            to_json(&reports),
        ));

        let all22 = count_pim(2, 2, PartitionClass::All)?;
        let conn22 = count_pim(2, 2, PartitionClass::ConnectedMinBlockTwo)?;
        let canonical: Vec<String> = enumerate_pim(2, 2, PartitionClass::ConnectedMinBlockTwo)?
            .iter()
            .map(|p| p.to_canonical_string())
            .collect();
        out.push(check(
            s,
            "small-counts",
            Verdict::from_bool(all22 == 7 && conn22 == 2),
            json!({ "all_m2_q2": all22, "connected_min_two_m2_q2": conn22, "connected_min_two": canonical }),
        ));

        let failing: Vec<(u32, u32)> = (1..=8)
            .flat_map(|c| (1..=8).map(move |k| (c, k)))
            .filter(|&(c, k)| !factorial_inequality_holds(c, k))
            .collect();
        out.push(check(
            s,
            "factorial-inequality",
            Verdict::from_bool(failing.is_empty()),
            json!({ "c_max": 8, "k_max": 8, "failing": failing }),
        ));

        let kernel = match &self.config.vertex_process {
            VertexProcess::AlphaDpp(k) => k.clone(),
            VertexProcess::Poisson => DppKernelSpec {
                alpha: -1.0,
                k0_origin: 1.0,
                kernel: DppKernelFamily::Gaussian { scale: 0.3 },
                field_points_per_scale: 16,
            },
        };
        let d = self.config.dim();
        let mut worst: f64 = 0.0;
        for r in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let x = vec![0.0; d];
            let mut y = vec![0.0; d];
            y[0] = r;
            let k = kernel.eval(&x, &y);
            let exact = kernel.k0_origin.powi(2) + kernel.alpha * k * k;
            let got = product_density(2, &[x, y], &kernel)?;
            worst = worst.max((got - exact).abs());
        }
        out.push(check(
            s,
            "second-product-density",
            Verdict::from_bool(worst <= 1e-12),
            json!({ "alpha": kernel.alpha, "max_abs_error": worst }),
        ));
        Ok(out)
    }

    fn variance(&mut self) -> Result<Vec<Check>> {
        let s = Suite::Variance;
        let alpha = self.config.vertex_process.dpp().map_or(0.0, |k| k.alpha);
        if alpha < 0.0 {
            return Ok(vec![inconclusive(
                s,
                "variance",
                "variance lower bounds need α ≥ 0",
            )]);
        }
        let eps = self.config.bounds.epsilon;
        let edge = variance_lower_bound_edge(self.config, eps)?;
        let sub = variance_lower_bound_subgraph(self.config, eps)?;
        let mut out = Vec::new();
        let mut rejected = Vec::new();
        for (name, functional, bound) in [
            ("edge-power", FunctionalChoice::EdgePower, edge),
            ("subgraph", FunctionalChoice::Subgraph, sub),
        ] {
            let (c, control_rejected) = variance_check(name, self.batch(functional)?, &bound)?;
            rejected.push(control_rejected);
            out.push(c);
        }
        out.push(check(
            s,
            "negative-control",
            Verdict::from_bool(rejected.iter().all(|&r| r)),
            json!({ "factor": VARIANCE_CONTROL_FACTOR, "rejected": rejected }),
        ));
        Ok(out)
    }

    fn sweep_points(&self) -> Result<Vec<SimulationConfig>> {
        let c = self.config;
        let product = c
            .bounds
            .sweep_product
            .unwrap_or(c.intensity * c.volume_scale);
        let n = c.bounds.sweep_replications.unwrap_or(c.replications);
        SWEEP_FACTORS
            .iter()
            .map(|f| {
                let mut p = c.clone();
                p.intensity = c.intensity * f;
                p.volume_scale = product / p.intensity;
                p.replications = n;
                p.finalize()
            })
            .collect()
    }

    fn scaling(&self) -> Result<Vec<Check>> {
        let s = Suite::Scaling;
        if self.config.vertex_process.dpp().is_some() {
            return Ok(vec![inconclusive(
                s,
                "slope",
                "the intensity sweep needs a Poisson vertex process",
            )]);
        }
        let configs = self.sweep_points()?;
        let mut points = Vec::new();
        for p in &configs {
            eprintln!(
                "sweep point t = {}: {} replications",
                p.intensity, p.replications
            );
            let b = run_replications(p, FunctionalChoice::Subgraph, p.replications, self.workers)?;
            points.push(ScalingPoint {
                x: p.intensity,
                values: b.values,
            });
        }
        let envelope: Option<(f64, Vec<f64>)> = configs
            .iter()
            .map(|p| derive_theorem_params(p, Theorem::Subgraph).ok())
            .collect::<Option<Vec<_>>>()
            .map(|d| (d[0].params.a, d.iter().map(|x| x.params.beta_n).collect()));
        let mut out = Vec::new();
        for (m, tol) in [(3, 0.15), (4, 0.25)] {
            let name = format!("slope-m{m}");
            let fit = match cumulant_scaling_fit(&points, m, BOOTSTRAP, self.config.master_seed) {
                Ok(f) => f,
                Err(e) => {
                    out.push(inconclusive(s, &name, e));
                    continue;
                }
            };
            let fit = match &envelope {
                Some((a, deltas)) => fit.with_envelopes(*a, deltas),
                None => fit,
            };
            let mut csv = Vec::new();
            fit.write_csv(&mut csv)?;
            let mut c = check(
                s,
                &name,
                Verdict::from_bool(fit.slope_within(tol)),
                json!({ "tolerance": tol, "fit": to_json(&fit) }),
            );
            c.files.push((format!("scaling_m{m}.csv"), csv));
            out.push(c);
        }
        Ok(out)
    }

    fn clt(&mut self) -> Result<Vec<Check>> {
        let s = Suite::Clt;
        let b = self.batch(FunctionalChoice::Subgraph)?;
        Ok(vec![match ks_normal_distance(&b.values) {
            Ok(d) => check(
                s,
                "ks-distance",
                Verdict::from_bool(d < KS_LIMIT),
                json!({ "note": SURROGATE_NOTE, "n": b.len(), "distance": d, "limit": KS_LIMIT }),
            ),
            Err(e) => inconclusive(s, "ks-distance", e),
        }])
    }

    fn concentration(&mut self) -> Result<Vec<Check>> {
        let s = Suite::Concentration;
        let theorem = Theorem::for_process(&self.config.vertex_process, false);
        let derived = match derive_theorem_params(self.config, theorem) {
            Ok(d) => d,
            Err(e) => return Ok(vec![inconclusive(s, "envelope", e)]),
        };
        let (gamma, delta) = (derived.params.a, derived.params.beta_n);
        let b = self.batch(FunctionalChoice::Subgraph)?;
        let report = concentration_check(&b.values, gamma, delta, &CONCENTRATION_Z)?;
        let control = concentration_check(
            &b.values,
            gamma,
            delta * DELTA_CONTROL_FACTOR,
            &CONCENTRATION_Z,
        )?;
        // an envelope of at least one bounds every probability
        let falsifiable = CONCENTRATION_Z
            .iter()
            .any(|&z| ci_envelope(z, gamma, delta * DELTA_CONTROL_FACTOR) < 1.0);
        let mut c = check(
            s,
            "envelope",
            report.verdict,
            json!({
                "theorem": theorem.name(),
                "report": to_json(&report),
                "negative_control": {
                    "delta_factor": DELTA_CONTROL_FACTOR,
                    "falsifiable": falsifiable,
                    "report": to_json(&control),
                },
            }),
        );
        c.files
            .push(("envelope.txt".into(), report.to_text().into_bytes()));
        Ok(vec![c])
    }

    fn integral_bounds(&self) -> Result<Vec<Check>> {
        let s = Suite::IntegralBounds;
        let q = self.config.pattern.q();
        if !(q == 2 || q == 3) || self.config.pattern.edges().len() != q * (q - 1) / 2 {
            return Ok(vec![inconclusive(
                s,
                "integral",
                "the integral check supports the single edge and the triangle",
            )]);
        }
        let mut out = Vec::new();
        for m in 2..=4 {
            if m * q > 8 || (q == 2 && m > 3) {
                continue;
            }
            let mut reports = Vec::new();
            for sigma in enumerate_pim(m, q, PartitionClass::ConnectedMinBlockTwo)? {
                reports.push(mc_integral_bound_check(
                    self.config,
                    &sigma,
                    INTEGRAL_SAMPLES,
                    self.config.master_seed,
                )?);
            }
            let verdict = reports
                .iter()
                .fold(Verdict::Pass, |acc, r| acc.combine(r.verdict));
            out.push(check(s, &format!("m{m}"), verdict, to_json(&reports)));
        }
        Ok(out)
    }
}

/// Empirical variance against a lower bound, and whether the bound inflated
/// by [`VARIANCE_CONTROL_FACTOR`] is rejected.
fn variance_check(
    name: &str,
    batch: &ReplicationBatch,
    bound: &VarianceBound,
) -> Result<(Check, bool)> {
    let k = k_statistics(&batch.values, 2)?;
    let (var, se) = (k.estimates[1], k.std_errors[1]);
    let lower = var - Z_99 * se;
    let inflated = bound.threshold * VARIANCE_CONTROL_FACTOR;
    if bound.threshold.is_nan() || bound.threshold <= 0.0 {
        return Err(Error::precondition(format!(
            "{name}: variance bound is not positive"
        )));
    }
    Ok((
        check(
            Suite::Variance,
            name,
            Verdict::from_bool(lower >= bound.threshold),
            json!({
                "n": batch.len(),
                "variance": var,
                "std_error": se,
                "lower_99": lower,
                "bound": to_json(bound),
                "inflated_threshold": inflated,
            }),
        ),
        lower < inflated,
    ))
}

pub fn overall(checks: &[Check]) -> Verdict {
    checks
        .iter()
        .fold(Verdict::Pass, |acc, c| acc.combine(c.verdict))
}
