//! Parameter sweeps feeding the cumulant scaling fit.
//!
//! A sweep spec is a small TOML file:
//!
//! ```toml
//! parameter = "intensity"   # or "volume_scale"
//! values = [100.0, 200.0, 400.0, 800.0, 1600.0]
//! hold_product = true       # keep t·ν at its template value
//! functional = "subgraph"   # or "edge-power"
//! replications = 4000
//! orders = [3, 4]
//! bootstrap = 200
//! ```
//!
//! Each point writes `point_XX.csv` with its own manifest line keyed by the
//! point's configuration; a rerun skips points whose outputs are unchanged.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;
use wrcm_core::config::{SimulationConfig, VertexProcess};
use wrcm_core::stats::{
    cumulant_scaling_fit, run_replications, FunctionalChoice, ScalingFit, ScalingPoint,
    REPORT_SCHEMA_VERSION,
};
use wrcm_core::{Error, Result};

use crate::manifest::{completed, sha256_hex, Run};

pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Intensity,
    VolumeScale,
}

fn default_orders() -> Vec<usize> {
    vec![3, 4]
}

fn default_bootstrap() -> usize {
    200
}

fn default_functional() -> String {
    "subgraph".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    #[serde(default)]
    pub hold_product: bool,
    #[serde(default = "default_functional")]
    pub functional: String,
    /// Defaults to `run.replications` of the template.
    pub replications: Option<usize>,
    #[serde(default = "default_orders")]
    pub orders: Vec<usize>,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<SweepSpec> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if spec.values.len() < MIN_POINTS {
            return Err(Error::validation(
                "values",
                format!(
                    "a sweep needs at least {MIN_POINTS} points, got {}",
                    spec.values.len()
                ),
            ));
        }
        if let Some(v) = spec.values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::validation(
                "values",
                format!("sweep values must be positive, got {v}"),
            ));
        }
        if FunctionalChoice::parse(&spec.functional).is_none() {
            return Err(Error::validation(
                "functional",
                format!("unknown functional `{}`", spec.functional),
            ));
        }
        if spec.replications.is_some_and(|n| n < 2) {
            return Err(Error::validation(
                "replications",
                "need at least 2 replications",
            ));
        }
        if let Some(m) = spec.orders.iter().find(|m| !(2..=6).contains(*m)) {
            return Err(Error::validation(
                "orders",
                format!("order {m} outside 2..=6"),
            ));
        }
        Ok(spec)
    }

    pub fn functional(&self) -> FunctionalChoice {
        FunctionalChoice::parse(&self.functional).expect("validated")
    }

    /// The template with the swept parameter set to `value`.
    pub fn point_config(
        &self,
        template: &SimulationConfig,
        value: f64,
    ) -> Result<SimulationConfig> {
        let product = template.intensity * template.volume_scale;
        let mut c = template.clone();
        match self.parameter {
            SweepParameter::Intensity => {
                c.intensity = value;
                if let VertexProcess::AlphaDpp(k) = &mut c.vertex_process {
                    k.k0_origin = value;
                }
                if self.hold_product {
                    c.volume_scale = product / value;
                }
            }
            SweepParameter::VolumeScale => {
                c.volume_scale = value;
                if self.hold_product {
                    c.intensity = product / value;
                    if let VertexProcess::AlphaDpp(k) = &mut c.vertex_process {
                        k.k0_origin = c.intensity;
                    }
                }
            }
        }
        if let Some(n) = self.replications {
            c.replications = n;
        }
        c.finalize()
    }
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let col = r
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| Error::Parse(format!("{} has no value column", path.display())))?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            rec[col].parse().map_err(|_| {
                Error::Parse(format!("bad value `{}` in {}", &rec[col], path.display()))
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PointOutcome {
    pub index: usize,
    pub x: f64,
    pub file: String,
    /// `ok`, `resumed` or the failure message.
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub schema_version: u32,
    pub parameter: SweepParameter,
    pub functional: FunctionalChoice,
    pub points: Vec<PointOutcome>,
    pub fits: Vec<ScalingFit>,
    pub fit_errors: Vec<String>,
}

impl SweepOutcome {
    pub fn failed_points(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.status != "ok" && p.status != "resumed")
            .count()
    }
}

pub fn run_sweep(
    template: &SimulationConfig,
    spec: &SweepSpec,
    out: &Path,
    workers: usize,
    command: &str,
) -> Result<SweepOutcome> {
    fs::create_dir_all(out)?;
    let functional = spec.functional();
    let mut outcomes = Vec::new();
    let mut points = Vec::new();
    for (i, &value) in spec.values.iter().enumerate() {
        let file = format!("point_{i:02}.csv");
        let mut outcome = PointOutcome {
            index: i,
            x: value,
            file: file.clone(),
            status: String::new(),
        };
        let config = match spec.point_config(template, value) {
            Ok(c) => c,
            Err(e) => {
                outcome.status = format!("failed: {e}");
                eprintln!("warning: sweep point {i}: {e}");
                outcomes.push(outcome);
                continue;
            }
        };
        let key = sha256_hex(
            format!(
                "{}\n{}\n{}",
                config.to_toml(),
                functional.as_str(),
                config.replications
            )
            .as_bytes(),
        );
        if completed(out, &key).is_some() {
            match read_values(&out.join(&file)) {
                Ok(values) => {
                    eprintln!("sweep point {i}: resumed from {file}");
                    outcome.status = "resumed".into();
                    points.push(ScalingPoint { x: value, values });
                    outcomes.push(outcome);
                    continue;
                }
                Err(e) => eprintln!("warning: sweep point {i}: cannot reload {file}: {e}"),
            }
        }
        eprintln!(
            "sweep point {i}: {} = {value}, {} replications",
            param_name(spec.parameter),
            config.replications
        );
        let mut run =
            Run::start(out, Some(&config), format!("{command} [point {i}]"))?.with_key(key);
        match run_replications(&config, functional, config.replications, workers) {
            Ok(batch) => {
                let mut csv = Vec::new();
                batch.write_csv(&mut csv)?;
                run.write(&file, &csv)?;
                run.finish("ok")?;
                outcome.status = "ok".into();
                points.push(ScalingPoint {
                    x: value,
                    values: batch.values,
                });
            }
            Err(e) => {
                run.finish(&format!("failed: {e}"))?;
                eprintln!("warning: sweep point {i}: {e}");
                outcome.status = format!("failed: {e}");
            }
        }
        outcomes.push(outcome);
    }

    let mut fits = Vec::new();
    let mut fit_errors = Vec::new();
    let mut run = Run::start(out, Some(template), command.to_string())?;
    for &m in &spec.orders {
        match cumulant_scaling_fit(&points, m, spec.bootstrap, template.master_seed) {
            Ok(fit) => {
                let mut csv = Vec::new();
                fit.write_csv(&mut csv)?;
                run.write(&format!("scaling_m{m}.csv"), &csv)?;
                fits.push(fit);
            }
            Err(e) => fit_errors.push(format!("order {m}: {e}")),
        }
    }
    let outcome = SweepOutcome {
        schema_version: REPORT_SCHEMA_VERSION,
        parameter: spec.parameter,
        functional,
        points: outcomes,
        fits,
        fit_errors,
    };
    let report = serde_json::to_vec_pretty(&json!(outcome)).expect("report serializes");
    run.write("scaling.json", &report)?;
    run.finish("ok")?;
    Ok(outcome)
}

fn param_name(p: SweepParameter) -> &'static str {
    match p {
        SweepParameter::Intensity => "intensity",
        SweepParameter::VolumeScale => "volume_scale",
    }
}
