//! Vertex processes: marked Poisson and α-determinantal samplers.

mod pcf;
mod permanental;
mod poisson;
mod spectral;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use pcf::{estimate_pair_correlation, PairCorrelationBin};
pub use permanental::sample_permanental_with;
pub use poisson::sample_poisson_with;
pub use spectral::{gaussian_torus_spectrum, sample_determinantal_with, TorusSpectrum};

use crate::config::{AlphaKind, DppKernelSpec, SimulationConfig, VertexProcess, WeightSpec};
use crate::error::{Result, SamplerError};

/// A vertex `(X_i, U_i)` with a stable identifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub id: u64,
    pub location: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub points: Vec<MarkedPoint>,
    pub process_label: String,
    pub seed_used: u64,
}

impl PointSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Build a sample from raw locations, assigning ids `0..n` and iid weights.
    pub(crate) fn from_locations<R: Rng + ?Sized>(
        locations: Vec<Vec<f64>>,
        weights: &WeightSpec,
        label: String,
        rng: &mut R,
    ) -> Self {
        let points = locations
            .into_iter()
            .enumerate()
            .map(|(i, location)| MarkedPoint {
                id: i as u64,
                location,
                weight: weights.sample(rng),
            })
            .collect();
        PointSample {
            points,
            process_label: label,
            seed_used: 0,
        }
    }

    /// CSV with a `# process_label=… seed=…` preamble and columns
    /// `id, x_1..x_d, weight`.
    pub fn write_csv<W: Write>(&self, out: W, dim: usize) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# process_label={} seed={}",
            self.process_label, self.seed_used
        )?;
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend((1..=dim).map(|i| format!("x_{i}")));
        header.push("weight".into());
        w.write_record(&header).map_err(csv_err)?;
        for p in &self.points {
            let mut rec = vec![p.id.to_string()];
            rec.extend(p.location.iter().map(|x| x.to_string()));
            rec.push(p.weight.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::Parse(format!("{other:?}")),
    }
}

/// Marked Poisson process with intensity `config.intensity`.
pub fn sample_poisson<R: Rng + ?Sized>(config: &SimulationConfig, rng: &mut R) -> PointSample {
    sample_poisson_with(&config.window, config.intensity, &config.weights, rng)
}

fn dpp_spec(config: &SimulationConfig) -> Result<&DppKernelSpec> {
    config.vertex_process.dpp().ok_or_else(|| {
        SamplerError::UnsupportedAlpha("vertex process is Poisson, not alpha-dpp".into()).into()
    })
}

/// α = -1 sampler (spectral method on the torus).
pub fn sample_determinantal<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<PointSample> {
    let k = dpp_spec(config)?;
    if k.alpha_kind()? != (AlphaKind::Determinantal { m: 1 }) {
        return Err(SamplerError::UnsupportedAlpha(format!(
            "determinantal sampler needs alpha = -1, got {}",
            k.alpha
        ))
        .into());
    }
    sample_determinantal_with(&config.window, k, 1.0, &config.weights, rng)
}

/// α = +1 sampler (Cox process driven by `|G|²`).
pub fn sample_permanental<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<PointSample> {
    let k = dpp_spec(config)?;
    if k.alpha_kind()? != (AlphaKind::Permanental { m: 1 }) {
        return Err(SamplerError::UnsupportedAlpha(format!(
            "permanental sampler needs alpha = 1, got {}",
            k.alpha
        ))
        .into());
    }
    sample_permanental_with(&config.window, k, 1.0, &config.weights, rng)
}

/// α = ±1/m: superposition of `m` independent (±1)-processes with kernel `K₀/m`.
///
/// The components are drawn one after the other from `rng`, so `m = 1`
/// returns exactly the base sampler's output.
pub fn sample_alpha_dpp<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<PointSample> {
    let k = dpp_spec(config)?;
    let (m, determinantal) = match k.alpha_kind()? {
        AlphaKind::Poisson => {
            return Ok(sample_poisson_with(
                &config.window,
                k.k0_origin,
                &config.weights,
                rng,
            ))
        }
        AlphaKind::Determinantal { m } => (m, true),
        AlphaKind::Permanental { m } => (m, false),
    };
    let factor = 1.0 / m as f64;
    let mut parts = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let part = if determinantal {
            sample_determinantal_with(&config.window, k, factor, &config.weights, rng)?
        } else {
            sample_permanental_with(&config.window, k, factor, &config.weights, rng)?
        };
        parts.push(part);
    }
    if m == 1 {
        return Ok(parts.pop().unwrap());
    }
    let mut points = Vec::new();
    for part in parts {
        for mut p in part.points {
            p.id = points.len() as u64;
            points.push(p);
        }
    }
    Ok(PointSample {
        points,
        process_label: format!("superposition({m})"),
        seed_used: 0,
    })
}

/// Sample the configured vertex process.
pub fn sample_vertices<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<PointSample> {
    match config.vertex_process {
        VertexProcess::Poisson => Ok(sample_poisson(config, rng)),
        VertexProcess::AlphaDpp(_) => sample_alpha_dpp(config, rng),
    }
}

/// Vertex sample of replication `replication`, drawn from its own stream.
pub fn sample_replication(config: &SimulationConfig, replication: u64) -> Result<PointSample> {
    let mut rng =
        crate::rng::stream_rng(config.master_seed, replication, crate::rng::Stream::Points);
    let mut s = sample_vertices(config, &mut rng)?;
    s.seed_used =
        crate::rng::stream_seed(config.master_seed, replication, crate::rng::Stream::Points);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn csv_layout() {
        let s = PointSample {
            points: vec![MarkedPoint {
                id: 0,
                location: vec![0.25, 0.5],
                weight: 1.0,
            }],
            process_label: "poisson".into(),
            seed_used: 9,
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf, 2).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# process_label=poisson seed=9\nid,x_1,x_2,weight\n0,0.25,0.5,1\n"
        );
    }

    #[test]
    fn alpha_zero_dpp_is_poisson_at_k0() {
        let text = r#"
spec_version = 1
[window]
sides = [10.0, 10.0]
boundary = "torus"
[model]
volume_scale = 0.5
[profile]
family = "indicator"
[kernel]
family = "unit"
[weights]
family = "constant-one"
[vertex_process]
kind = "alpha-dpp"
alpha = 0.0
k0_origin = 0.5
[vertex_process.kernel]
family = "gaussian"
scale = 0.3
[pattern]
q = 2
edges = [[1, 2]]
[run]
master_seed = 1
replications = 2
"#;
        let c = parse_config(text).unwrap();
        let mean: f64 = (0..200)
            .map(|r| sample_replication(&c, r).unwrap().len() as f64)
            .sum::<f64>()
            / 200.0;
        assert!(
            (mean - 50.0).abs() < 3.0 * (50.0f64 / 200.0).sqrt() + 1e-9,
            "{mean}"
        );
        assert_eq!(sample_replication(&c, 0).unwrap().process_label, "poisson");
    }
}
