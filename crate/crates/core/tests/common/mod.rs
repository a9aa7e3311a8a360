#![allow(dead_code)]

use wrcm_core::config::{parse_config, SimulationConfig};

/// Config builder for tests; every field has a classical-RCM default.
#[derive(Clone)]
pub struct Cfg {
    pub sides: Vec<f64>,
    pub boundary: &'static str,
    pub intensity: f64,
    pub volume_scale: f64,
    pub tau: f64,
    pub profile: String,
    pub kernel: String,
    pub weights: String,
    pub process: String,
    pub pattern: (usize, String),
    pub seed: u64,
    pub replications: usize,
}

impl Default for Cfg {
    fn default() -> Self {
        Cfg {
            sides: vec![1.0, 1.0],
            boundary: "torus",
            intensity: 100.0,
            volume_scale: 0.02,
            tau: 0.0,
            profile: "family = \"indicator\"".into(),
            kernel: "family = \"unit\"".into(),
            weights: "family = \"constant-one\"".into(),
            process: "kind = \"poisson\"".into(),
            pattern: (2, "[[1, 2]]".into()),
            seed: 1,
            replications: 10,
        }
    }
}

impl Cfg {
    pub fn toml(&self) -> String {
        let sides: Vec<String> = self.sides.iter().map(|s| format!("{s:?}")).collect();
        format!(
            r#"spec_version = 1
[window]
sides = [{}]
boundary = "{}"
[model]
intensity = {:?}
volume_scale = {:?}
tau = {:?}
[profile]
{}
[kernel]
{}
[weights]
{}
[vertex_process]
{}
[pattern]
q = {}
edges = {}
[run]
master_seed = {}
replications = {}
"#,
            sides.join(", "),
            self.boundary,
            self.intensity,
            self.volume_scale,
            self.tau,
            self.profile,
            self.kernel,
            self.weights,
            self.process,
            self.pattern.0,
            self.pattern.1,
            self.seed,
            self.replications
        )
    }

    pub fn build(&self) -> SimulationConfig {
        parse_config(&self.toml()).unwrap_or_else(|e| panic!("{e}\n{}", self.toml()))
    }

    pub fn dpp(mut self, alpha: &str, k0: f64, scale: f64) -> Self {
        self.intensity = k0;
        self.process = format!(
            "kind = \"alpha-dpp\"\nalpha = {alpha}\nk0_origin = {k0:?}\n[vertex_process.kernel]\nfamily = \"gaussian\"\nscale = {scale:?}"
        );
        self
    }
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
