//! Experiment configuration: per-experiment defaults, a JSON file layered on
//! top, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, LabError, Result};

pub const EXPERIMENTS: [&str; 11] = [
    "rho",
    "wave-sample",
    "phase-scan",
    "regularity",
    "close-pairs",
    "free-conv",
    "benigni",
    "flow",
    "concentration",
    "fourier-scan",
    "render",
];

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TORUSLAB_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Torus side (or matrix dimension for the diagonal-start experiments).
    pub n: usize,
    /// Sizes for scaling experiments.
    pub ns: Vec<usize>,
    pub energy: f64,
    /// Noise exponents; `t = n^{-2γ}` unless `t` is set.
    pub gammas: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub ell: usize,
    pub half_width: usize,
    /// Smoothing scale; `None` means `1/n`.
    pub eta: Option<f64>,
    pub offset: (i64, i64),
    pub r: f64,
    pub t: Option<f64>,
    pub dt: f64,
    pub steps: usize,
    pub paths: usize,
    pub trials: usize,
    pub samples: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub tol: f64,
    pub root_tol: f64,
    pub threshold_factor: f64,
    /// Window origin; `None` means the centre of the torus.
    pub origin: Option<(usize, usize)>,
    pub negative_control: bool,
    pub pixel_scale: usize,
    pub banded: bool,
    pub input: Option<PathBuf>,
    pub format: String,
    pub grid_points: usize,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("toruslab-out"))
}

impl ExperimentConfig {
    /// Defaults for one experiment; errors on unknown names.
    pub fn defaults_for(experiment: &str) -> Result<Self> {
        if !EXPERIMENTS.contains(&experiment) {
            return Err(invalid(format!("unknown experiment `{experiment}`")));
        }
        let mut c = Self {
            experiment: experiment.to_string(),
            n: 32,
            ns: vec![],
            energy: 2.0,
            gammas: vec![0.5],
            delta: 0.5,
            epsilon: 0.01,
            ell: 16,
            half_width: 3,
            eta: None,
            offset: (0, 0),
            r: 0.1,
            t: None,
            dt: 0.01,
            steps: 50,
            paths: 200,
            trials: 10,
            samples: 200,
            master_seed: 20240601,
            output_dir: default_output_dir(),
            tol: 1e-8,
            root_tol: 1e-10,
            threshold_factor: 0.01,
            origin: None,
            negative_control: false,
            pixel_scale: 8,
            banded: false,
            input: None,
            format: "ppm".into(),
            grid_points: 801,
            threads: None,
        };
        match experiment {
            "wave-sample" => {
                c.samples = 2000;
            }
            "phase-scan" => {
                c.gammas = vec![0.5, 1.5];
            }
            "regularity" => {
                c.ns = vec![32, 64, 128];
                c.trials = 200;
            }
            "close-pairs" => {
                c.ns = vec![64, 128, 256];
                c.trials = 20;
            }
            "free-conv" => {
                c.n = 200;
                c.t = Some(0.1);
                c.trials = 100;
            }
            "benigni" => {
                c.n = 500;
                c.gammas = vec![1.0 / 6.0];
                c.trials = 500;
                c.energy = 0.0;
            }
            "flow" => {
                c.n = 100;
                c.energy = 0.5;
                c.eta = Some(0.1);
            }
            "concentration" => {
                c.n = 48;
            }
            "fourier-scan" => {
                c.ell = 8;
                c.ns = vec![16, 32, 64];
                c.samples = 20000;
            }
            "render" => {
                c.gammas = vec![0.5, 1.0, 1.5];
            }
            _ => {}
        }
        Ok(c)
    }

    /// Defaults, then `file` (a JSON object of field overrides), then `overrides`.
    pub fn resolve(experiment: &str, file: Option<&Path>, overrides: &Value) -> Result<Self> {
        let mut v = serde_json::to_value(Self::defaults_for(experiment)?)?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let from_file: Value = serde_json::from_str(&text)?;
            if let Some(name) = from_file.get("experiment").and_then(Value::as_str) {
                if name != experiment {
                    return Err(invalid(format!("config file is for `{name}`, not `{experiment}`")));
                }
            }
            merge(&mut v, &from_file)?;
        }
        merge(&mut v, overrides)?;
        let cfg: Self = serde_json::from_value(v).map_err(|e| LabError::InvalidParameter(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn eta_for(&self, n: usize) -> f64 {
        self.eta.unwrap_or(1.0 / n as f64)
    }

    /// `t` if set, else `n^{-2γ}`.
    pub fn t_for(&self, n: usize, gamma: f64) -> f64 {
        self.t.unwrap_or((n as f64).powf(-2.0 * gamma))
    }

    pub fn origin_for(&self, n: usize) -> (usize, usize) {
        self.origin.unwrap_or((n / 2, n / 2))
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.experiment)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(invalid(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.tol > 0.0) || !(self.root_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(t) = self.t {
            if !(t >= 0.0) {
                return bad(format!("t must be non-negative, got {t}"));
            }
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0) {
                return bad(format!("eta must be positive, got {eta}"));
            }
        }
        let needs_energy = matches!(
            self.experiment.as_str(),
            "wave-sample" | "phase-scan" | "close-pairs" | "concentration" | "fourier-scan" | "render"
        );
        if needs_energy && (self.energy == 0.0 || !(self.energy.abs() < 4.0)) {
            return bad(format!("E must lie in (-4,4)\\{{0}}, got {}", self.energy));
        }
        match self.experiment.as_str() {
            "phase-scan" | "render" => {
                if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0)) {
                    return bad("gammas must be a non-empty list of positive exponents".into());
                }
                if !(self.delta > 0.0 && self.delta < 1.0) {
                    return bad(format!("delta must lie in (0,1), got {}", self.delta));
                }
                if self.experiment == "phase-scan" && self.ell > self.n {
                    return bad(format!("ell = {} exceeds n = {}", self.ell, self.n));
                }
            }
            "regularity" | "close-pairs" => {
                if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
                    return bad("ns must list sizes ≥ 2".into());
                }
                if self.trials < 2 {
                    return bad("at least two trials are needed".into());
                }
            }
            "flow" => {
                if self.paths < 2 || self.steps == 0 || !(self.dt > 0.0) {
                    return bad("flow needs ≥ 2 paths, ≥ 1 step and dt > 0".into());
                }
            }
            "fourier-scan" => {
                if self.ell == 0 || self.ns.is_empty() {
                    return bad("fourier-scan needs ell ≥ 1 and a list of window sides".into());
                }
            }
            _ => {}
        }
        if self.experiment == "phase-scan" {
            let g = self.gammas.iter().cloned().fold(f64::INFINITY, f64::min);
            if 8.0 * self.epsilon >= g {
                return bad(format!("need 8ε < γ, got ε = {}, γ = {g}", self.epsilon));
            }
        }
        if self.pixel_scale == 0 {
            return bad("pixel_scale must be at least 1".into());
        }
        if self.format != "ppm" && self.format != "svg" {
            return bad(format!("format must be ppm or svg, got {}", self.format));
        }
        Ok(())
    }
}

fn merge(base: &mut Value, over: &Value) -> Result<()> {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                if !b.contains_key(k) {
                    return Err(invalid(format!("unknown config key `{k}`")));
                }
                b.insert(k.clone(), v.clone());
            }
            Ok(())
        }
        (_, Value::Null) => Ok(()),
        _ => Err(invalid("config overrides must be a JSON object")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn layering() {
        let c = ExperimentConfig::resolve("regularity", None, &json!({"trials": 5})).unwrap();
        assert_eq!(c.trials, 5);
        assert_eq!(c.ns, vec![32, 64, 128]);
        assert!(ExperimentConfig::resolve("regularity", None, &json!({"bogus": 1})).is_err());
        assert!(ExperimentConfig::resolve("nope", None, &json!({})).is_err());
        assert!(ExperimentConfig::resolve("phase-scan", None, &json!({"energy": 0.0})).is_err());
        let c = ExperimentConfig::defaults_for("phase-scan").unwrap();
        assert!((c.t_for(32, 0.5) - 1.0 / 32.0).abs() < 1e-15);
    }
}
