//! Model selection and tolerance overrides shared by every command.

use std::path::PathBuf;

use clap::Args;
use qjf_core::doob::DoobConfig;
use qjf_core::linalg::CVec;
use qjf_core::lindblad::{CountingObservable, LindbladModel};
use qjf_core::model_file::load_model;
use qjf_core::models::ExampleParams;
use qjf_core::spectral::SpectralConfig;
use qjf_core::symmetry::PermutationSymmetry;
use qjf_core::trajectories::SamplerConfig;

use crate::error::CliError;

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// JSON model definition.
    #[arg(long, value_name = "PATH", conflicts_with = "example")]
    pub model: Option<PathBuf>,
    /// Built-in example: single-qubit, two-qubit or spin-chain.
    #[arg(long, value_name = "ID")]
    pub example: Option<String>,
    /// Example parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "example")]
    pub params: Vec<String>,
    /// Number of spin-chain sites (same as --param n=SITES).
    #[arg(short = 'N', value_name = "SITES", requires = "example")]
    pub sites: Option<usize>,
    /// Tolerance override, repeatable. See `--help` of the top-level command.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tols: Vec<String>,
}

pub struct Source {
    pub name: String,
    pub model: LindbladModel,
    pub observable: CountingObservable,
    pub symmetry: Option<PermutationSymmetry>,
    pub psi0: Option<CVec>,
    pub example: Option<ExampleParams>,
    pub spectral_feasible: bool,
}

fn key_value(text: &str) -> Result<(&str, &str), CliError> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| CliError::input(format!("expected NAME=VALUE, got '{text}'")))
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::input(format!("{key}: '{value}' is not a number")))
}

impl ModelArgs {
    pub fn example_params(&self) -> Result<ExampleParams, CliError> {
        let name = self
            .example
            .as_deref()
            .ok_or_else(|| CliError::input("one of --model or --example is required"))?;
        let mut params = ExampleParams::from_name(name)?;
        for p in &self.params {
            let (k, v) = key_value(p)?;
            params.set(k, number(k, v)?)?;
        }
        if let Some(n) = self.sites {
            params.set("n", n as f64)?;
        }
        Ok(params)
    }

    pub fn load(&self, tolerances: &Tolerances) -> Result<Source, CliError> {
        if let Some(path) = &self.model {
            let loaded = load_model(path)?;
            let d = loaded.model.dim();
            return Ok(Source {
                name: path.display().to_string(),
                spectral_feasible: d * d <= tolerances.spectral.dim_cap,
                model: loaded.model,
                observable: loaded.observable,
                symmetry: loaded.symmetry,
                psi0: loaded.psi0,
                example: None,
            });
        }
        let params = self.example_params()?;
        let ex = params.build()?;
        Ok(Source {
            name: params.name().to_string(),
            model: ex.model,
            observable: ex.observable,
            symmetry: Some(ex.symmetry),
            psi0: None,
            example: Some(params),
            spectral_feasible: ex.spectral_feasible,
        })
    }
}

/// Every numeric knob reachable through `--tol NAME=VALUE`.
#[derive(Clone, Debug)]
pub struct Tolerances {
    pub spectral: SpectralConfig,
    pub psd_tol: f64,
    pub consistency_tol: f64,
    /// Pass threshold of the residuals reported by `verify`.
    pub verify_tol: f64,
    pub sampler: SamplerConfig,
    /// Finite-difference step for cumulant predictions.
    pub fd_step: f64,
}

pub const TOLERANCE_NAMES: &str = "dim_cap, degeneracy_gap, imag_tol, zero_trace_tol, residual_tol, psd_tol, \
consistency_tol, verify_tol, max_step, step_scale, time_tol, fd_step";

impl Default for Tolerances {
    fn default() -> Self {
        let doob = DoobConfig::default();
        Self {
            spectral: doob.spectral,
            psd_tol: doob.psd_tol,
            consistency_tol: doob.consistency_tol,
            verify_tol: 1e-8,
            sampler: SamplerConfig::default(),
            fd_step: 1e-4,
        }
    }
}

impl Tolerances {
    pub fn from_overrides(overrides: &[String]) -> Result<Self, CliError> {
        let mut t = Self::default();
        for o in overrides {
            let (k, v) = key_value(o)?;
            let x = number(k, v)?;
            if x <= 0.0 || !x.is_finite() {
                return Err(CliError::input(format!("tolerance {k} must be positive and finite")));
            }
            match k {
                "dim_cap" => t.spectral.dim_cap = x as usize,
                "degeneracy_gap" => t.spectral.degeneracy_gap = x,
                "imag_tol" => t.spectral.imag_tol = x,
                "zero_trace_tol" => t.spectral.zero_trace_tol = x,
                "residual_tol" => t.spectral.residual_tol = x,
                "psd_tol" => t.psd_tol = x,
                "consistency_tol" => t.consistency_tol = x,
                "verify_tol" => t.verify_tol = x,
                "max_step" => t.sampler.max_step = x,
                "step_scale" => t.sampler.step_scale = x,
                "time_tol" => t.sampler.time_tol_rel = x,
                "fd_step" => t.fd_step = x,
                _ => {
                    return Err(CliError::input(format!(
                        "unknown tolerance '{k}'; known: {TOLERANCE_NAMES}"
                    )))
                }
            }
        }
        Ok(t)
    }

    pub fn doob(&self) -> DoobConfig {
        DoobConfig {
            spectral: self.spectral.clone(),
            psd_tol: self.psd_tol,
            consistency_tol: self.consistency_tol,
        }
    }
}

/// `VALUE[,VALUE...]` as a float vector.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',').map(|v| number("vector", v.trim())).collect()
}
