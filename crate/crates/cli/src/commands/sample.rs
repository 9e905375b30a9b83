use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use qjf_core::doob::doob_transform;
use qjf_core::spectral::{cumulants, scgf_at};
use qjf_core::trajectories::{basis_state, estimate_scgf, moment_rates, sample_many, InitialState};
use qjf_core::SCHEMA_VERSION;
use serde::Serialize;

use super::{parse_grids, product};
use crate::error::{exit, CliError};
use crate::output::{emit, to_json};
use crate::source::{parse_vector, ModelArgs, Tolerances};

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of trajectories.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Length of every trajectory.
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Master seed; trajectory `i` uses a stream derived from `(seed, i)`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample the Doob dynamics at this bias.
    #[arg(long, value_name = "VALUE[,VALUE...]", allow_hyphen_values = true)]
    pub doob: Option<String>,
    /// Draw initial states from the stationary ensemble of the sampled
    /// dynamics instead of the model's `psi0` or the first basis vector.
    #[arg(long)]
    pub stationary: bool,
    /// Tilt grid for the θ̂ table, one per observable component.
    #[arg(long, value_name = "START:STEP:COUNT", allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// JSONL destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Summary JSON destination; stderr when absent.
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Serialize)]
struct Record<'a> {
    seed: u64,
    n_jumps: u64,
    counts: &'a [u64],
    #[serde(rename = "K")]
    k: Vec<f64>,
}

#[derive(Serialize)]
struct Component {
    index: usize,
    mean_rate: f64,
    mean_stderr: Option<f64>,
    var_rate: Option<f64>,
    var_stderr: Option<f64>,
    spectral_mean_rate: Option<f64>,
    spectral_var_rate: Option<f64>,
    closed_form_mean_rate: Option<f64>,
    z_mean: Option<f64>,
    z_var: Option<f64>,
}

#[derive(Serialize)]
struct ScgfRow {
    lambda: Vec<f64>,
    theta_hat: Option<f64>,
    stderr: Option<f64>,
    theta_spectral: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    source: &'a str,
    doob_s: Option<Vec<f64>>,
    n_traj: usize,
    horizon: f64,
    seed: u64,
    initial_state: &'static str,
    mean_jumps: f64,
    components: Vec<Component>,
    /// `(1/T) log mean exp(-λ·K)`; biased at finite horizon and sample size.
    scgf_table: Vec<ScgfRow>,
    /// Whether every available z-score is at most 3.
    consistent: Option<bool>,
}

pub fn run(args: &SampleArgs) -> Result<i32, CliError> {
    let tol = Tolerances::from_overrides(&args.model.tols)?;
    let source = args.model.load(&tol)?;
    if args.n == 0 {
        return Err(CliError::input("--n must be at least 1"));
    }
    if args.horizon <= 0.0 || !args.horizon.is_finite() {
        return Err(CliError::input("--horizon must be positive and finite"));
    }
    let m = source.observable.m();
    let grids = if args.grid.is_empty() {
        Vec::new()
    } else {
        parse_grids(&args.grid, m)?
    };

    let bias = args.doob.as_deref().map(parse_vector).transpose()?;
    let doob = match &bias {
        Some(s) => Some(doob_transform(&source.model, &source.observable, s, &tol.doob())?),
        None => None,
    };
    let model = doob.as_ref().map_or(&source.model, |d| d.model());
    let (init, initial_state) = if args.stationary {
        let zero = vec![0.0; m];
        let rho = scgf_at(model, &source.observable, &zero, &tol.spectral)?.r;
        (InitialState::from_density(&rho)?, "stationary")
    } else {
        match &source.psi0 {
            Some(v) => (InitialState::Pure(v.clone()), "model"),
            None => (InitialState::Pure(basis_state(model.dim(), 0)), "basis-0"),
        }
    };
    let stats = sample_many(model, &init, args.horizon, args.n, args.seed, &tol.sampler)?;

    let mut jsonl = String::new();
    for r in &stats.records {
        let record = Record {
            seed: r.seed,
            n_jumps: r.n_jumps(),
            counts: &r.counts,
            k: source.observable.observe(&r.counts),
        };
        writeln!(jsonl, "{}", serde_json::to_string(&record).expect("record serializes")).unwrap();
    }
    emit(args.out.as_deref(), jsonl.as_bytes())?;

    // Spectral predictions refer to whatever dynamics was sampled: for the
    // Doob model its cumulants at 0 are those of the base model at `s`.
    let spectral = if source.spectral_feasible {
        Some(cumulants(model, &source.observable, tol.fd_step, &tol.spectral)?)
    } else {
        None
    };
    let closed_form = match (&source.example, m) {
        (Some(ex), 1) => {
            let s = bias.as_ref().map_or(0.0, |b| b[0]);
            let h = tol.fd_step;
            match (ex.theta(s + h), ex.theta(s - h)) {
                (Ok(a), Ok(b)) => Some(-(a - b) / (2.0 * h)),
                _ => None,
            }
        }
        _ => None,
    };

    let nf = args.n as f64;
    let mut components = Vec::new();
    let mut consistent: Option<bool> = None;
    let k_samples = stats.k_samples(&source.observable);
    for c in 0..m {
        let mean_rate = k_samples.iter().map(|k| k[c]).sum::<f64>() / nf / args.horizon;
        let rates = (args.n >= 2)
            .then(|| moment_rates(&stats, &source.observable, c))
            .transpose()?;
        let spectral_mean_rate = spectral.as_ref().map(|s| s.mean_rate[c]);
        let spectral_var_rate = spectral.as_ref().map(|s| s.covariance_rate[(c, c)]);
        let z = |emp: f64, pred: Option<f64>, se: f64| pred.filter(|_| se > 0.0).map(|p| (emp - p).abs() / se);
        let (z_mean, z_var) = match &rates {
            Some(r) => (
                z(r.mean_rate, spectral_mean_rate, r.mean_stderr),
                z(r.var_rate, spectral_var_rate, r.var_stderr),
            ),
            None => (None, None),
        };
        for zz in [z_mean, z_var].into_iter().flatten() {
            consistent = Some(consistent.unwrap_or(true) && zz <= 3.0);
        }
        components.push(Component {
            index: c,
            mean_rate,
            mean_stderr: rates.map(|r| r.mean_stderr),
            var_rate: rates.map(|r| r.var_rate),
            var_stderr: rates.map(|r| r.var_stderr),
            spectral_mean_rate,
            spectral_var_rate,
            closed_form_mean_rate: closed_form.filter(|_| c == 0),
            z_mean,
            z_var,
        });
    }

    let points = if grids.is_empty() {
        Vec::new()
    } else {
        product(&grids.iter().map(|g| g.points_f64()).collect::<Vec<_>>())
    };
    let mut scgf_table = Vec::new();
    for lambda in points {
        let est = (args.n >= 2)
            .then(|| estimate_scgf(&stats, &source.observable, &lambda))
            .transpose()?;
        let theta_spectral = if source.spectral_feasible {
            Some(scgf_at(model, &source.observable, &lambda, &tol.spectral)?.theta)
        } else {
            None
        };
        scgf_table.push(ScgfRow {
            lambda,
            theta_hat: est.map(|e| e.theta_hat),
            stderr: est.filter(|e| !e.degenerate).map(|e| e.stderr),
            theta_spectral,
        });
    }

    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        source: &source.name,
        doob_s: bias,
        n_traj: args.n,
        horizon: args.horizon,
        seed: args.seed,
        initial_state,
        mean_jumps: stats.records.iter().map(|r| r.n_jumps() as f64).sum::<f64>() / nf,
        components,
        scgf_table,
        consistent,
    };
    match &args.summary {
        Some(path) => emit(Some(path), &to_json(&summary))?,
        None => eprint!("{}", String::from_utf8_lossy(&to_json(&summary))),
    }
    Ok(exit::OK)
}
