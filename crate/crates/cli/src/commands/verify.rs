use std::path::PathBuf;

use clap::Args;
use qjf_core::doob::{verify_fluctuation_relation, verify_fluctuation_relation_grid, verify_similarity, FrReport};
use qjf_core::grid::{parse_rational, ratio_to_f64, GridSpec};
use qjf_core::symmetry::{check_dynamics_symmetry, check_tilted_symmetry, DynamicsSymmetryReport};
use qjf_core::SCHEMA_VERSION;
use serde::Serialize;

use super::{parse_grids, product};
use crate::error::{exit, CliError};
use crate::output::{emit, to_json};
use crate::source::{ModelArgs, Source, Tolerances};

/// Similarity checks compose dense superoperators, so only a spread of grid
/// points is used for them.
const MAX_SIMILARITY_POINTS: usize = 9;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Bias `s` as exact rationals, one per observable component; repeat
    /// the flag for several biases.
    #[arg(
        long,
        value_name = "VALUE[,VALUE...]",
        default_value = "1/2",
        allow_hyphen_values = true
    )]
    pub s: Vec<String>,
    /// Tilt grid, one per observable component. Defaults to `-2:1/20:81`
    /// for scalar observables.
    #[arg(long, value_name = "START:STEP:COUNT", allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// Report destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SymmetryReport {
    hamiltonian_residual: f64,
    jump_residual: f64,
    rate_mismatch: f64,
    pass: bool,
}

impl From<&DynamicsSymmetryReport> for SymmetryReport {
    fn from(r: &DynamicsSymmetryReport) -> Self {
        Self {
            hamiltonian_residual: r.hamiltonian_residual,
            jump_residual: r.jump_residual,
            rate_mismatch: r.rate_mismatch,
            pass: r.pass,
        }
    }
}

#[derive(Serialize)]
struct ResidualCheck {
    points: usize,
    max_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PairOut {
    lambda: Vec<f64>,
    lambda_mapped: Vec<f64>,
    theta: f64,
    theta_mapped: f64,
}

#[derive(Serialize)]
struct FrOut {
    s: Vec<f64>,
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    grid: Vec<String>,
    /// `exact` pairs grid nodes with grid nodes; `direct` evaluates every
    /// image point when `U^-1` is not an integer matrix.
    pairing: &'static str,
    max_residual: f64,
    max_shift_residual: f64,
    pass: bool,
    similarity: ResidualCheck,
    pairs: Vec<PairOut>,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    source: &'a str,
    tolerance: f64,
    symmetry: SymmetryReport,
    tilted_symmetry: Option<ResidualCheck>,
    fr: Vec<FrOut>,
    pass: bool,
}

fn spread<T: Clone>(items: &[T], max: usize) -> Vec<T> {
    if items.len() <= max {
        return items.to_vec();
    }
    (0..max)
        .map(|k| items[k * (items.len() - 1) / (max - 1)].clone())
        .collect()
}

pub fn run(args: &VerifyArgs) -> Result<i32, CliError> {
    let tol = Tolerances::from_overrides(&args.model.tols)?;
    let source = args.model.load(&tol)?;
    let Source {
        model,
        observable,
        symmetry,
        name,
        ..
    } = &source;
    let sym = symmetry
        .as_ref()
        .ok_or_else(|| CliError::input("model has no symmetry block; nothing to verify"))?;
    let m = observable.m();
    let grid_text = if args.grid.is_empty() && m == 1 {
        vec!["-2:1/20:81".to_string()]
    } else {
        args.grid.clone()
    };
    let grids: Vec<GridSpec> = parse_grids(&grid_text, m)?;
    let points = product(&grids.iter().map(|g| g.points_f64()).collect::<Vec<_>>());
    let biases = args
        .s
        .iter()
        .map(|text| {
            let s = text.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
            if s.len() != m {
                return Err(CliError::input(format!(
                    "--s '{text}' has {} components, expected {m}",
                    s.len()
                )));
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let dynamics = check_dynamics_symmetry(model, sym).map_err(|e| CliError::input(format!("symmetry: {e}")))?;
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        source: name,
        tolerance: tol.verify_tol,
        symmetry: (&dynamics).into(),
        tilted_symmetry: None,
        fr: Vec::new(),
        pass: false,
    };
    if !dynamics.pass {
        emit(args.out.as_deref(), &to_json(&report))?;
        eprintln!(
            "symmetry precondition fails: Hamiltonian residual {:e}, jump residual {:e}",
            dynamics.hamiltonian_residual, dynamics.jump_residual
        );
        return Ok(exit::SYMMETRY);
    }
    sym.check_weights(observable)
        .map_err(|e| CliError::input(format!("symmetry: {e}")))?;

    let mut tilted_max: f64 = 0.0;
    for lambda in &points {
        let r = check_tilted_symmetry(model, observable, sym, lambda)
            .map_err(|e| CliError::input(format!("symmetry: {e}")))?;
        tilted_max = tilted_max.max(r);
    }
    let tilted_pass = tilted_max <= tol.verify_tol;
    report.tilted_symmetry = Some(ResidualCheck {
        points: points.len(),
        max_residual: tilted_max,
        pass: tilted_pass,
    });

    let cfg = tol.doob();
    let u = sym.u();
    let u_rows: Vec<Vec<f64>> = (0..m).map(|i| u.row(i).iter().copied().collect()).collect();
    let integer_inverse = u
        .clone()
        .try_inverse()
        .is_some_and(|inv| inv.iter().all(|x| (x - x.round()).abs() <= 1e-12));
    let mut all_pass = tilted_pass;
    for s in &biases {
        let s_f64: Vec<f64> = s.iter().map(ratio_to_f64).collect();
        let (fr, pairing): (FrReport, _) = if integer_inverse {
            (
                verify_fluctuation_relation_grid(model, observable, u, s, &grids, &cfg)?,
                "exact",
            )
        } else {
            (
                verify_fluctuation_relation(model, observable, u, &s_f64, &points, &cfg)?,
                "direct",
            )
        };
        let mut sim_max: f64 = 0.0;
        let sim_points = spread(&points, MAX_SIMILARITY_POINTS);
        for lambda in &sim_points {
            sim_max = sim_max.max(verify_similarity(model, observable, sym, &s_f64, lambda, &cfg)?.residual);
        }
        let sim_pass = sim_max <= tol.verify_tol;
        let pass = fr.max_residual <= tol.verify_tol && fr.max_shift_residual <= tol.verify_tol && sim_pass;
        all_pass &= pass;
        report.fr.push(FrOut {
            s: s_f64,
            u: u_rows.clone(),
            grid: grids.iter().map(|g| g.to_string()).collect(),
            pairing,
            max_residual: fr.max_residual,
            max_shift_residual: fr.max_shift_residual,
            pass,
            similarity: ResidualCheck {
                points: sim_points.len(),
                max_residual: sim_max,
                pass: sim_pass,
            },
            pairs: fr
                .pairs
                .into_iter()
                .map(|p| PairOut {
                    lambda: p.lambda,
                    lambda_mapped: p.lambda_mapped,
                    theta: p.theta,
                    theta_mapped: p.theta_mapped,
                })
                .collect(),
        });
    }
    report.pass = all_pass;
    emit(args.out.as_deref(), &to_json(&report))?;
    Ok(if all_pass { exit::OK } else { exit::CHECK_FAILED })
}
