use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use qjf_core::doob::{doob_transform, tilted_doob};
use qjf_core::spectral::{scgf_scan, scgf_with, ScanValue};
use rayon::prelude::*;

use super::{parse_grids, product};
use crate::error::{exit, CliError};
use crate::output::{emit, float};
use crate::source::{parse_vector, ModelArgs, Tolerances};

#[derive(Args, Debug)]
pub struct ScgfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Tilt grid `start:step:count`; one per observable component.
    #[arg(long, value_name = "START:STEP:COUNT", required = true, allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// Scan the Doob dynamics at this bias instead of the base model.
    #[arg(long, value_name = "VALUE[,VALUE...]", allow_hyphen_values = true)]
    pub s: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script plotting θ against the first tilt component.
    #[arg(long, value_name = "PATH", requires = "out")]
    pub gnuplot: Option<PathBuf>,
}

pub fn run(args: &ScgfArgs) -> Result<i32, CliError> {
    let tol = Tolerances::from_overrides(&args.model.tols)?;
    let source = args.model.load(&tol)?;
    let m = source.observable.m();
    let grids = parse_grids(&args.grid, m)?;
    let points = product(&grids.iter().map(|g| g.points_f64()).collect::<Vec<_>>());

    let outcomes: Vec<Result<ScanValue, String>> = match &args.s {
        None => scgf_scan(&source.model, &source.observable, &points, &tol.spectral)?
            .into_iter()
            .map(|p| p.outcome.map_err(|e| e.to_string()))
            .collect(),
        Some(s) => {
            let cfg = tol.doob();
            let doob = doob_transform(&source.model, &source.observable, &parse_vector(s)?, &cfg)?;
            points
                .par_iter()
                .map(|lambda| {
                    let gen = tilted_doob(&doob, lambda, &cfg).map_err(|e| e.to_string())?;
                    let data = scgf_with(&gen, &cfg.spectral).map_err(|e| e.to_string())?;
                    Ok(ScanValue {
                        theta: data.theta,
                        gap: data.gap,
                    })
                })
                .collect()
        }
    };

    let mut csv = String::new();
    let header: Vec<String> = (1..=m).map(|i| format!("lambda_{i}")).collect();
    writeln!(csv, "{},theta,gap,status", header.join(",")).unwrap();
    let mut failed = 0;
    for (lambda, outcome) in points.iter().zip(&outcomes) {
        let cols: Vec<String> = lambda.iter().map(|x| float(*x)).collect();
        match outcome {
            Ok(v) => writeln!(csv, "{},{},{},ok", cols.join(","), float(v.theta), float(v.gap)).unwrap(),
            Err(e) => {
                failed += 1;
                let status = e.replace([',', '\n', '"'], " ");
                writeln!(csv, "{},nan,nan,error: {status}", cols.join(",")).unwrap();
            }
        }
    }
    emit(args.out.as_deref(), csv.as_bytes())?;

    if let (Some(script), Some(data)) = (&args.gnuplot, &args.out) {
        let text = format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'lambda_1'\nset ylabel 'theta'\n\
             plot '{}' using 1:{} with linespoints title '{}'\n",
            data.display(),
            m + 1,
            source.name.replace('\'', "")
        );
        emit(Some(script), text.as_bytes())?;
    }

    if failed > 0 {
        eprintln!("{failed} of {} grid points failed to solve", points.len());
        return Ok(exit::SOLVER);
    }
    Ok(exit::OK)
}
