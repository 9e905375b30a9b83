use std::path::PathBuf;

use clap::Args;
use qjf_core::doob::doob_transform;
use qjf_core::model_file::model_to_json;
use qjf_core::SCHEMA_VERSION;
use serde::Serialize;

use crate::error::{exit, CliError};
use crate::output::{emit, to_json};
use crate::source::{parse_vector, ModelArgs, Tolerances};

#[derive(Args, Debug)]
pub struct DoobBuildArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Bias `s`, one value per observable component.
    #[arg(long, value_name = "VALUE[,VALUE...]", allow_hyphen_values = true)]
    pub s: String,
    /// Destination of the Doob model JSON; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Destination of the build summary JSON; stderr when absent.
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    source: &'a str,
    s: Vec<f64>,
    theta_s: f64,
    consistency_residual: f64,
    trace_defect: f64,
}

pub fn run(args: &DoobBuildArgs) -> Result<i32, CliError> {
    let tol = Tolerances::from_overrides(&args.model.tols)?;
    let source = args.model.load(&tol)?;
    let s = parse_vector(&args.s)?;
    let doob = doob_transform(&source.model, &source.observable, &s, &tol.doob())?;
    let json = model_to_json(doob.model(), doob.observable(), None, source.psi0.as_ref());
    emit(args.out.as_deref(), format!("{json}\n").as_bytes())?;

    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        source: &source.name,
        s,
        theta_s: doob.theta_s(),
        consistency_residual: doob.consistency_residual(),
        trace_defect: doob.trace_defect(),
    };
    match &args.summary {
        Some(path) => emit(Some(path), &to_json(&summary))?,
        None => eprint!("{}", String::from_utf8_lossy(&to_json(&summary))),
    }
    Ok(exit::OK)
}
