use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use qjf_core::model_file::model_to_json;
use qjf_core::models::uniform_state;

use crate::error::{exit, CliError};
use crate::output::emit;

#[derive(Args, Debug)]
pub struct ExampleArgs {
    /// single-qubit, two-qubit or spin-chain.
    #[arg(long, value_name = "ID")]
    pub example: String,
    /// Example parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Number of spin-chain sites.
    #[arg(short = 'N', value_name = "SITES")]
    pub sites: Option<usize>,
    /// Write the model JSON instead of a description.
    #[arg(long)]
    pub emit_json: bool,
    /// Destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(args: &ExampleArgs) -> Result<i32, CliError> {
    let model_args = crate::source::ModelArgs {
        model: None,
        example: Some(args.example.clone()),
        params: args.params.clone(),
        sites: args.sites,
        tols: Vec::new(),
    };
    let params = model_args.example_params()?;
    let ex = params.build()?;
    let text = if args.emit_json {
        // The ring ships with a translation-invariant initial state.
        let psi0 = (params.name() == "spin-chain").then(|| uniform_state(ex.model.dim()));
        format!(
            "{}\n",
            model_to_json(&ex.model, &ex.observable, Some(&ex.symmetry), psi0.as_ref())
        )
    } else {
        let mut t = String::new();
        writeln!(t, "{}: {params:?}", params.name()).unwrap();
        writeln!(t, "dimension {}, {} channels", ex.model.dim(), ex.model.n_channels()).unwrap();
        for (j, w) in ex.model.jumps().iter().zip(ex.observable.weights()) {
            writeln!(t, "  {:<6} weight {w:?}", j.label).unwrap();
        }
        writeln!(t, "symmetry permutation {:?}", ex.symmetry.perm()).unwrap();
        writeln!(t, "spectral methods feasible: {}", ex.spectral_feasible).unwrap();
        if let Ok(theta) = params.theta(0.5) {
            writeln!(t, "closed-form θ(0.5) = {theta:.16e}").unwrap();
        }
        t
    };
    emit(args.out.as_deref(), text.as_bytes())?;
    Ok(exit::OK)
}
