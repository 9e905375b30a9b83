pub mod doob_build;
pub mod example;
pub mod sample;
pub mod scgf;
pub mod verify;

use qjf_core::grid::GridSpec;

use crate::error::CliError;

pub fn parse_grids(texts: &[String], m: usize) -> Result<Vec<GridSpec>, CliError> {
    if texts.len() != m {
        return Err(CliError::input(format!(
            "observable has {m} components but {} --grid values were given",
            texts.len()
        )));
    }
    Ok(texts.iter().map(|t| GridSpec::parse(t)).collect::<Result<_, _>>()?)
}

/// Cartesian product, last axis fastest.
pub fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect()
    })
}
