//! JSON model definitions.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "dim": 2,
//!   "hamiltonian": [[0,0],[0.5,0],[0.5,0],[0,0]],
//!   "jumps": [{"label": "minus", "matrix": [[0,0],[1,0],[0,0],[0,0]]}],
//!   "observable": {"m": 1, "weights": [[-1]]},
//!   "symmetry": {"perm": [0], "v": [...], "u": [[1]]},
//!   "psi0": [[1,0],[0,0]]
//! }
//! ```
//!
//! Matrices are flat row-major lists of `[re, im]` pairs. `symmetry` and
//! `psi0` are optional; `perm` is 0-based with `perm[mu] = R mu`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{CMat, CVec, C64};
use crate::lindblad::{CountingObservable, JumpOperator, LindbladModel, ModelError};
use crate::symmetry::{PermutationSymmetry, SymmetryError};
use crate::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0}")]
    Schema(u32),
    #[error("{field}: expected {expected} entries, found {found}")]
    Shape {
        field: String,
        expected: usize,
        found: usize,
    },
    #[error("psi0 must have unit norm, has squared norm {0}")]
    Psi0Norm(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub dim: usize,
    pub hamiltonian: Vec<[f64; 2]>,
    pub jumps: Vec<JumpSpec>,
    pub observable: ObservableSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi0: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub label: String,
    pub matrix: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub m: usize,
    pub weights: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySpec {
    pub perm: Vec<usize>,
    pub v: Vec<[f64; 2]>,
    pub u: Vec<Vec<f64>>,
}

/// A validated model file.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: LindbladModel,
    pub observable: CountingObservable,
    pub symmetry: Option<PermutationSymmetry>,
    pub psi0: Option<CVec>,
}

fn matrix(field: &str, dim: usize, entries: &[[f64; 2]]) -> Result<CMat, ModelFileError> {
    if entries.len() != dim * dim {
        return Err(ModelFileError::Shape {
            field: field.to_string(),
            expected: dim * dim,
            found: entries.len(),
        });
    }
    let values: Vec<C64> = entries.iter().map(|[a, b]| C64::new(*a, *b)).collect();
    Ok(CMat::from_row_major(dim, dim, &values).map_err(ModelError::from)?)
}

fn pairs(m: &CMat) -> Vec<[f64; 2]> {
    m.row_major().iter().map(|c| [c.re, c.im]).collect()
}

impl ModelFile {
    pub fn validate(&self) -> Result<LoadedModel, ModelFileError> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(ModelFileError::Schema(v));
            }
        }
        let d = self.dim;
        let h = matrix("hamiltonian", d, &self.hamiltonian)?;
        let jumps = self
            .jumps
            .iter()
            .map(|j| {
                Ok(JumpOperator {
                    label: j.label.clone(),
                    op: matrix(&format!("jump '{}'", j.label), d, &j.matrix)?,
                })
            })
            .collect::<Result<Vec<_>, ModelFileError>>()?;
        let model = LindbladModel::new(h, jumps)?;
        let observable = CountingObservable::new(self.observable.m, self.observable.weights.clone())?;
        observable.check_model(&model)?;

        let symmetry = match &self.symmetry {
            None => None,
            Some(spec) => {
                let v = matrix("symmetry.v", d, &spec.v)?;
                let m = observable.m();
                if spec.u.len() != m || spec.u.iter().any(|row| row.len() != m) {
                    return Err(ModelFileError::Shape {
                        field: "symmetry.u".into(),
                        expected: m * m,
                        found: spec.u.iter().map(Vec::len).sum(),
                    });
                }
                let u = DMatrix::from_fn(m, m, |i, j| spec.u[i][j]);
                let sym = PermutationSymmetry::new(spec.perm.clone(), v, u)?;
                sym.check_model(&model)?;
                Some(sym)
            }
        };

        let psi0 = match &self.psi0 {
            None => None,
            Some(entries) => {
                if entries.len() != d {
                    return Err(ModelFileError::Shape {
                        field: "psi0".into(),
                        expected: d,
                        found: entries.len(),
                    });
                }
                let v = CVec::from_iterator(d, entries.iter().map(|[a, b]| C64::new(*a, *b)));
                let n = v.norm_squared();
                if (n - 1.0).abs() > 1e-10 {
                    return Err(ModelFileError::Psi0Norm(n));
                }
                Some(v)
            }
        };

        Ok(LoadedModel {
            model,
            observable,
            symmetry,
            psi0,
        })
    }

    pub fn from_parts(
        model: &LindbladModel,
        observable: &CountingObservable,
        symmetry: Option<&PermutationSymmetry>,
        psi0: Option<&CVec>,
    ) -> Self {
        Self {
            schema_version: Some(SCHEMA_VERSION),
            dim: model.dim(),
            hamiltonian: pairs(model.hamiltonian()),
            jumps: model
                .jumps()
                .iter()
                .map(|j| JumpSpec {
                    label: j.label.clone(),
                    matrix: pairs(&j.op),
                })
                .collect(),
            observable: ObservableSpec {
                m: observable.m(),
                weights: observable.weights().to_vec(),
            },
            symmetry: symmetry.map(|s| SymmetrySpec {
                perm: s.perm().to_vec(),
                v: pairs(s.v()),
                u: (0..s.u().nrows())
                    .map(|i| s.u().row(i).iter().copied().collect())
                    .collect(),
            }),
            psi0: psi0.map(|v| v.iter().map(|c| [c.re, c.im]).collect()),
        }
    }
}

pub fn parse_model(json: &str) -> Result<LoadedModel, ModelFileError> {
    serde_json::from_str::<ModelFile>(json)?.validate()
}

pub fn load_model(path: &Path) -> Result<LoadedModel, ModelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}

pub fn model_to_json(
    model: &LindbladModel,
    observable: &CountingObservable,
    symmetry: Option<&PermutationSymmetry>,
    psi0: Option<&CVec>,
) -> String {
    serde_json::to_string_pretty(&ModelFile::from_parts(model, observable, symmetry, psi0))
        .expect("model file serializes")
}
