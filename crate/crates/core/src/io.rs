//! Text formats for states, decompositions and models.
//!
//! All three are JSON documents sharing one operator encoding: a row-major
//! array of rows, each entry a `[re, im]` pair.
//!
//! ```json
//! { "dims": [2, 2], "matrix": [[[0.5, 0.0], [0.0, 0.0], ...], ...] }
//! ```
//!
//! Structural problems (bad JSON, missing fields, ragged matrices, sizes
//! that disagree with `dims`) are reported as [`Error::Parse`]; documents
//! that parse but describe an invalid object keep the validation error.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lhv::{self, EventSpace, JointMeasure, LinearLhvModel, OperatorKernel};
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::states::{
    from_cc_decomposition, from_separable_decomposition, BipartiteState, CCDecomposition, DensityMatrix,
    ProjectiveBasis, SeparableDecomposition,
};
use crate::Side;

/// Validation tolerance for operators read from files.
pub const FILE_TOL: f64 = 1e-8;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn encode_matrix(m: &ComplexMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn decode_matrix(rows: &MatrixRows, field: &str) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse(format!("field `{field}`: empty matrix")));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(Error::Parse(format!(
            "field `{field}`: row {r} has {} entries, expected {n}",
            row.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let [re, im] = rows[r][c];
        Complex64::new(re, im)
    }))
}

fn decode_hermitian(rows: &MatrixRows, field: &str, dim: usize) -> Result<HermitianOperator> {
    let m = decode_matrix(rows, field)?;
    if m.nrows() != dim {
        return Err(Error::Parse(format!(
            "field `{field}`: matrix is {0}x{0}, expected {dim}x{dim}",
            m.nrows()
        )));
    }
    HermitianOperator::with_tolerance(m, FILE_TOL)
}

fn decode_density(rows: &MatrixRows, field: &str, dim: usize) -> Result<DensityMatrix> {
    DensityMatrix::with_tolerance(decode_hermitian(rows, field, dim)?, FILE_TOL)
}

/// Names the last `"key":` opening before `offset`, to point diagnostics of
/// truncated documents at a field.
fn enclosing_field(text: &str, offset: usize) -> Option<String> {
    let head = &text[..offset.min(text.len())];
    let colon = head.rfind("\":")?;
    let start = head[..colon].rfind('"')?;
    Some(head[start + 1..colon].to_string())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        let offset = text
            .lines()
            .take(e.line().saturating_sub(1))
            .map(|l| l.len() + 1)
            .sum::<usize>()
            + e.column();
        match (e.classify(), enclosing_field(text, offset)) {
            (serde_json::error::Category::Eof | serde_json::error::Category::Syntax, Some(field)) => {
                Error::Parse(format!("{what}: {e} (in field `{field}`)"))
            }
            _ => Error::Parse(format!("{what}: {e}")),
        }
    })
}

fn check_dims(dims: [usize; 2]) -> Result<(usize, usize)> {
    if dims[0] == 0 || dims[1] == 0 {
        return Err(Error::Parse("field `dims`: dimensions must be positive".into()));
    }
    Ok((dims[0], dims[1]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: [usize; 2],
    pub matrix: MatrixRows,
}

impl StateFile {
    pub fn from_state(s: &BipartiteState) -> Self {
        let (da, db) = s.dims();
        Self {
            dims: [da, db],
            matrix: encode_matrix(s.op().matrix()),
        }
    }

    pub fn to_state(&self) -> Result<BipartiteState> {
        let dims = check_dims(self.dims)?;
        let rho = decode_density(&self.matrix, "matrix", dims.0 * dims.1)?;
        BipartiteState::new(rho, dims)
    }
}

pub fn parse_state(text: &str) -> Result<BipartiteState> {
    parse_json::<StateFile>(text, "state file")?.to_state()
}

pub fn write_state(s: &BipartiteState) -> String {
    to_pretty(&StateFile::from_state(s))
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serializable");
    out.push('\n');
    out
}

/// Either kind of decomposition a model can be built from.
#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    Separable(SeparableDecomposition),
    Cc(CCDecomposition),
}

impl Decomposition {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Decomposition::Separable(d) => d.dims(),
            Decomposition::Cc(d) => d.dims(),
        }
    }

    pub fn to_state(&self) -> BipartiteState {
        match self {
            Decomposition::Separable(d) => from_separable_decomposition(d),
            Decomposition::Cc(d) => from_cc_decomposition(d),
        }
    }

    pub fn build_model(&self) -> LinearLhvModel {
        match self {
            Decomposition::Separable(d) => lhv::build_from_separable(d),
            Decomposition::Cc(d) => lhv::build_tight_from_cc(d),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DecompositionFile {
    Separable {
        dims: [usize; 2],
        weights: Vec<f64>,
        states_a: Vec<MatrixRows>,
        states_b: Vec<MatrixRows>,
    },
    Cc {
        dims: [usize; 2],
        weights: Vec<Vec<f64>>,
        basis_a: Vec<MatrixRows>,
        basis_b: Vec<MatrixRows>,
    },
}

impl DecompositionFile {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        let (da, db) = d.dims();
        match d {
            Decomposition::Separable(s) => DecompositionFile::Separable {
                dims: [da, db],
                weights: s.weights().to_vec(),
                states_a: s.pairs().iter().map(|(a, _)| encode_matrix(a.op().matrix())).collect(),
                states_b: s.pairs().iter().map(|(_, b)| encode_matrix(b.op().matrix())).collect(),
            },
            Decomposition::Cc(c) => DecompositionFile::Cc {
                dims: [da, db],
                weights: (0..da).map(|i| (0..db).map(|j| c.weights()[(i, j)]).collect()).collect(),
                basis_a: c.basis_a().projectors().iter().map(|p| encode_matrix(p.matrix())).collect(),
                basis_b: c.basis_b().projectors().iter().map(|p| encode_matrix(p.matrix())).collect(),
            },
        }
    }

    pub fn to_decomposition(&self) -> Result<Decomposition> {
        match self {
            DecompositionFile::Separable { dims, weights, states_a, states_b } => {
                let (da, db) = check_dims(*dims)?;
                if states_a.len() != weights.len() || states_b.len() != weights.len() {
                    return Err(Error::Parse(format!(
                        "field `weights`: {} weights for {} and {} states",
                        weights.len(),
                        states_a.len(),
                        states_b.len()
                    )));
                }
                let pairs = states_a
                    .iter()
                    .zip(states_b)
                    .map(|(a, b)| Ok((decode_density(a, "states_a", da)?, decode_density(b, "states_b", db)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Decomposition::Separable(SeparableDecomposition::new(weights.clone(), pairs)?))
            }
            DecompositionFile::Cc { dims, weights, basis_a, basis_b } => {
                let (da, db) = check_dims(*dims)?;
                if weights.len() != da || weights.iter().any(|r| r.len() != db) {
                    return Err(Error::Parse(format!("field `weights`: expected a {da}x{db} table")));
                }
                let decode_basis = |ps: &[MatrixRows], field: &str, d: usize| -> Result<ProjectiveBasis> {
                    let ops = ps
                        .iter()
                        .map(|p| decode_hermitian(p, field, d))
                        .collect::<Result<Vec<_>>>()?;
                    ProjectiveBasis::new(ops)
                };
                let table = DMatrix::from_fn(da, db, |i, j| weights[i][j]);
                Ok(Decomposition::Cc(CCDecomposition::new(
                    table,
                    decode_basis(basis_a, "basis_a", da)?,
                    decode_basis(basis_b, "basis_b", db)?,
                )?))
            }
        }
    }
}

pub fn parse_decomposition(text: &str) -> Result<Decomposition> {
    parse_json::<DecompositionFile>(text, "decomposition file")?.to_decomposition()
}

pub fn write_decomposition(d: &Decomposition) -> String {
    to_pretty(&DecompositionFile::from_decomposition(d))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dims: [usize; 2],
    pub events_a: Vec<String>,
    pub events_b: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub kernels_a: Vec<MatrixRows>,
    pub kernels_b: Vec<MatrixRows>,
}

impl ModelFile {
    pub fn from_model(m: &LinearLhvModel) -> Self {
        let (da, db) = m.dims();
        let w = m.measure().weights();
        let kernels = |side| {
            m.kernel(side)
                .operators()
                .iter()
                .map(|f: &DensityMatrix| encode_matrix(f.op().matrix()))
                .collect()
        };
        Self {
            dims: [da, db],
            events_a: m.omega(Side::A).labels().to_vec(),
            events_b: m.omega(Side::B).labels().to_vec(),
            weights: (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect(),
            kernels_a: kernels(Side::A),
            kernels_b: kernels(Side::B),
        }
    }

    pub fn to_model(&self) -> Result<LinearLhvModel> {
        let (da, db) = check_dims(self.dims)?;
        let (na, nb) = (self.events_a.len(), self.events_b.len());
        if self.weights.len() != na || self.weights.iter().any(|r| r.len() != nb) {
            return Err(Error::Parse(format!("field `weights`: expected a {na}x{nb} table")));
        }
        if self.kernels_a.len() != na {
            return Err(Error::Parse(format!("field `kernels_a`: expected {na} operators")));
        }
        if self.kernels_b.len() != nb {
            return Err(Error::Parse(format!("field `kernels_b`: expected {nb} operators")));
        }
        let kernel = |ms: &[MatrixRows], field: &str, d: usize| -> Result<OperatorKernel> {
            OperatorKernel::new(ms.iter().map(|m| decode_density(m, field, d)).collect::<Result<Vec<_>>>()?)
        };
        LinearLhvModel::new(
            EventSpace::new(self.events_a.clone())?,
            EventSpace::new(self.events_b.clone())?,
            JointMeasure::new(DMatrix::from_fn(na, nb, |i, j| self.weights[i][j]))?,
            kernel(&self.kernels_a, "kernels_a", da)?,
            kernel(&self.kernels_b, "kernels_b", db)?,
        )
    }
}

pub fn parse_model(text: &str) -> Result<LinearLhvModel> {
    parse_json::<ModelFile>(text, "model file")?.to_model()
}

pub fn write_model(m: &LinearLhvModel) -> String {
    to_pretty(&ModelFile::from_model(m))
}

/// Operator list in the shared matrix encoding, e.g. a frame.
pub fn parse_operator_list(text: &str) -> Result<Vec<HermitianOperator>> {
    let raw: Vec<MatrixRows> = parse_json(text, "operator list")?;
    raw.iter()
        .map(|m| HermitianOperator::with_tolerance(decode_matrix(m, "operators")?, FILE_TOL))
        .collect()
}

pub fn write_operator_list(ops: &[HermitianOperator]) -> String {
    to_pretty(&ops.iter().map(|o| encode_matrix(o.matrix())).collect::<Vec<_>>())
}
