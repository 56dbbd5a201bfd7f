//! Validated states, effects and measurements, test-state families, and the
//! partial-transpose entanglement test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operator::{
    self, partial_trace, partial_transpose_matrix, tensor, ComplexMatrix, HermitianOperator, ONE,
    ZERO,
};
use crate::Side;

/// Tolerance for positivity and trace checks on constructed values.
pub const STATE_TOL: f64 = 1e-10;

/// Total dimension up to which PPT is necessary and sufficient for
/// separability (2x2 and 2x3).
pub const PPT_CONCLUSIVE_MAX_DIM: usize = 6;

/// Seeded generator behind every `random_*` constructor.
///
/// Streams are ChaCha8 seeded through `SeedableRng::seed_from_u64`; complex
/// Gaussian entries are drawn real part first, row-major.
pub type StateRng = ChaCha8Rng;
pub const GENERATOR_ID: &str = "chacha8-seed_from_u64";

pub fn seeded_rng(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, STATE_TOL)
    }

    /// Validates within `tol`, then divides by the trace so the stored
    /// operator has unit trace to rounding. Operators whose trace is already
    /// 1 up to summation rounding are kept bit for bit, so re-validating a
    /// state is idempotent.
    pub fn with_tolerance(op: HermitianOperator, tol: f64) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > tol {
            return Err(Error::TraceNotUnit { trace });
        }
        let min_eigenvalue = op.min_eigenvalue();
        if min_eigenvalue < -tol {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let rounding = 4.0 * f64::EPSILON * op.dim() as f64;
        if (trace - 1.0).abs() <= rounding {
            return Ok(Self { op });
        }
        Ok(Self {
            op: op.scale(1.0 / trace),
        })
    }

    pub fn pure(vector: &[Complex64]) -> Result<Self> {
        Ok(Self {
            op: HermitianOperator::projector(vector)?,
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            op: HermitianOperator::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(probabilities))
    }

    pub(crate) fn from_op_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn purity(&self) -> f64 {
        operator::hs_unchecked(&self.op, &self.op)
    }
}

/// Operator with spectrum in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    op: HermitianOperator,
}

impl Effect {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let spec = op.spectrum();
        let lo = spec.eigenvalues[0];
        let hi = *spec.eigenvalues.last().unwrap();
        if lo < -STATE_TOL {
            return Err(Error::NotAnEffect { eigenvalue: lo });
        }
        if hi > 1.0 + STATE_TOL {
            return Err(Error::NotAnEffect { eigenvalue: hi });
        }
        Ok(Self { op })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            op: HermitianOperator::identity(d),
        }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            op: HermitianOperator::zeros(d),
        }
    }

    pub(crate) fn from_op_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `I − M`.
    pub fn complement(&self) -> Effect {
        Effect {
            op: &HermitianOperator::identity(self.dim()) - &self.op,
        }
    }
}

/// Effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<Effect>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty POVM".into()))?;
        let d = first.dim();
        let mut sum = HermitianOperator::zeros(d);
        for e in &effects {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.dim(),
                });
            }
            sum = &sum + e.op();
        }
        let deviation = (&sum - &HermitianOperator::identity(d)).max_abs_entry();
        if deviation > STATE_TOL {
            return Err(Error::InvalidParameter(format!(
                "POVM effects sum to identity only within {deviation:.3e}"
            )));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }
}

/// Complete family of orthogonal rank-1 projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    projectors: Vec<HermitianOperator>,
}

impl ProjectiveBasis {
    pub fn new(projectors: Vec<HermitianOperator>) -> Result<Self> {
        let d = projectors
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty projective basis".into()))?
            .dim();
        if projectors.len() != d {
            return Err(Error::InvalidParameter(format!(
                "a projective basis on C^{d} needs {d} projectors, got {}",
                projectors.len()
            )));
        }
        let mut sum = HermitianOperator::zeros(d);
        for (i, p) in projectors.iter().enumerate() {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            for (j, q) in projectors.iter().enumerate() {
                let prod = p.matrix() * q.matrix();
                let target = if i == j { p.matrix().clone() } else { ComplexMatrix::zeros(d, d) };
                let dev = (prod - target).iter().fold(0.0f64, |a, z| a.max(z.norm()));
                if dev > STATE_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "projectors {i} and {j} violate Π_iΠ_j = δ_ij Π_i by {dev:.3e}"
                    )));
                }
            }
            if (p.trace() - 1.0).abs() > STATE_TOL {
                return Err(Error::InvalidParameter(format!("projector {i} is not rank 1")));
            }
            sum = &sum + p;
        }
        let dev = (&sum - &HermitianOperator::identity(d)).max_abs_entry();
        if dev > STATE_TOL {
            return Err(Error::InvalidParameter(format!(
                "projectors sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { projectors })
    }

    /// Basis given by the columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let projectors = (0..u.ncols())
            .map(|k| HermitianOperator::projector(u.column(k).as_slice()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(projectors)
    }

    pub fn computational(d: usize) -> Self {
        Self {
            projectors: (0..d)
                .map(|k| {
                    let mut diag = vec![0.0; d];
                    diag[k] = 1.0;
                    HermitianOperator::from_real_diagonal(&diag)
                })
                .collect(),
        }
    }

    /// Qubit basis `{|n⟩⟨n|, |n⊥⟩⟨n⊥|}` for the Bloch direction `(θ, φ)`.
    pub fn qubit(theta: f64, phi: f64) -> Self {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = Complex64::from_polar(1.0, phi);
        let up = [Complex64::new(c, 0.0), e * s];
        let down = [Complex64::new(-s, 0.0), e * c];
        Self {
            projectors: vec![
                HermitianOperator::projector(&up).unwrap(),
                HermitianOperator::projector(&down).unwrap(),
            ],
        }
    }

    pub(crate) fn from_projectors_unchecked(projectors: Vec<HermitianOperator>) -> Self {
        Self { projectors }
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors.len()
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            effects: self
                .projectors
                .iter()
                .cloned()
                .map(Effect::from_op_unchecked)
                .collect(),
        }
    }
}

/// Density matrix on `C^{d_a} ⊗ C^{d_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    rho: DensityMatrix,
    dims: (usize, usize),
}

impl BipartiteState {
    pub fn new(rho: DensityMatrix, dims: (usize, usize)) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::InvalidParameter("subsystem dimensions must be positive".into()));
        }
        if rho.dim() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch {
                expected: dims.0 * dims.1,
                found: rho.dim(),
            });
        }
        Ok(Self { rho, dims })
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self {
            rho: DensityMatrix::from_op_unchecked(tensor(a.op(), b.op())),
            dims: (a.dim(), b.dim()),
        }
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn op(&self) -> &HermitianOperator {
        self.rho.op()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim_of(&self, side: Side) -> usize {
        match side {
            Side::A => self.dims.0,
            Side::B => self.dims.1,
        }
    }

    /// Reduced state on `side`.
    pub fn reduced(&self, side: Side) -> DensityMatrix {
        let op = partial_trace(self.rho.op(), self.dims, side.other()).expect("dims checked");
        DensityMatrix::from_op_unchecked(op)
    }

    /// The same state with the tensor factors exchanged.
    pub fn swapped(&self) -> BipartiteState {
        let (da, db) = self.dims;
        let n = da * db;
        let m = self.rho.op().matrix();
        // index (i, k) of a⊗b becomes (k, i) of b⊗a
        let perm = |r: usize| (r % da) * db + r / da;
        let out = ComplexMatrix::from_fn(n, n, |r, c| m[(perm(r), perm(c))]);
        BipartiteState {
            rho: DensityMatrix::from_op_unchecked(HermitianOperator::from_hermitian(out)),
            dims: (db, da),
        }
    }

    /// `tr(ρ Ma⊗Mb)`.
    pub fn born(&self, ma: &Effect, mb: &Effect) -> Result<f64> {
        if ma.dim() != self.dims.0 {
            return Err(Error::DimensionMismatch {
                expected: self.dims.0,
                found: ma.dim(),
            });
        }
        if mb.dim() != self.dims.1 {
            return Err(Error::DimensionMismatch {
                expected: self.dims.1,
                found: mb.dim(),
            });
        }
        Ok(operator::hs_unchecked(&tensor(ma.op(), mb.op()), self.rho.op()))
    }

    pub fn trace_distance(&self, other: &BipartiteState) -> Result<f64> {
        operator::trace_distance(self.op(), other.op())
    }
}

fn check_probability_vector(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("empty weight list".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= -1e-12)) {
        return Err(Error::InvalidParameter(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidParameter(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// `ρ = Σ_i p_i ρ^a_i ⊗ ρ^b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableDecomposition {
    weights: Vec<f64>,
    pairs: Vec<(DensityMatrix, DensityMatrix)>,
}

impl SeparableDecomposition {
    pub fn new(weights: Vec<f64>, pairs: Vec<(DensityMatrix, DensityMatrix)>) -> Result<Self> {
        check_probability_vector(&weights)?;
        if weights.len() != pairs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} product terms",
                weights.len(),
                pairs.len()
            )));
        }
        let (da, db) = (pairs[0].0.dim(), pairs[0].1.dim());
        for (a, b) in &pairs {
            if a.dim() != da {
                return Err(Error::DimensionMismatch { expected: da, found: a.dim() });
            }
            if b.dim() != db {
                return Err(Error::DimensionMismatch { expected: db, found: b.dim() });
            }
        }
        Ok(Self { weights, pairs })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pairs(&self) -> &[(DensityMatrix, DensityMatrix)] {
        &self.pairs
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.pairs[0].0.dim(), self.pairs[0].1.dim())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `ρ = Σ_i p_i Π_i ⊗ ρ_i` with the projectors on `measured` and the
/// conditional states on the other side.
#[derive(Debug, Clone, PartialEq)]
pub struct CQDecomposition {
    pub measured: Side,
    pub weights: Vec<f64>,
    pub basis: ProjectiveBasis,
    pub conditionals: Vec<DensityMatrix>,
}

impl CQDecomposition {
    pub fn new(
        measured: Side,
        weights: Vec<f64>,
        basis: ProjectiveBasis,
        conditionals: Vec<DensityMatrix>,
    ) -> Result<Self> {
        check_probability_vector(&weights)?;
        if weights.len() != basis.dim() || conditionals.len() != basis.dim() {
            return Err(Error::InvalidParameter(
                "weights, projectors and conditionals must have equal length".into(),
            ));
        }
        Ok(Self {
            measured,
            weights,
            basis,
            conditionals,
        })
    }

    pub fn to_state(&self) -> BipartiteState {
        let da = self.basis.dim();
        let db = self.conditionals[0].dim();
        let mut sum = HermitianOperator::zeros(da * db);
        for ((p, proj), cond) in self.weights.iter().zip(self.basis.projectors()).zip(&self.conditionals) {
            sum = &sum + &tensor(proj, cond.op()).scale(*p);
        }
        let state = BipartiteState {
            rho: DensityMatrix::from_op_unchecked(sum),
            dims: (da, db),
        };
        match self.measured {
            Side::A => state,
            Side::B => state.swapped(),
        }
    }
}

/// `ρ = Σ_ij p_ij Π^a_i ⊗ Π^b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CCDecomposition {
    weights: DMatrix<f64>,
    basis_a: ProjectiveBasis,
    basis_b: ProjectiveBasis,
}

impl CCDecomposition {
    pub fn new(weights: DMatrix<f64>, basis_a: ProjectiveBasis, basis_b: ProjectiveBasis) -> Result<Self> {
        if weights.nrows() != basis_a.dim() || weights.ncols() != basis_b.dim() {
            return Err(Error::InvalidParameter(format!(
                "weight table is {}x{}, bases have sizes {} and {}",
                weights.nrows(),
                weights.ncols(),
                basis_a.dim(),
                basis_b.dim()
            )));
        }
        check_probability_vector(weights.as_slice())?;
        Ok(Self {
            weights,
            basis_a,
            basis_b,
        })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn basis_a(&self) -> &ProjectiveBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &ProjectiveBasis {
        &self.basis_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.basis_a.dim(), self.basis_b.dim())
    }
}

/// The four Bell states: 0 = Φ⁺, 1 = Φ⁻, 2 = Ψ⁺, 3 = Ψ⁻.
pub fn bell_state(k: usize) -> Result<BipartiteState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (p, m) = (Complex64::new(h, 0.0), Complex64::new(-h, 0.0));
    let v = match k {
        0 => [p, ZERO, ZERO, p],
        1 => [p, ZERO, ZERO, m],
        2 => [ZERO, p, p, ZERO],
        3 => [ZERO, p, m, ZERO],
        _ => return Err(Error::InvalidParameter(format!("Bell index {k} not in 0..=3"))),
    };
    BipartiteState::new(DensityMatrix::pure(&v)?, (2, 2))
}

/// `p·|ψ⁻⟩⟨ψ⁻| + (1−p)·I/4`.
pub fn werner(p: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("Werner parameter {p} not in [0, 1]")));
    }
    let singlet = bell_state(3)?;
    let mixed = HermitianOperator::identity(4).scale((1.0 - p) / 4.0);
    let op = &singlet.op().scale(p) + &mixed;
    BipartiteState::new(DensityMatrix::from_op_unchecked(op), (2, 2))
}

pub fn from_cc_decomposition(d: &CCDecomposition) -> BipartiteState {
    let (da, db) = d.dims();
    let mut sum = HermitianOperator::zeros(da * db);
    for (i, pa) in d.basis_a.projectors().iter().enumerate() {
        for (j, pb) in d.basis_b.projectors().iter().enumerate() {
            let w = d.weights[(i, j)];
            if w != 0.0 {
                sum = &sum + &tensor(pa, pb).scale(w);
            }
        }
    }
    BipartiteState {
        rho: DensityMatrix::from_op_unchecked(sum),
        dims: (da, db),
    }
}

pub fn from_separable_decomposition(d: &SeparableDecomposition) -> BipartiteState {
    let (da, db) = d.dims();
    let mut sum = HermitianOperator::zeros(da * db);
    for (w, (a, b)) in d.weights.iter().zip(&d.pairs) {
        sum = &sum + &tensor(a.op(), b.op()).scale(*w);
    }
    BipartiteState {
        rho: DensityMatrix::from_op_unchecked(sum),
        dims: (da, db),
    }
}

/// `½(|0⟩⟨0|⊗|0⟩⟨0| + |+⟩⟨+|⊗|1⟩⟨1|)`: separable, classical on side b but not
/// on side a.
pub fn asymmetric_decomposition() -> SeparableDecomposition {
    let zero = DensityMatrix::pure(&[ONE, ZERO]).unwrap();
    let one = DensityMatrix::pure(&[ZERO, ONE]).unwrap();
    let plus = DensityMatrix::pure(&[ONE, ONE]).unwrap();
    SeparableDecomposition::new(vec![0.5, 0.5], vec![(zero.clone(), zero), (plus, one)]).unwrap()
}

pub fn asymmetric_state() -> BipartiteState {
    from_separable_decomposition(&asymmetric_decomposition())
}

pub fn partial_transpose(s: &BipartiteState, side: Side) -> HermitianOperator {
    partial_transpose_matrix(s.op(), s.dims, side).expect("dims checked")
}

/// Outcome of the partial-transpose test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptVerdict {
    pub min_eigenvalue: f64,
    /// Partial transpose has an eigenvalue below `-tol`; proves entanglement.
    pub npt: bool,
    /// Whether a PPT answer also certifies separability.
    pub conclusive: bool,
}

impl PptVerdict {
    /// `Some(true)` entangled, `Some(false)` separable, `None` undecided.
    pub fn entangled(&self) -> Option<bool> {
        if self.npt {
            Some(true)
        } else if self.conclusive {
            Some(false)
        } else {
            None
        }
    }
}

pub fn is_entangled_ppt(s: &BipartiteState, tol: f64) -> PptVerdict {
    let min_eigenvalue = partial_transpose(s, Side::B).min_eigenvalue();
    let npt = min_eigenvalue < -tol;
    PptVerdict {
        min_eigenvalue,
        npt,
        conclusive: npt || s.dims.0 * s.dims.1 <= PPT_CONCLUSIVE_MAX_DIM,
    }
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    m
}

/// Haar-random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let phase = r[(k, k)] / r[(k, k)].norm();
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    random_unitary_with(d, &mut seeded_rng(seed))
}

/// `G G† / tr(G G†)` for a complex Gaussian `G`.
pub fn random_density_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = gaussian_matrix(d, d, rng);
    let w = HermitianOperator::from_hermitian(&g * g.adjoint());
    let t = w.trace();
    DensityMatrix::from_op_unchecked(w.scale(1.0 / t))
}

pub fn random_density(d: usize, seed: u64) -> DensityMatrix {
    random_density_with(d, &mut seeded_rng(seed))
}

/// Random pure state.
pub fn random_pure_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let v = gaussian_matrix(d, 1, rng);
    DensityMatrix::pure(v.as_slice()).expect("gaussian vector is nonzero")
}

/// `U diag(u) U†` with Haar `U` and `u` uniform in `[0, 1)`.
pub fn random_effect_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Effect {
    let u = random_unitary_with(d, rng);
    let diag: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    Effect::from_op_unchecked(HermitianOperator::from_real_diagonal(&diag).conjugate_by(&u))
}

pub fn random_effect(d: usize, seed: u64) -> Effect {
    random_effect_with(d, &mut seeded_rng(seed))
}

pub fn random_projective_basis_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProjectiveBasis {
    let u = random_unitary_with(d, rng);
    let projectors = (0..d)
        .map(|k| {
            let v: DVector<Complex64> = u.column(k).into_owned();
            HermitianOperator::from_hermitian(&v * v.adjoint())
        })
        .collect();
    ProjectiveBasis::from_projectors_unchecked(projectors)
}

pub fn random_projective_basis(d: usize, seed: u64) -> ProjectiveBasis {
    random_projective_basis_with(d, &mut seeded_rng(seed))
}

/// Random classical-classical decomposition: Haar bases on both sides and
/// weights from normalized uniform draws.
pub fn random_cc_decomposition_with<R: Rng + ?Sized>(
    dims: (usize, usize),
    rng: &mut R,
) -> CCDecomposition {
    let basis_a = random_projective_basis_with(dims.0, rng);
    let basis_b = random_projective_basis_with(dims.1, rng);
    let raw: Vec<f64> = (0..dims.0 * dims.1).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights = DMatrix::from_row_slice(dims.0, dims.1, &raw).map(|w| w / total);
    CCDecomposition {
        weights,
        basis_a,
        basis_b,
    }
}

pub fn random_cc_decomposition(dims: (usize, usize), seed: u64) -> CCDecomposition {
    random_cc_decomposition_with(dims, &mut seeded_rng(seed))
}

/// Random separable decomposition with `terms` products of mixed states.
pub fn random_separable_decomposition_with<R: Rng + ?Sized>(
    dims: (usize, usize),
    terms: usize,
    rng: &mut R,
) -> SeparableDecomposition {
    assert!(terms >= 1);
    let raw: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let pairs = (0..terms)
        .map(|_| (random_density_with(dims.0, rng), random_density_with(dims.1, rng)))
        .collect();
    SeparableDecomposition {
        weights: raw.iter().map(|w| w / total).collect(),
        pairs,
    }
}

pub fn random_separable_decomposition(
    dims: (usize, usize),
    terms: usize,
    seed: u64,
) -> SeparableDecomposition {
    random_separable_decomposition_with(dims, terms, &mut seeded_rng(seed))
}

/// Random full-rank state on `C^{d_a} ⊗ C^{d_b}`.
pub fn random_bipartite_with<R: Rng + ?Sized>(dims: (usize, usize), rng: &mut R) -> BipartiteState {
    BipartiteState {
        rho: random_density_with(dims.0 * dims.1, rng),
        dims,
    }
}

pub fn random_bipartite(dims: (usize, usize), seed: u64) -> BipartiteState {
    random_bipartite_with(dims, &mut seeded_rng(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::hs_inner;

    #[test]
    fn bell_states_are_pure_with_mixed_marginals() {
        let half = HermitianOperator::identity(2).scale(0.5);
        for k in 0..4 {
            let b = bell_state(k).unwrap();
            assert!((b.rho().purity() - 1.0).abs() < 1e-14);
            for side in [Side::A, Side::B] {
                assert!((b.reduced(side).op() - &half).max_abs_entry() < 1e-15);
            }
            for k2 in 0..4 {
                if k2 != k {
                    let other = bell_state(k2).unwrap();
                    assert!(hs_inner(b.op(), other.op()).unwrap().abs() < 1e-15);
                }
            }
        }
        assert!(bell_state(4).is_err());
    }

    #[test]
    fn werner_endpoints_and_spectrum() {
        let w0 = werner(0.0).unwrap();
        assert!((w0.op() - &HermitianOperator::identity(4).scale(0.25)).max_abs_entry() < 1e-15);
        let w1 = werner(1.0).unwrap();
        assert!((w1.op() - bell_state(3).unwrap().op()).max_abs_entry() < 1e-15);
        for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.9, 1.0] {
            let ev = werner(p).unwrap().op().spectrum().eigenvalues;
            let low = (1.0 - p) / 4.0;
            for e in &ev[..3] {
                assert!((e - low).abs() < 1e-14);
            }
            assert!((ev[3] - (1.0 + 3.0 * p) / 4.0).abs() < 1e-14);
        }
        assert!(werner(-0.1).is_err());
        assert!(werner(1.1).is_err());
        assert!(werner(f64::NAN).is_err());
    }

    #[test]
    fn cc_construction_in_computational_basis_is_diagonal() {
        let w = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let d = CCDecomposition::new(w, ProjectiveBasis::computational(2), ProjectiveBasis::computational(2)).unwrap();
        let s = from_cc_decomposition(&d);
        let expected = HermitianOperator::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]);
        assert!((s.op() - &expected).max_abs_entry() < 1e-15);
    }

    #[test]
    fn cc_construction_commutes_with_product_projectors() {
        for seed in 0..10 {
            let d = random_cc_decomposition((2, 3), seed);
            let s = from_cc_decomposition(&d);
            assert!((s.op().trace() - 1.0).abs() < 1e-12);
            assert!(s.op().min_eigenvalue() > -1e-12);
            for pa in d.basis_a().projectors() {
                for pb in d.basis_b().projectors() {
                    let c = operator::commutator_norm(s.op(), &tensor(pa, pb)).unwrap();
                    assert!(c < 1e-12);
                }
            }
        }
    }

    #[test]
    fn separable_construction() {
        let a = random_density(2, 1);
        let b = random_density(3, 2);
        let single = SeparableDecomposition::new(vec![1.0], vec![(a.clone(), b.clone())]).unwrap();
        let s = from_separable_decomposition(&single);
        assert!((s.op() - &tensor(a.op(), b.op())).max_abs_entry() < 1e-15);

        for seed in 0..10 {
            let d = random_separable_decomposition((2, 3), 4, seed);
            let s = from_separable_decomposition(&d);
            assert!(!is_entangled_ppt(&s, 1e-10).npt);
            let mut marginal = HermitianOperator::zeros(2);
            for (w, (a, _)) in d.weights().iter().zip(d.pairs()) {
                marginal = &marginal + &a.op().scale(*w);
            }
            assert!((s.reduced(Side::A).op() - &marginal).max_abs_entry() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_cases() {
        let prod = BipartiteState::product(&random_density(2, 3), &random_density(2, 4));
        assert!(partial_transpose(&prod, Side::B).min_eigenvalue() >= -1e-14);

        let bell = bell_state(0).unwrap();
        let pt = partial_transpose(&bell, Side::B);
        assert!((pt.min_eigenvalue() + 0.5).abs() < 1e-14);
        assert!((pt.trace() - 1.0).abs() < 1e-14);

        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let w = werner(p).unwrap();
            for side in [Side::A, Side::B] {
                let m = partial_transpose(&w, side).min_eigenvalue();
                assert!((m - (1.0 - 3.0 * p) / 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        for seed in 0..20 {
            let s = random_bipartite((2, 3), seed);
            for side in [Side::A, Side::B] {
                let once = partial_transpose(&s, side);
                let twice = partial_transpose_matrix(&once, s.dims(), side).unwrap();
                assert!((&twice - s.op()).max_abs_entry() < 1e-12);
            }
        }
    }

    #[test]
    fn ppt_verdicts() {
        assert_eq!(is_entangled_ppt(&werner(0.5).unwrap(), 1e-10).entangled(), Some(true));
        assert_eq!(is_entangled_ppt(&werner(1.0 / 3.0).unwrap(), 1e-10).entangled(), Some(false));
        let sep = from_separable_decomposition(&random_separable_decomposition((2, 2), 3, 5));
        assert_eq!(is_entangled_ppt(&sep, 1e-10).entangled(), Some(false));

        // 2x4 is outside the conclusive regime
        let big = BipartiteState::product(&random_density(2, 1), &random_density(4, 2));
        let v = is_entangled_ppt(&big, 1e-10);
        assert!(!v.npt && !v.conclusive);
        assert_eq!(v.entangled(), None);
    }

    #[test]
    fn random_constructors_are_deterministic_and_valid() {
        assert_eq!(random_density(3, 42), random_density(3, 42));
        assert_ne!(random_density(3, 42), random_density(3, 43));
        assert_eq!(random_effect(3, 42), random_effect(3, 42));
        assert_eq!(random_projective_basis(3, 9), random_projective_basis(3, 9));

        for seed in 0..20 {
            for d in 1..=4 {
                let rho = random_density(d, seed);
                DensityMatrix::new(rho.op().clone()).unwrap();
                let e = random_effect(d, seed);
                let ev = e.op().spectrum().eigenvalues;
                assert!(ev[0] >= -1e-12 && ev[d - 1] <= 1.0 + 1e-12);
                Effect::new(e.op().clone()).unwrap();
                let b = random_projective_basis(d, seed);
                ProjectiveBasis::new(b.projectors().to_vec()).unwrap();
                let mut sum = HermitianOperator::zeros(d);
                for p in b.projectors() {
                    sum = &sum + p;
                }
                assert!((&sum - &HermitianOperator::identity(d)).max_abs_entry() < 1e-10);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let not_unit = HermitianOperator::from_real_diagonal(&[0.5, 0.6]);
        assert!(matches!(DensityMatrix::new(not_unit), Err(Error::TraceNotUnit { .. })));
        let negative = HermitianOperator::from_real_diagonal(&[1.2, -0.2]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::NotPositive { .. })));
        let big = HermitianOperator::from_real_diagonal(&[1.5, 0.0]);
        assert!(matches!(Effect::new(big), Err(Error::NotAnEffect { .. })));
        let incomplete = vec![HermitianOperator::from_real_diagonal(&[1.0, 0.0])];
        assert!(ProjectiveBasis::new(incomplete).is_err());
        let half = Effect::new(HermitianOperator::identity(2).scale(0.5)).unwrap();
        assert!(Povm::new(vec![half.clone()]).is_err());
        assert!(Povm::new(vec![half.clone(), half]).is_ok());
        assert!(SeparableDecomposition::new(vec![0.5, 0.6], vec![
            (random_density(2, 0), random_density(2, 1)),
            (random_density(2, 2), random_density(2, 3)),
        ]).is_err());
    }

    #[test]
    fn swapped_exchanges_factors() {
        let a = random_density(2, 5);
        let b = random_density(3, 6);
        let s = BipartiteState::product(&a, &b).swapped();
        assert_eq!(s.dims(), (3, 2));
        assert!((s.op() - &tensor(b.op(), a.op())).max_abs_entry() < 1e-15);
        let r = random_bipartite((2, 3), 1);
        assert!((r.swapped().swapped().op() - r.op()).max_abs_entry() == 0.0);
    }

    #[test]
    fn qubit_basis_directions() {
        let z = ProjectiveBasis::qubit(0.0, 0.0);
        assert!((&z.projectors()[0] - &HermitianOperator::from_real_diagonal(&[1.0, 0.0])).max_abs_entry() < 1e-15);
        let b = ProjectiveBasis::qubit(1.1, 2.3);
        ProjectiveBasis::new(b.projectors().to_vec()).unwrap();
        // Bloch vector of first projector
        let x = hs_inner(&b.projectors()[0], &HermitianOperator::pauli_x()).unwrap();
        let y = hs_inner(&b.projectors()[0], &HermitianOperator::pauli_y()).unwrap();
        let z = hs_inner(&b.projectors()[0], &HermitianOperator::pauli_z()).unwrap();
        assert!((x - 1.1f64.sin() * 2.3f64.cos()).abs() < 1e-14);
        assert!((y - 1.1f64.sin() * 2.3f64.sin()).abs() < 1e-14);
        assert!((z - 1.1f64.cos()).abs() < 1e-14);
    }
}
