//! Finite linear local-hidden-variable models.
//!
//! A model has finite event spaces `Ω_a`, `Ω_b`, a joint probability table
//! `μ` on `Ω_a × Ω_b`, and one unit-trace positive kernel per event. The
//! response of event `ξ` to an effect `M` is `⟨F_ξ, M⟩`, so
//!
//! ```text
//! P(Ma, Mb) = Σ_ξη μ_ξη ⟨F^a_ξ, Ma⟩ ⟨F^b_η, Mb⟩,   ρ = Σ_ξη μ_ξη F^a_ξ ⊗ F^b_η.
//! ```
//!
//! Measurable sets are all subsets of an event space (bitmasks, bit `k` is
//! event `k`). A subset is *realizable* when some effect answers 1 on every
//! event inside and 0 on every event outside; a side is *tight* when every
//! subset is realizable.

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{
    self, hermitian_basis, hs_inner, subspace_overlap, support_basis, support_projector, tensor,
    trace_distance, ComplexMatrix, HermitianOperator, RANK_TOL,
};
use crate::states::{
    random_effect_with, seeded_rng, BipartiteState, CCDecomposition, DensityMatrix, Effect,
    SeparableDecomposition,
};
use crate::Side;

/// Power-set enumeration limit for [`is_tight`].
pub const MAX_AUDIT_EVENTS: usize = 20;

/// Two supports are orthogonal when the largest singular value of the
/// cross-Gram of their bases is below this.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// Two kernels are equal when their trace distance is below this.
pub const KERNEL_EQUALITY_TOL: f64 = 1e-8;

/// Tolerance on realized indicator values.
pub const INDICATOR_TOL: f64 = 1e-10;

const MEASURE_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventSpace {
    labels: Vec<String>,
}

impl EventSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("event space must be non-empty".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidParameter(format!("duplicate event label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// Events labelled `0..n`.
    pub fn numbered(n: usize) -> Self {
        Self {
            labels: (0..n).map(|k| k.to_string()).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Probability table on `Ω_a × Ω_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasure {
    weights: DMatrix<f64>,
}

impl JointMeasure {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("measure has negative weight {w}")));
        }
        let total = weights.sum();
        if (total - 1.0).abs() > MEASURE_SUM_TOL {
            return Err(Error::InvalidParameter(format!("measure sums to {total}, expected 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }
}

/// One kernel per event of a side.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorKernel {
    operators: Vec<DensityMatrix>,
}

impl OperatorKernel {
    pub fn new(operators: Vec<DensityMatrix>) -> Result<Self> {
        let d = operators
            .first()
            .ok_or_else(|| Error::InvalidParameter("kernel must be non-empty".into()))?
            .dim();
        if let Some(op) = operators.iter().find(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[DensityMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearLhvModel {
    omega_a: EventSpace,
    omega_b: EventSpace,
    measure: JointMeasure,
    kernel_a: OperatorKernel,
    kernel_b: OperatorKernel,
}

impl LinearLhvModel {
    pub fn new(
        omega_a: EventSpace,
        omega_b: EventSpace,
        measure: JointMeasure,
        kernel_a: OperatorKernel,
        kernel_b: OperatorKernel,
    ) -> Result<Self> {
        let w = measure.weights();
        if w.nrows() != omega_a.len() || w.ncols() != omega_b.len() {
            return Err(Error::InvalidParameter(format!(
                "measure is {}x{} but event spaces have {} and {} events",
                w.nrows(),
                w.ncols(),
                omega_a.len(),
                omega_b.len()
            )));
        }
        if kernel_a.len() != omega_a.len() || kernel_b.len() != omega_b.len() {
            return Err(Error::InvalidParameter(
                "kernel lengths must match event-space sizes".into(),
            ));
        }
        Ok(Self {
            omega_a,
            omega_b,
            measure,
            kernel_a,
            kernel_b,
        })
    }

    pub fn omega(&self, side: Side) -> &EventSpace {
        match side {
            Side::A => &self.omega_a,
            Side::B => &self.omega_b,
        }
    }

    pub fn kernel(&self, side: Side) -> &OperatorKernel {
        match side {
            Side::A => &self.kernel_a,
            Side::B => &self.kernel_b,
        }
    }

    pub fn measure(&self) -> &JointMeasure {
        &self.measure
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.kernel_a.dim(), self.kernel_b.dim())
    }

    /// Merges events whose kernels are equal, summing their weights.
    ///
    /// Events with equal kernels are indistinguishable by every effect, so
    /// the merged model describes the same statistics with the coarsest
    /// event spaces.
    pub fn merge_equal_kernels(&self) -> LinearLhvModel {
        let group = |kernel: &OperatorKernel, omega: &EventSpace| {
            let mut reps: Vec<usize> = Vec::new();
            let mut assignment = Vec::with_capacity(kernel.len());
            let mut labels: Vec<String> = Vec::new();
            for (k, f) in kernel.operators().iter().enumerate() {
                let found = reps.iter().position(|&r| kernels_equal(&kernel.operators()[r], f));
                match found {
                    Some(g) => {
                        assignment.push(g);
                        labels[g] = format!("{}+{}", labels[g], omega.labels()[k]);
                    }
                    None => {
                        assignment.push(reps.len());
                        reps.push(k);
                        labels.push(omega.labels()[k].clone());
                    }
                }
            }
            let ops = reps.iter().map(|&r| kernel.operators()[r].clone()).collect();
            (assignment, labels, ops)
        };
        let (assign_a, labels_a, ops_a) = group(&self.kernel_a, &self.omega_a);
        let (assign_b, labels_b, ops_b) = group(&self.kernel_b, &self.omega_b);
        let mut weights = DMatrix::zeros(labels_a.len(), labels_b.len());
        for (i, &gi) in assign_a.iter().enumerate() {
            for (j, &gj) in assign_b.iter().enumerate() {
                weights[(gi, gj)] += self.measure.weights[(i, j)];
            }
        }
        LinearLhvModel {
            omega_a: EventSpace { labels: labels_a },
            omega_b: EventSpace { labels: labels_b },
            measure: JointMeasure { weights },
            kernel_a: OperatorKernel { operators: ops_a },
            kernel_b: OperatorKernel { operators: ops_b },
        }
    }
}

/// `f_ξ(M) = ⟨F_ξ, M⟩`.
pub fn response(kernel: &OperatorKernel, event: usize, effect: &Effect) -> Result<f64> {
    let f = kernel.operators().get(event).ok_or_else(|| {
        Error::InvalidParameter(format!("event {event} out of range 0..{}", kernel.len()))
    })?;
    hs_inner(f.op(), effect.op())
}

fn responses(kernel: &OperatorKernel, effect: &Effect) -> Result<Vec<f64>> {
    (0..kernel.len()).map(|k| response(kernel, k, effect)).collect()
}

/// The operator `F` with `⟨F, B_m⟩ = values[m]` for a complete orthogonal
/// Hermitian basis `{B_m}`.
pub fn riesz_operator(values: &[f64], basis: &[HermitianOperator]) -> Result<HermitianOperator> {
    let d = basis
        .first()
        .ok_or_else(|| Error::IncompleteBasis("empty basis".into()))?
        .dim();
    if basis.len() != d * d {
        return Err(Error::IncompleteBasis(format!(
            "{} elements for dimension {d}, need {}",
            basis.len(),
            d * d
        )));
    }
    if values.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: values.len(),
        });
    }
    let norms = basis
        .iter()
        .map(|b| hs_inner(b, b))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..basis.len() {
        if !(norms[i] > 0.0) {
            return Err(Error::IncompleteBasis(format!("element {i} is zero")));
        }
        for j in (i + 1)..basis.len() {
            let overlap = operator::hs_unchecked(&basis[i], &basis[j]);
            if overlap.abs() > 1e-10 * (norms[i] * norms[j]).sqrt() {
                return Err(Error::IncompleteBasis(format!("elements {i} and {j} are not orthogonal")));
            }
        }
    }
    let mut out = HermitianOperator::zeros(d);
    for ((b, v), n) in basis.iter().zip(values).zip(&norms) {
        out = &out + &b.scale(v / n);
    }
    Ok(out)
}

/// Recovers the kernel of a linear response from its values on the
/// generalized Gell-Mann basis.
pub fn riesz_from_response(d: usize, response: impl Fn(&HermitianOperator) -> f64) -> Result<HermitianOperator> {
    let basis = hermitian_basis(d);
    let values: Vec<f64> = basis.iter().map(&response).collect();
    riesz_operator(&values, &basis)
}

/// One event per product term, diagonal measure.
pub fn build_from_separable(d: &SeparableDecomposition) -> LinearLhvModel {
    let n = d.len();
    let weights = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d.weights()));
    LinearLhvModel {
        omega_a: EventSpace::numbered(n),
        omega_b: EventSpace::numbered(n),
        measure: JointMeasure { weights },
        kernel_a: OperatorKernel {
            operators: d.pairs().iter().map(|(a, _)| a.clone()).collect(),
        },
        kernel_b: OperatorKernel {
            operators: d.pairs().iter().map(|(_, b)| b.clone()).collect(),
        },
    }
}

/// Events are the basis projectors on each side, measure `p_ij`.
pub fn build_tight_from_cc(d: &CCDecomposition) -> LinearLhvModel {
    let (da, db) = d.dims();
    let kernel = |projectors: &[HermitianOperator]| OperatorKernel {
        operators: projectors
            .iter()
            .cloned()
            .map(DensityMatrix::from_op_unchecked)
            .collect(),
    };
    LinearLhvModel {
        omega_a: EventSpace::numbered(da),
        omega_b: EventSpace::numbered(db),
        measure: JointMeasure {
            weights: d.weights().clone(),
        },
        kernel_a: kernel(d.basis_a().projectors()),
        kernel_b: kernel(d.basis_b().projectors()),
    }
}

/// `Σ_ξη μ_ξη f^a_ξ(Ma) f^b_η(Mb)`.
pub fn evaluate_joint(m: &LinearLhvModel, ma: &Effect, mb: &Effect) -> Result<f64> {
    let fa = responses(&m.kernel_a, ma)?;
    let fb = responses(&m.kernel_b, mb)?;
    let w = m.measure.weights();
    let mut total = 0.0;
    for (i, a) in fa.iter().enumerate() {
        for (j, b) in fb.iter().enumerate() {
            total += w[(i, j)] * a * b;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    pub max_abs_deviation: f64,
    pub samples: usize,
    /// No samples were drawn, so the deviation says nothing.
    pub vacuous: bool,
}

fn check_dims(m: &LinearLhvModel, s: &BipartiteState) -> Result<()> {
    let (ma, mb) = m.dims();
    let (sa, sb) = s.dims();
    if ma != sa {
        return Err(Error::DimensionMismatch { expected: sa, found: ma });
    }
    if mb != sb {
        return Err(Error::DimensionMismatch { expected: sb, found: mb });
    }
    Ok(())
}

/// Largest Born-rule deviation over `n_samples` seeded random product
/// effects.
pub fn verify_against_state(
    m: &LinearLhvModel,
    s: &BipartiteState,
    n_samples: usize,
    seed: u64,
) -> Result<Verification> {
    check_dims(m, s)?;
    let mut rng = seeded_rng(seed);
    verify_with_rng(m, s, n_samples, &mut rng)
}

pub fn verify_with_rng<R: Rng + ?Sized>(
    m: &LinearLhvModel,
    s: &BipartiteState,
    n_samples: usize,
    rng: &mut R,
) -> Result<Verification> {
    check_dims(m, s)?;
    let (da, db) = s.dims();
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let ma = random_effect_with(da, rng);
        let mb = random_effect_with(db, rng);
        let dev = (evaluate_joint(m, &ma, &mb)? - s.born(&ma, &mb)?).abs();
        worst = worst.max(dev);
    }
    Ok(Verification {
        max_abs_deviation: worst,
        samples: n_samples,
        vacuous: n_samples == 0,
    })
}

/// `Σ_ξη μ_ξη F^a_ξ ⊗ F^b_η`.
pub fn reconstruct_state(m: &LinearLhvModel) -> BipartiteState {
    let (da, db) = m.dims();
    let w = m.measure.weights();
    let mut sum = HermitianOperator::zeros(da * db);
    for (i, fa) in m.kernel_a.operators().iter().enumerate() {
        for (j, fb) in m.kernel_b.operators().iter().enumerate() {
            if w[(i, j)] != 0.0 {
                sum = &sum + &tensor(fa.op(), fb.op()).scale(w[(i, j)]);
            }
        }
    }
    BipartiteState::new(DensityMatrix::from_op_unchecked(sum), (da, db)).expect("kernel dims")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Realization {
    /// An effect answering 1 inside the subset and 0 outside.
    Realizable(Effect),
    NotRealizable,
}

impl Realization {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Realization::Realizable(_))
    }
}

fn kernel_supports(kernel: &OperatorKernel) -> Vec<ComplexMatrix> {
    kernel
        .operators()
        .iter()
        .map(|f| support_basis(f.op(), RANK_TOL).expect("kernels are positive"))
        .collect()
}

fn joint_support(supports: &[ComplexMatrix], members: impl Iterator<Item = usize>, d: usize) -> ComplexMatrix {
    let mut sum = ComplexMatrix::zeros(d, d);
    for k in members {
        sum += &supports[k] * supports[k].adjoint();
    }
    support_basis(&HermitianOperator::from_hermitian(sum), RANK_TOL).expect("sum of projectors")
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn realize(kernel: &OperatorKernel, supports: &[ComplexMatrix], subset: u64) -> Realization {
    let n = kernel.len();
    let d = kernel.dim();
    if subset == 0 {
        return Realization::Realizable(Effect::zero(d));
    }
    if subset == full_mask(n) {
        return Realization::Realizable(Effect::identity(d));
    }
    let inside = joint_support(supports, (0..n).filter(|k| subset >> k & 1 == 1), d);
    let outside = joint_support(supports, (0..n).filter(|k| subset >> k & 1 == 0), d);
    if subspace_overlap(&inside, &outside) >= ORTHOGONALITY_TOL {
        return Realization::NotRealizable;
    }
    let effect = Effect::from_op_unchecked(HermitianOperator::from_hermitian(&inside * inside.adjoint()));
    let consistent = kernel.operators().iter().enumerate().all(|(k, f)| {
        let target = if subset >> k & 1 == 1 { 1.0 } else { 0.0 };
        (operator::hs_unchecked(f.op(), effect.op()) - target).abs() <= INDICATOR_TOL
    });
    if consistent {
        Realization::Realizable(effect)
    } else {
        Realization::NotRealizable
    }
}

/// Whether the indicator of `subset` (bit `k` = event `k`) on `side` is
/// produced by some effect. The candidate effect is the projector onto the
/// joint support of the kernels inside the subset, which works exactly when
/// that support is orthogonal to the joint support of the kernels outside.
pub fn indicator_realizable(m: &LinearLhvModel, side: Side, subset: u64) -> Result<Realization> {
    let kernel = m.kernel(side);
    let n = kernel.len();
    if n < 64 && subset >> n != 0 {
        return Err(Error::InvalidParameter(format!(
            "subset {subset:#b} references events beyond {n}"
        )));
    }
    Ok(realize(kernel, &kernel_supports(kernel), subset))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub side: Side,
    pub tight: bool,
    /// Unrealizable subsets as bitmasks, ascending.
    pub failing_subsets: Vec<u64>,
}

impl TightnessReport {
    /// Failing subsets as sorted event-index lists.
    pub fn failing_subset_indices(&self) -> Vec<Vec<usize>> {
        self.failing_subsets.iter().map(|&mask| mask_to_indices(mask)).collect()
    }
}

pub fn mask_to_indices(mask: u64) -> Vec<usize> {
    (0..64).filter(|k| mask >> k & 1 == 1).collect()
}

/// Power-set audit of the indicators on one side.
pub fn is_tight(m: &LinearLhvModel, side: Side) -> Result<TightnessReport> {
    let kernel = m.kernel(side);
    let n = kernel.len();
    if n > MAX_AUDIT_EVENTS {
        return Err(Error::EventSpaceTooLarge(n));
    }
    let supports = kernel_supports(kernel);
    let failing_subsets: Vec<u64> = (0..=full_mask(n))
        .filter(|&mask| !realize(kernel, &supports, mask).is_realizable())
        .collect();
    Ok(TightnessReport {
        side,
        tight: failing_subsets.is_empty(),
        failing_subsets,
    })
}

fn kernels_equal(a: &DensityMatrix, b: &DensityMatrix) -> bool {
    trace_distance(a.op(), b.op()).map(|t| t < KERNEL_EQUALITY_TOL).unwrap_or(false)
}

/// Pairwise geometry of the kernels on one side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelGeometry {
    /// Every pair is equal or support-orthogonal.
    pub equal_or_orthogonal: bool,
    /// Pairs `(i, j)`, `i < j`, with equal kernels.
    pub equal_pairs: Vec<(usize, usize)>,
}

impl KernelGeometry {
    /// Prediction for the power-set audit. Equal kernels can never be told
    /// apart, so a subset separating them is unrealizable.
    pub fn predicts_tight(&self) -> bool {
        self.equal_or_orthogonal && self.equal_pairs.is_empty()
    }
}

pub fn kernel_geometry(m: &LinearLhvModel, side: Side) -> KernelGeometry {
    let kernel = m.kernel(side);
    let supports = kernel_supports(kernel);
    let mut equal_or_orthogonal = true;
    let mut equal_pairs = Vec::new();
    for i in 0..kernel.len() {
        for j in (i + 1)..kernel.len() {
            if kernels_equal(&kernel.operators()[i], &kernel.operators()[j]) {
                equal_pairs.push((i, j));
            } else if subspace_overlap(&supports[i], &supports[j]) >= ORTHOGONALITY_TOL {
                equal_or_orthogonal = false;
            }
        }
    }
    KernelGeometry {
        equal_or_orthogonal,
        equal_pairs,
    }
}

/// Projector onto the support of a kernel; exposed for callers that want
/// to inspect why a subset fails.
pub fn kernel_support_projector(m: &LinearLhvModel, side: Side, event: usize) -> Result<HermitianOperator> {
    let f = m.kernel(side).operators().get(event).ok_or_else(|| {
        Error::InvalidParameter(format!("event {event} out of range"))
    })?;
    support_projector(f.op(), RANK_TOL)
}
