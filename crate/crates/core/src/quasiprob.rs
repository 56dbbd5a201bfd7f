//! Quasiprobability representations over product operator frames.
//!
//! A frame is an informationally complete family of `d²` states `{F_k}`;
//! its dual `{G_k}` satisfies `A = Σ_k ⟨F_k, A⟩ G_k = Σ_k ⟨G_k, A⟩ F_k`. A
//! bipartite state then reads `ρ = Σ_ij w_ij F_i ⊗ F_j` with real weights
//! `w_ij = ⟨G_i ⊗ G_j, ρ⟩` summing to one, and effect responses `⟨F_k, M⟩`
//! are genuine probabilities.
//!
//! Negative weights in one fixed frame say nothing about separability on
//! their own: a separable state is guaranteed a nonnegative representation
//! only over the frame built from its own decomposition. An entangled
//! state, however, has a negative weight in every product frame.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{self, tensor, HermitianOperator};
use crate::states::{random_effect_with, seeded_rng, BipartiteState, DensityMatrix, Effect};

/// Gram matrices with reciprocal condition number below this are rejected.
pub const GRAM_RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorFrame {
    elements: Vec<DensityMatrix>,
}

fn gram(elements: &[DensityMatrix]) -> DMatrix<f64> {
    let n = elements.len();
    DMatrix::from_fn(n, n, |k, l| operator::hs_unchecked(elements[k].op(), elements[l].op()))
}

impl OperatorFrame {
    pub fn new(elements: Vec<DensityMatrix>) -> Result<Self> {
        let d = elements
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty frame".into()))?
            .dim();
        if elements.len() != d * d {
            return Err(Error::InvalidParameter(format!(
                "a frame on C^{d} needs {} elements, got {}",
                d * d,
                elements.len()
            )));
        }
        if let Some(e) = elements.iter().find(|e| e.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: e.dim() });
        }
        let ev = gram(&elements).symmetric_eigenvalues();
        let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !(lo > GRAM_RCOND_MIN * hi) {
            return Err(Error::SingularGram);
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[DensityMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn gram(&self) -> DMatrix<f64> {
        gram(&self.elements)
    }
}

/// Biorthogonal partner of an [`OperatorFrame`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualFrame {
    elements: Vec<HermitianOperator>,
}

impl DualFrame {
    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }
}

/// Signed weight table over a product frame.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiMeasure {
    weights: DMatrix<f64>,
}

impl QuasiMeasure {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let total = weights.sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("quasi-measure sums to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.min()
    }
}

/// Tetrahedral qubit SIC: projectors onto Bloch directions
/// `(1,1,1)`, `(1,−1,−1)`, `(−1,1,−1)`, `(−1,−1,1)` over `√3`.
pub fn qubit_sic_frame() -> OperatorFrame {
    let directions = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let paulis = [HermitianOperator::pauli_x(), HermitianOperator::pauli_y(), HermitianOperator::pauli_z()];
    let s = 1.0 / 3f64.sqrt();
    let elements = directions
        .iter()
        .map(|n| {
            let mut op = HermitianOperator::identity(2);
            for (c, p) in n.iter().zip(&paulis) {
                op = &op + &p.scale(c * s);
            }
            DensityMatrix::from_op_unchecked(op.scale(0.5))
        })
        .collect();
    OperatorFrame::new(elements).expect("SIC is informationally complete")
}

/// `G_k = Σ_l (Γ⁻¹)_kl F_l` with `Γ_kl = ⟨F_k, F_l⟩`.
pub fn dual_frame(f: &OperatorFrame) -> Result<DualFrame> {
    let inv = f.gram().try_inverse().ok_or(Error::SingularGram)?;
    let n = f.elements.len();
    let d = f.dim();
    let elements = (0..n)
        .map(|k| {
            let mut g = HermitianOperator::zeros(d);
            for (l, fl) in f.elements.iter().enumerate() {
                g = &g + &fl.op().scale(inv[(k, l)]);
            }
            g
        })
        .collect();
    Ok(DualFrame { elements })
}

fn check_frame_dims(s: &BipartiteState, fa: &OperatorFrame, fb: &OperatorFrame) -> Result<()> {
    let (da, db) = s.dims();
    if fa.dim() != da {
        return Err(Error::DimensionMismatch { expected: da, found: fa.dim() });
    }
    if fb.dim() != db {
        return Err(Error::DimensionMismatch { expected: db, found: fb.dim() });
    }
    Ok(())
}

/// `w_ij = ⟨G_i ⊗ G_j, ρ⟩`.
pub fn represent_state(s: &BipartiteState, fa: &OperatorFrame, fb: &OperatorFrame) -> Result<QuasiMeasure> {
    check_frame_dims(s, fa, fb)?;
    let ga = dual_frame(fa)?;
    let gb = dual_frame(fb)?;
    let weights = DMatrix::from_fn(ga.elements.len(), gb.elements.len(), |i, j| {
        operator::hs_unchecked(&tensor(&ga.elements[i], &gb.elements[j]), s.op())
    });
    Ok(QuasiMeasure { weights })
}

/// `f_k = ⟨F_k, M⟩`.
pub fn represent_effect(m: &Effect, f: &OperatorFrame) -> Result<Vec<f64>> {
    f.elements.iter().map(|fk| operator::hs_inner(fk.op(), m.op())).collect()
}

/// Largest Born-rule deviation of the quasiprobability representation over
/// `n_samples` seeded random product effects.
pub fn born_check(
    s: &BipartiteState,
    fa: &OperatorFrame,
    fb: &OperatorFrame,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let w = represent_state(s, fa, fb)?;
    let (da, db) = s.dims();
    let mut rng = seeded_rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let ma = random_effect_with(da, &mut rng);
        let mb = random_effect_with(db, &mut rng);
        let ra = represent_effect(&ma, fa)?;
        let rb = represent_effect(&mb, fb)?;
        let mut predicted = 0.0;
        for (i, a) in ra.iter().enumerate() {
            for (j, b) in rb.iter().enumerate() {
                predicted += w.weights[(i, j)] * a * b;
            }
        }
        worst = worst.max((predicted - s.born(&ma, &mb)?).abs());
    }
    Ok(worst)
}

/// `Σ|w| − 1`; zero exactly when every weight is nonnegative.
pub fn negativity(w: &QuasiMeasure) -> f64 {
    (w.weights.iter().map(|x| x.abs()).sum::<f64>() - 1.0).max(0.0)
}

/// `Σ_ij w_ij F_i ⊗ F_j`.
pub fn reconstruct(w: &QuasiMeasure, fa: &OperatorFrame, fb: &OperatorFrame) -> HermitianOperator {
    let mut out = HermitianOperator::zeros(fa.dim() * fb.dim());
    for (i, a) in fa.elements.iter().enumerate() {
        for (j, b) in fb.elements.iter().enumerate() {
            out = &out + &tensor(a.op(), b.op()).scale(w.weights[(i, j)]);
        }
    }
    out
}
