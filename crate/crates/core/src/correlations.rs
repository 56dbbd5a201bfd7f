//! Entropic correlations, quantum discord, and the algebraic zero-discord
//! certificate.
//!
//! A state is classical on side `a` (zero `D(b|a)`) exactly when it can be
//! written `Σ_i p_i Π_i ⊗ ρ_i` with orthogonal rank-1 projectors `Π_i`.
//! Expanding `ρ = Σ_m A_m ⊗ B_m` over a Hermitian basis `{B_m}` of side `b`,
//! that holds iff the operators `A_m` pairwise commute; their common
//! eigenbasis is the `{Π_i}`. This is what [`is_classical_quantum`] tests and
//! what [`extract_cq_decomposition`] diagonalizes. The grid optimizer in
//! [`discord`] is only used to put a number on nonzero discord.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{self, commutator_norm, hermitian_basis, tensor, ComplexMatrix, HermitianOperator};
use crate::states::{
    from_cc_decomposition, seeded_rng, BipartiteState, CCDecomposition, CQDecomposition, DensityMatrix,
    Povm, ProjectiveBasis,
};
use crate::Side;

/// Eigenvalues below this are dropped from entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// Outcomes less likely than this are dropped from post-measurement ensembles.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-12;

/// Bound on randomized attempts to split degenerate common eigenspaces.
pub const MAX_SPLIT_ATTEMPTS: usize = 8;

const SPLIT_SEED: u64 = 0x5eed_d15c;

/// Which conditional discord to compute. `BGivenA` is `D(b|a)`, obtained
/// by measuring subsystem `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "b|a")]
    BGivenA,
    #[serde(rename = "a|b")]
    AGivenB,
}

impl Direction {
    pub fn measured(self) -> Side {
        match self {
            Direction::BGivenA => Side::A,
            Direction::AGivenB => Side::B,
        }
    }
}

/// Search settings for the discord optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordConfig {
    /// Polar-angle samples; the azimuth gets twice as many.
    pub grid_resolution: usize,
    /// Step halvings of the coordinate-descent refinement.
    pub refine_iterations: usize,
    /// Values with magnitude below this are reported as exactly zero.
    pub tolerance: f64,
}

impl Default for DiscordConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 64,
            refine_iterations: 40,
            tolerance: 1e-9,
        }
    }
}

impl DiscordConfig {
    pub fn new(grid_resolution: usize, refine_iterations: usize, tolerance: f64) -> Result<Self> {
        let cfg = Self {
            grid_resolution,
            refine_iterations,
            tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_resolution < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution {} below minimum 8",
                self.grid_resolution
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("discord tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DiscordResult {
    /// Discord in bits, clamped to 0 below the tolerance.
    pub value: f64,
    pub direction: Direction,
    pub optimal_measurement: ProjectiveBasis,
    /// Bloch angles of the first projector of `optimal_measurement`.
    pub theta: f64,
    pub phi: f64,
    /// Maximal measured mutual information found, in bits.
    pub j_value: f64,
    pub mutual_information: f64,
}

/// `−Σ λ log₂ λ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.op())
}

fn entropy_of(op: &HermitianOperator) -> f64 {
    op.eigenvalues()
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum()
}

/// `S(ρ_a) + S(ρ_b) − S(ρ)`.
pub fn mutual_information(s: &BipartiteState) -> f64 {
    von_neumann_entropy(&s.reduced(Side::A)) + von_neumann_entropy(&s.reduced(Side::B))
        - von_neumann_entropy(s.rho())
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub outcome: usize,
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Conditional states of `b` after measuring `a`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub branches: Vec<Branch>,
    /// Outcomes dropped for having probability below [`NEGLIGIBLE_PROBABILITY`].
    pub omitted: Vec<usize>,
}

/// `tr_a((M ⊗ I) ρ)`, unnormalized.
fn apply_on_a(s: &BipartiteState, m: &HermitianOperator) -> HermitianOperator {
    let (da, db) = s.dims();
    let rho = s.op().matrix();
    let mm = m.matrix();
    let out = ComplexMatrix::from_fn(db, db, |k, l| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..da {
            for j in 0..da {
                acc += mm[(j, i)] * rho[(i * db + k, j * db + l)];
            }
        }
        acc
    });
    HermitianOperator::from_hermitian(out)
}

pub fn post_measurement_ensemble(s: &BipartiteState, m: &Povm) -> Result<Ensemble> {
    let da = s.dims().0;
    if m.dim() != da {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: m.dim(),
        });
    }
    let mut branches = Vec::with_capacity(m.effects().len());
    let mut omitted = Vec::new();
    for (outcome, effect) in m.effects().iter().enumerate() {
        let unnormalized = apply_on_a(s, effect.op());
        let probability = unnormalized.trace();
        if probability < NEGLIGIBLE_PROBABILITY {
            omitted.push(outcome);
            continue;
        }
        branches.push(Branch {
            outcome,
            probability,
            state: DensityMatrix::from_op_unchecked(unnormalized.scale(1.0 / probability)),
        });
    }
    Ok(Ensemble { branches, omitted })
}

/// `S(ρ_b) − Σ_i p_i S(ρ_b|i)` for a measurement on `a`.
pub fn measured_mutual_information(s: &BipartiteState, m: &Povm) -> Result<f64> {
    let ensemble = post_measurement_ensemble(s, m)?;
    let conditional: f64 = ensemble
        .branches
        .iter()
        .map(|b| b.probability * von_neumann_entropy(&b.state))
        .sum();
    Ok(von_neumann_entropy(&s.reduced(Side::B)) - conditional)
}

/// Measured mutual information for the qubit basis along Bloch angles
/// `(θ, φ)` on side `a`; skips the POVM validation of the public path.
fn j_at(s: &BipartiteState, s_b: f64, theta: f64, phi: f64) -> f64 {
    let basis = ProjectiveBasis::qubit(theta, phi);
    let mut conditional = 0.0;
    for p in basis.projectors() {
        let unnormalized = apply_on_a(s, p);
        let prob = unnormalized.trace();
        if prob < NEGLIGIBLE_PROBABILITY {
            continue;
        }
        conditional += prob * entropy_of(&unnormalized.scale(1.0 / prob));
    }
    s_b - conditional
}

fn canonical_angles(theta: f64, phi: f64) -> (f64, f64) {
    let (x, y, z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    let t = z.clamp(-1.0, 1.0).acos();
    let mut p = y.atan2(x);
    if p < 0.0 {
        p += 2.0 * PI;
    }
    if t.sin().abs() < 1e-15 {
        p = 0.0;
    }
    (t, p)
}

/// `D = I − max J` over rank-1 projective measurements on the (qubit)
/// measured side.
///
/// The maximum is searched over a `θ × φ` grid and refined by coordinate
/// descent with step halving. General POVMs are not searched; on the states
/// this crate is calibrated against, projective measurements are optimal.
pub fn discord(s: &BipartiteState, direction: Direction, cfg: &DiscordConfig) -> Result<DiscordResult> {
    cfg.validate()?;
    let measured_dim = s.dim_of(direction.measured());
    if measured_dim != 2 {
        return Err(Error::UnsupportedDimension(measured_dim));
    }
    let oriented = match direction {
        Direction::BGivenA => s.clone(),
        Direction::AGivenB => s.swapped(),
    };
    let info = mutual_information(&oriented);
    let s_b = von_neumann_entropy(&oriented.reduced(Side::B));
    let j = |theta: f64, phi: f64| j_at(&oriented, s_b, theta, phi);

    let n_theta = cfg.grid_resolution;
    let n_phi = 2 * cfg.grid_resolution;
    let step_theta = PI / (n_theta - 1) as f64;
    let step_phi = 2.0 * PI / n_phi as f64;

    // grid scan, θ-major; strict comparison keeps the lexicographically
    // smallest maximizer
    let (mut theta, mut phi, mut best) = (0.0, 0.0, f64::NEG_INFINITY);
    for it in 0..n_theta {
        let t = it as f64 * step_theta;
        for ip in 0..n_phi {
            let p = ip as f64 * step_phi;
            let value = j(t, p);
            if value > best {
                (theta, phi, best) = (t, p, value);
            }
        }
    }

    let (mut dt, mut dp) = (step_theta, step_phi);
    for _ in 0..cfg.refine_iterations {
        for _ in 0..64 {
            let mut improved = false;
            for (ct, cp) in [(theta + dt, phi), (theta - dt, phi), (theta, phi + dp), (theta, phi - dp)] {
                let value = j(ct, cp);
                if value > best {
                    (theta, phi, best) = (ct, cp, value);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        dt *= 0.5;
        dp *= 0.5;
    }

    let (theta, phi) = canonical_angles(theta, phi);
    let raw = info - best;
    let value = if raw.abs() < cfg.tolerance { 0.0 } else { raw };
    Ok(DiscordResult {
        value,
        direction,
        optimal_measurement: ProjectiveBasis::qubit(theta, phi),
        theta,
        phi,
        j_value: best,
        mutual_information: info,
    })
}

/// Operators `A_m = tr_other(ρ (I ⊗ B_m)) / ⟨B_m, B_m⟩` acting on `side`,
/// one per element of the Hermitian basis of the other side.
pub fn conditional_operator_family(s: &BipartiteState, side: Side) -> Vec<HermitianOperator> {
    let oriented = match side {
        Side::A => s.clone(),
        Side::B => s.swapped(),
    };
    let (da, db) = oriented.dims();
    let rho = oriented.op().matrix();
    hermitian_basis(db)
        .iter()
        .map(|bm| {
            let norm = operator::hs_unchecked(bm, bm);
            let bmat = bm.matrix();
            // (i, j) entry: Σ_{k,l} ρ[(i,k),(j,l)] B[l,k]
            let out = ComplexMatrix::from_fn(da, da, |i, j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..db {
                    for l in 0..db {
                        acc += rho[(i * db + k, j * db + l)] * bmat[(l, k)];
                    }
                }
                acc / norm
            });
            HermitianOperator::from_hermitian(out)
        })
        .collect()
}

/// Largest commutator norm within the conditional-operator family of `side`.
pub fn max_family_commutator(s: &BipartiteState, side: Side) -> f64 {
    let family = conditional_operator_family(s, side);
    let mut worst = 0.0f64;
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            worst = worst.max(commutator_norm(&family[i], &family[j]).expect("same dims"));
        }
    }
    worst
}

/// Exact test for zero discord with measurements on `side`.
pub fn is_classical_quantum(s: &BipartiteState, side: Side, tol: f64) -> bool {
    max_family_commutator(s, side) < tol
}

fn max_off_diagonal(m: &ComplexMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Common eigenbasis of a commuting Hermitian family, as unitary columns.
fn common_eigenbasis(family: &[HermitianOperator], tol: f64) -> Result<ComplexMatrix> {
    let d = family[0].dim();
    let mut rng = seeded_rng(SPLIT_SEED);
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let mut combo = HermitianOperator::zeros(d);
        for a in family {
            let c: f64 = StandardNormal.sample(&mut rng);
            combo = &combo + &a.scale(c);
        }
        let v = combo.spectrum().eigenvectors;
        let diagonal = family
            .iter()
            .all(|a| max_off_diagonal(&(v.adjoint() * a.matrix() * &v)) <= tol);
        if diagonal {
            return Ok(v);
        }
    }
    Err(Error::DegeneracyUnresolved {
        attempts: MAX_SPLIT_ATTEMPTS,
    })
}

/// Writes a state classical on `side` as `Σ_i p_i Π_i ⊗ ρ_i`.
///
/// Outcomes with negligible weight get the maximally mixed conditional so
/// the basis stays complete.
pub fn extract_cq_decomposition(s: &BipartiteState, side: Side, tol: f64) -> Result<CQDecomposition> {
    if !is_classical_quantum(s, side, tol) {
        return Err(Error::NotClassical(side));
    }
    let family = conditional_operator_family(s, side);
    let oriented = match side {
        Side::A => s.clone(),
        Side::B => s.swapped(),
    };
    let (da, db) = oriented.dims();
    let reconstruction_tol = tol.max(1e-10);
    let v = common_eigenbasis(&family, tol)?;
    let mut projectors = Vec::with_capacity(da);
    let mut weights = Vec::with_capacity(da);
    let mut conditionals = Vec::with_capacity(da);
    for k in 0..da {
        let col = v.column(k).into_owned();
        let proj = HermitianOperator::from_hermitian(&col * col.adjoint());
        let unnormalized = apply_on_a(&oriented, &proj);
        let p = unnormalized.trace().max(0.0);
        let cond = if p < NEGLIGIBLE_PROBABILITY {
            DensityMatrix::maximally_mixed(db)
        } else {
            DensityMatrix::from_op_unchecked(unnormalized.scale(1.0 / p))
        };
        projectors.push(proj);
        weights.push(p);
        conditionals.push(cond);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let decomposition = CQDecomposition::new(
        side,
        weights,
        ProjectiveBasis::from_projectors_unchecked(projectors),
        conditionals,
    )?;
    let distance = decomposition.to_state().trace_distance(s)?;
    if distance > reconstruction_tol {
        return Err(Error::DegeneracyUnresolved {
            attempts: MAX_SPLIT_ATTEMPTS,
        });
    }
    Ok(decomposition)
}

/// Writes a state classical on both sides as `Σ_ij p_ij Π^a_i ⊗ Π^b_j`.
pub fn extract_cc_decomposition(s: &BipartiteState, tol: f64) -> Result<CCDecomposition> {
    let cq_a = extract_cq_decomposition(s, Side::A, tol)?;
    let cq_b = extract_cq_decomposition(s, Side::B, tol)?;
    let (da, db) = s.dims();
    let mut weights = DMatrix::<f64>::zeros(da, db);
    for (i, pa) in cq_a.basis.projectors().iter().enumerate() {
        for (j, pb) in cq_b.basis.projectors().iter().enumerate() {
            weights[(i, j)] = operator::hs_unchecked(&tensor(pa, pb), s.op()).max(0.0);
        }
    }
    let total = weights.sum();
    weights /= total;
    let decomposition = CCDecomposition::new(weights, cq_a.basis, cq_b.basis)?;
    if from_cc_decomposition(&decomposition).trace_distance(s)? > tol.max(1e-10) {
        return Err(Error::NotClassical(Side::A));
    }
    Ok(decomposition)
}

/// Correlation matrix `T_uv = tr(ρ σ_u ⊗ σ_v)` of a two-qubit state.
pub fn correlation_matrix(s: &BipartiteState) -> Result<Matrix3<f64>> {
    if s.dims() != (2, 2) {
        return Err(Error::InvalidParameter(format!(
            "correlation matrix needs two qubits, got {:?}",
            s.dims()
        )));
    }
    let paulis = [HermitianOperator::pauli_x(), HermitianOperator::pauli_y(), HermitianOperator::pauli_z()];
    Ok(Matrix3::from_fn(|u, v| {
        operator::hs_unchecked(&tensor(&paulis[u], &paulis[v]), s.op())
    }))
}

/// Maximal CHSH value `2√(m₁ + m₂)`, with `m₁ ≥ m₂` the top eigenvalues of
/// `TᵀT`.
pub fn chsh_max(s: &BipartiteState) -> Result<f64> {
    let t = correlation_matrix(s)?;
    let mut ev: Vec<f64> = (t.transpose() * t).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (ev[0] + ev[1]).max(0.0).sqrt())
}
