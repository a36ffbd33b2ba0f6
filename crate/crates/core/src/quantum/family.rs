//! Commutant projection families: the concrete finite-dimensional carrier of
//! an abelian subalgebra of the GNS commutant, hence of one orthogonal
//! decomposition of the state.
//!
//! Projections act through the `sqrt(rho) q sqrt(rho)` calculus; the GNS
//! space itself is never materialized. For a non-faithful state everything is
//! restricted to the support projector.

use num_complex::Complex64;

use crate::decomposition::{DensityState, FiniteDecomposition, WeightVector};
use crate::entropy::shannon_entropy;
use crate::error::{KsError, Result};
use crate::linalg::{commutator_norm, hermitian_residual, hermitize, max_abs, trace_re, CMatrix};
use crate::quantum::system::QuantumDynamicalSystem;
use crate::tolerance::Tolerances;

/// Mutually orthogonal Hermitian projections summing to the support
/// projector of the system state.
#[derive(Debug, Clone)]
pub struct CommutantProjectionFamily {
    projections: Vec<CMatrix>,
}

impl CommutantProjectionFamily {
    /// Full validation: Hermitian idempotents, pairwise orthogonal,
    /// block-diagonal, summing to the support projector.
    pub fn new(
        sys: &QuantumDynamicalSystem,
        projections: Vec<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let family = Self { projections };
        family.validate_members(sys, tol)?;
        for i in 0..family.projections.len() {
            for j in (i + 1)..family.projections.len() {
                let prod = max_abs(&(&family.projections[i] * &family.projections[j]));
                if prod > tol.state_check {
                    return Err(KsError::InvalidFamily(format!(
                        "projections {i} and {j} are not orthogonal: residual {prod:.3e}"
                    )));
                }
            }
        }
        Ok(family)
    }

    /// Validation that skips the pairwise product check. Used for families
    /// whose orthogonality holds by construction: conjugates `U q U*` of a
    /// valid family, and products of pairwise commuting valid families.
    pub(crate) fn from_orthogonal_by_construction(
        sys: &QuantumDynamicalSystem,
        projections: Vec<CMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let family = Self { projections };
        family.validate_members(sys, tol)?;
        Ok(family)
    }

    fn validate_members(&self, sys: &QuantumDynamicalSystem, tol: &Tolerances) -> Result<()> {
        if self.projections.is_empty() {
            return Err(KsError::InvalidFamily("empty projection family".into()));
        }
        let dim = sys.dim();
        let support = sys.support(tol);
        let mut sum = CMatrix::zeros(dim, dim);
        for (i, q) in self.projections.iter().enumerate() {
            if q.nrows() != dim || q.ncols() != dim {
                return Err(KsError::ShapeMismatch(format!(
                    "projection {i} is {}x{}, system dimension is {dim}",
                    q.nrows(),
                    q.ncols()
                )));
            }
            let herm = hermitian_residual(q);
            if herm > tol.state_check {
                return Err(KsError::InvalidFamily(format!(
                    "projection {i} not Hermitian: residual {herm:.3e}"
                )));
            }
            let idem = max_abs(&(q * q - q));
            if idem > tol.state_check {
                return Err(KsError::InvalidFamily(format!(
                    "projection {i} not idempotent: residual {idem:.3e}"
                )));
            }
            sys.algebra()
                .check_block_diagonal(q, tol.state_check, &format!("projection {i}"))?;
            sum += q;
        }
        // Sum = support projector also forces every member under the support.
        let defect = max_abs(&(&sum - &support.projector));
        if defect > tol.state_check * (dim as f64).sqrt() {
            return Err(KsError::InvalidFamily(format!(
                "projections sum to the support projector with defect {defect:.3e}"
            )));
        }
        Ok(())
    }

    /// The one-member family `{support projector}`: the only family a pure
    /// state admits.
    pub fn trivial(sys: &QuantumDynamicalSystem, tol: &Tolerances) -> Result<Self> {
        let support = sys.support(tol);
        Self::new(sys, vec![support.projector], tol)
    }

    /// Rank-one projections onto the columns of an orthonormal basis of the
    /// support.
    pub fn from_support_basis(
        sys: &QuantumDynamicalSystem,
        basis: &CMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        let mut projections = Vec::with_capacity(basis.ncols());
        for j in 0..basis.ncols() {
            let col = basis.column(j);
            projections.push(&col * col.adjoint());
        }
        Self::new(sys, projections, tol)
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    /// Max distance between corresponding projections; families are unordered
    /// but candidate streams compare them member-by-member after a canonical
    /// sort, so exact duplicates collapse.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (a, b) in self.projections.iter().zip(&other.projections) {
            worst = worst.max(max_abs(&(a - b)));
        }
        worst
    }

    pub fn describe(&self) -> String {
        format!("family({} projections)", self.len())
    }
}

/// Decomposition weights without materializing the components:
/// `lambda_i = tr(rho q_i)`. Zero-weight members are dropped.
pub fn family_weights(
    sys: &QuantumDynamicalSystem,
    family: &CommutantProjectionFamily,
    tol: &Tolerances,
) -> Result<WeightVector> {
    let rho = sys.rho().matrix();
    let raw: Vec<f64> = family
        .projections()
        .iter()
        .map(|q| trace_re(&(rho * q)))
        .collect();
    WeightVector::new(raw, tol)
}

/// The orthogonal decomposition carried by a projection family:
/// weights `tr(rho q_i)`, components `sqrt(rho) q_i sqrt(rho) / lambda_i`.
pub fn decomposition_from_family(
    sys: &QuantumDynamicalSystem,
    family: &CommutantProjectionFamily,
    tol: &Tolerances,
) -> Result<FiniteDecomposition<DensityState>> {
    let sc = sys.support(tol);
    let mut weights = Vec::with_capacity(family.len());
    let mut components = Vec::with_capacity(family.len());
    for q in family.projections() {
        let scaled = hermitize(&(&sc.sqrt * q * &sc.sqrt));
        let w = trace_re(&scaled);
        if w <= tol.atom_drop {
            continue;
        }
        components.push(DensityState::new(
            scaled / Complex64::new(w, 0.0),
            tol,
        )?);
        weights.push(w);
    }
    FiniteDecomposition::new(weights, components, sys.rho().clone(), tol)
}

/// `alpha^0` on a family: `{U q_i U*}`. Orthogonality and idempotency are
/// preserved exactly by unitary conjugation, so only membership checks rerun.
pub fn alpha0_apply(
    sys: &QuantumDynamicalSystem,
    family: &CommutantProjectionFamily,
    tol: &Tolerances,
) -> Result<CommutantProjectionFamily> {
    let projections: Vec<CMatrix> = family
        .projections()
        .iter()
        .map(|q| hermitize(&sys.conjugate(q)))
        .collect();
    CommutantProjectionFamily::from_orthogonal_by_construction(sys, projections, tol)
}

/// Minimal projections of the abelian algebra generated by several families:
/// all nonzero products of one member per family. Fails with
/// [`KsError::NonCommuting`] when any two members fail to commute, which is
/// the obstruction that routes a system to the state-space pipeline.
pub fn generated_family(
    sys: &QuantumDynamicalSystem,
    families: &[&CommutantProjectionFamily],
    tol: &Tolerances,
) -> Result<CommutantProjectionFamily> {
    let (first, rest) = families
        .split_first()
        .ok_or_else(|| KsError::InvalidFamily("no families to generate from".into()))?;
    let mut worst = 0.0f64;
    for (a_idx, a) in families.iter().enumerate() {
        for b in families.iter().skip(a_idx + 1) {
            for qa in a.projections() {
                for qb in b.projections() {
                    worst = worst.max(commutator_norm(qa, qb));
                }
            }
        }
    }
    if worst > tol.commutation {
        return Err(KsError::NonCommuting {
            norm: worst,
            depth: None,
        });
    }
    let mut atoms: Vec<CMatrix> = first.projections().to_vec();
    for family in rest {
        let mut next = Vec::with_capacity(atoms.len());
        for g in &atoms {
            for q in family.projections() {
                let prod = hermitize(&(g * q));
                // commuting projections multiply to a projection whose trace
                // is its rank; below 1/2 it must be the zero projection
                if trace_re(&prod) > 0.5 {
                    next.push(prod);
                }
            }
        }
        atoms = next;
    }
    CommutantProjectionFamily::from_orthogonal_by_construction(sys, atoms, tol)
}

/// Shannon entropy of a family's decomposition weights.
pub fn family_entropy(
    sys: &QuantumDynamicalSystem,
    family: &CommutantProjectionFamily,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(shannon_entropy(&family_weights(sys, family, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::system::{pauli_x, phase_unitary, qubit_system};

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn z_family(sys: &QuantumDynamicalSystem) -> CommutantProjectionFamily {
        let e0 = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        let e1 = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i == 1 && j == 1 { 1.0 } else { 0.0 }, 0.0)
        });
        CommutantProjectionFamily::new(sys, vec![e0, e1], &TOL).unwrap()
    }

    fn x_family(sys: &QuantumDynamicalSystem) -> CommutantProjectionFamily {
        let plus = CMatrix::from_fn(2, 2, |_, _| Complex64::new(0.5, 0.0));
        let minus = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i == j { 0.5 } else { -0.5 }, 0.0)
        });
        CommutantProjectionFamily::new(sys, vec![plus, minus], &TOL).unwrap()
    }

    #[test]
    fn qubit_decomposition_from_z_family() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let d = decomposition_from_family(&sys, &z_family(&sys), &TOL).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.weights().get(0) - 0.5).abs() < 1e-12);
        assert!(d.is_orthogonal(&TOL));
        assert!(d.barycenter_residual() < 1e-12);
    }

    #[test]
    fn hadamard_basis_family_decomposes_maximally_mixed() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let d = decomposition_from_family(&sys, &x_family(&sys), &TOL).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.is_orthogonal(&TOL));
        // components are the Hadamard-basis pure states
        assert!((d.component(0).matrix()[(0, 1)].re.abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_state_admits_only_trivial_family() {
        let sys = qubit_system((1.0, 0.0), phase_unitary(0.7), &TOL).unwrap();
        let f = CommutantProjectionFamily::trivial(&sys, &TOL).unwrap();
        assert_eq!(f.len(), 1);
        let d = decomposition_from_family(&sys, &f, &TOL).unwrap();
        assert_eq!(d.len(), 1);
        // the z family is not supported on the support of a pure state
        assert!(CommutantProjectionFamily::new(
            &sys,
            z_family(&qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap())
                .projections()
                .to_vec(),
            &TOL
        )
        .is_err());
    }

    #[test]
    fn alpha0_by_pauli_x_swaps_z_projections() {
        let sys = qubit_system((0.5, 0.5), pauli_x(), &TOL).unwrap();
        let f = z_family(&sys);
        let g = alpha0_apply(&sys, &f, &TOL).unwrap();
        assert!(max_abs(&(&g.projections()[0] - &f.projections()[1])) < 1e-12);
        assert!(max_abs(&(&g.projections()[1] - &f.projections()[0])) < 1e-12);
    }

    #[test]
    fn alpha0_preserves_weights_up_to_permutation() {
        let sys = qubit_system((0.5, 0.5), pauli_x(), &TOL).unwrap();
        let f = x_family(&sys);
        let w0 = family_weights(&sys, &f, &TOL).unwrap();
        let w1 = family_weights(&sys, &alpha0_apply(&sys, &f, &TOL).unwrap(), &TOL).unwrap();
        let mut a: Vec<f64> = w0.iter().collect();
        let mut b: Vec<f64> = w1.iter().collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_unitary_fixes_diagonal_family() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(1.234), &TOL).unwrap();
        let f = z_family(&sys);
        let g = alpha0_apply(&sys, &f, &TOL).unwrap();
        assert!(f.distance(&g) < 1e-12);
    }

    #[test]
    fn generated_family_of_single_input_is_identity() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let f = z_family(&sys);
        let g = generated_family(&sys, &[&f], &TOL).unwrap();
        assert!(f.distance(&g) < 1e-15);
    }

    #[test]
    fn generated_family_rejects_noncommuting_bases() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let f = z_family(&sys);
        let g = x_family(&sys);
        let err = generated_family(&sys, &[&f, &g], &TOL).unwrap_err();
        match err {
            KsError::NonCommuting { norm, .. } => assert!((norm - 0.5).abs() < 1e-12),
            other => panic!("expected NonCommuting, got {other}"),
        }
    }

    #[test]
    fn generated_family_refines_inputs() {
        // diagonal 4-level system; two coarse diagonal families
        let rho = DensityState::from_diagonal(&[0.4, 0.3, 0.2, 0.1], &TOL).unwrap();
        let alg = crate::quantum::algebra::FiniteDimAlgebra::diagonal(4).unwrap();
        let sys =
            QuantumDynamicalSystem::new(alg, rho, crate::linalg::identity(4), &TOL).unwrap();
        let diag_proj = |idx: &[usize]| {
            CMatrix::from_fn(4, 4, |i, j| {
                Complex64::new(
                    if i == j && idx.contains(&i) { 1.0 } else { 0.0 },
                    0.0,
                )
            })
        };
        let f = CommutantProjectionFamily::new(
            &sys,
            vec![diag_proj(&[0, 1]), diag_proj(&[2, 3])],
            &TOL,
        )
        .unwrap();
        let g = CommutantProjectionFamily::new(
            &sys,
            vec![diag_proj(&[0, 2]), diag_proj(&[1, 3])],
            &TOL,
        )
        .unwrap();
        let gen = generated_family(&sys, &[&f, &g], &TOL).unwrap();
        assert_eq!(gen.len(), 4);
        let fine = decomposition_from_family(&sys, &gen, &TOL).unwrap();
        for coarse_family in [&f, &g] {
            let coarse = decomposition_from_family(&sys, coarse_family, &TOL).unwrap();
            assert!(crate::decomposition::choquet_refines(&fine, &coarse, &TOL).unwrap());
        }
    }
}
