//! Finitely supported measures on the quantum state space.

use num_complex::Complex64;

use crate::decomposition::{DensityState, FiniteDecomposition, StateLike};
use crate::error::{KsError, Result};
use crate::linalg::random_gaussian;
use crate::quantum::{decomposition_from_family, CommutantProjectionFamily, QuantumDynamicalSystem};
use crate::tolerance::Tolerances;

/// An atomic measure on the state space: point masses on finitely many
/// states whose weighted sum is the barycenter. The orthogonality tag records
/// whether the scaled atoms have jointly independent ranges, i.e. whether the
/// measure belongs to the orthogonal class.
#[derive(Debug, Clone)]
pub struct AtomicStateMeasure {
    decomposition: FiniteDecomposition<DensityState>,
    orthogonal: bool,
}

impl AtomicStateMeasure {
    pub fn new(decomposition: FiniteDecomposition<DensityState>, tol: &Tolerances) -> Self {
        let orthogonal = decomposition.is_orthogonal(tol);
        Self {
            decomposition,
            orthogonal,
        }
    }

    pub fn from_family(
        sys: &QuantumDynamicalSystem,
        family: &CommutantProjectionFamily,
        tol: &Tolerances,
    ) -> Result<Self> {
        Ok(Self::new(decomposition_from_family(sys, family, tol)?, tol))
    }

    pub fn decomposition(&self) -> &FiniteDecomposition<DensityState> {
        &self.decomposition
    }

    pub fn orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn len(&self) -> usize {
        self.decomposition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decomposition.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, &DensityState)> + '_ {
        self.decomposition
            .weights()
            .iter()
            .zip(self.decomposition.components())
    }

    pub fn barycenter(&self) -> &DensityState {
        self.decomposition.barycenter()
    }

    pub fn describe(&self) -> String {
        format!(
            "measure({} atoms{})",
            self.len(),
            if self.orthogonal { ", orthogonal" } else { "" }
        )
    }
}

/// A non-orthogonal decomposition of the state into `m > rank` pure pieces,
/// built by mixing the eigen-decomposition through a random isometry: with
/// `V* V = 1` on the support, the vectors `sum_i V_ji sqrt(l_i) e_i` carry
/// weights summing the state back exactly.
pub fn random_pure_decomposition(
    sys: &QuantumDynamicalSystem,
    parts: usize,
    rng: &mut impl rand::Rng,
    tol: &Tolerances,
) -> Result<AtomicStateMeasure> {
    let sc = sys.support(tol);
    let rank = sc.rank;
    if parts < rank {
        return Err(KsError::InvalidDecomposition(format!(
            "cannot decompose a rank-{rank} state into {parts} pieces"
        )));
    }
    let (eigs, vecs) = crate::linalg::hermitian_eigen(sys.rho().matrix());
    let isometry = {
        let g = random_gaussian(parts, rank, rng);
        let qr = g.qr();
        qr.q().columns(0, rank).into_owned()
    };
    let mut weights = Vec::with_capacity(parts);
    let mut components = Vec::with_capacity(parts);
    for j in 0..parts {
        let mut vec = nalgebra::DVector::<Complex64>::zeros(sys.dim());
        for i in 0..rank {
            let coeff = isometry[(j, i)] * Complex64::new(eigs[i].max(0.0).sqrt(), 0.0);
            vec += vecs.column(i) * coeff;
        }
        let w = vec.norm_squared();
        if w > tol.atom_drop {
            components.push(DensityState::pure(&vec, tol)?);
            weights.push(w);
        }
    }
    let d = FiniteDecomposition::new(weights, components, sys.rho().clone(), tol)?;
    Ok(AtomicStateMeasure::new(d, tol))
}

/// The symmetric three-point decomposition of the maximally mixed qubit
/// state: three pure states at 120-degree Bloch angles, weights 1/3. The
/// canonical example of a barycentric but non-orthogonal measure.
pub fn qubit_trine(sys: &QuantumDynamicalSystem, tol: &Tolerances) -> Result<AtomicStateMeasure> {
    let sc = sys.support(tol);
    if sc.rank != 2 {
        return Err(KsError::Unsupported("trine needs a rank-2 support".into()));
    }
    let mixed = &sc.projector * Complex64::new(0.5, 0.0);
    if DensityState::mix(&[(1.0, sys.rho())]).distance(
        &DensityState::new(mixed, tol)
            .map_err(|_| KsError::Unsupported("trine needs the maximally mixed state".into()))?,
    ) > tol.barycenter
    {
        return Err(KsError::Unsupported(
            "trine reproduces only the maximally mixed state".into(),
        ));
    }
    let b0 = sc.basis.column(0).into_owned();
    let b1 = sc.basis.column(1).into_owned();
    let mut weights = Vec::with_capacity(3);
    let mut components = Vec::with_capacity(3);
    for j in 0..3 {
        // Bloch angle 120 j degrees; state angle is half of that
        let half = (120.0 * j as f64).to_radians() / 2.0;
        let vec = &b0 * Complex64::new(half.cos(), 0.0) + &b1 * Complex64::new(half.sin(), 0.0);
        components.push(DensityState::pure(&vec, tol)?);
        weights.push(1.0 / 3.0);
    }
    let d = FiniteDecomposition::new(weights, components, sys.rho().clone(), tol)?;
    Ok(AtomicStateMeasure::new(d, tol))
}

/// The eigenbasis measure: the distinguished orthogonal decomposition.
pub fn eigen_measure(sys: &QuantumDynamicalSystem, tol: &Tolerances) -> Result<AtomicStateMeasure> {
    let sc = sys.support(tol);
    let family = CommutantProjectionFamily::from_support_basis(sys, &sc.basis, tol)?;
    AtomicStateMeasure::from_family(sys, &family, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{phase_unitary, qubit_system};
    use rand::SeedableRng;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn trine_is_barycentric_but_not_orthogonal() {
        let sys = qubit_system((0.5, 0.5), phase_unitary(0.0), &TOL).unwrap();
        let trine = qubit_trine(&sys, &TOL).unwrap();
        assert_eq!(trine.len(), 3);
        assert!(!trine.orthogonal());
        assert!(trine.decomposition().barycenter_residual() < 1e-12);
    }

    #[test]
    fn random_pure_decomposition_reconstructs_state() {
        let sys = qubit_system((0.7, 0.3), phase_unitary(0.4), &TOL).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mu = random_pure_decomposition(&sys, 3, &mut rng, &TOL).unwrap();
        assert_eq!(mu.len(), 3);
        assert!(!mu.orthogonal());
        assert!(mu.decomposition().barycenter_residual() < 1e-10);
    }

    #[test]
    fn eigen_measure_is_orthogonal() {
        let sys = qubit_system((0.7, 0.3), phase_unitary(0.4), &TOL).unwrap();
        let mu = eigen_measure(&sys, &TOL).unwrap();
        assert!(mu.orthogonal());
        assert_eq!(mu.len(), 2);
    }
}
