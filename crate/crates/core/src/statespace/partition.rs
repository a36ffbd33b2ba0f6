//! Partitions of the state space by affine sign tests.
//!
//! A partition is carried by a finite pool of Hermitian test observables with
//! thresholds; its cells are the realized sign patterns
//! `sign(tr(rho F_m) - t_m)`. Sign patterns are conjunctions of affine
//! half-space constraints, so cells are affine, membership is one trace per
//! test, and transporting a cell under the induced affine map transports its
//! test observables.
//!
//! Refined partitions are never materialized as intersected cells: an atom's
//! depth-k cell is its itinerary, the vector of base-cell patterns of its
//! first k inverse transports.

use crate::decomposition::DensityState;
use crate::error::{KsError, Result};
use crate::linalg::{hermitian_residual, max_abs, CMatrix};
use crate::statespace::transport::AffineTransport;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct TestObservable {
    pub matrix: CMatrix,
    pub threshold: f64,
    pub label: String,
}

impl TestObservable {
    pub fn new(matrix: CMatrix, threshold: f64, label: impl Into<String>) -> Result<Self> {
        let scale = max_abs(&matrix).max(1.0);
        if hermitian_residual(&matrix) > 1e-10 * scale {
            return Err(KsError::InvalidPartition(
                "test observable must be Hermitian".into(),
            ));
        }
        Ok(Self {
            matrix,
            threshold,
            label: label.into(),
        })
    }
}

/// Cells are the sign patterns over the test pool; an atom belongs to the
/// cell of its own pattern, so disjointness and covering hold on any atom
/// set by construction. A trace landing within the tie tolerance of its
/// threshold makes the atom unclassifiable and aborts the run.
#[derive(Debug, Clone)]
pub struct StateSpacePartition {
    tests: Vec<TestObservable>,
}

impl StateSpacePartition {
    pub fn new(tests: Vec<TestObservable>) -> Result<Self> {
        if tests.is_empty() {
            return Err(KsError::InvalidPartition("no test observables".into()));
        }
        Ok(Self { tests })
    }

    pub fn tests(&self) -> &[TestObservable] {
        &self.tests
    }

    /// Sign pattern of one state: `true` where `tr(rho F) >= t`.
    pub fn classify(&self, state: &DensityState, tol: &Tolerances) -> Result<Vec<bool>> {
        let mut pattern = Vec::with_capacity(self.tests.len());
        for test in &self.tests {
            let value = crate::linalg::trace_re(&(state.matrix() * &test.matrix));
            let margin = value - test.threshold;
            if margin.abs() < tol.tie {
                return Err(KsError::UnclassifiableAtom(format!(
                    "trace {value} ties threshold {} of test {} within {:.1e}",
                    test.threshold, test.label, tol.tie
                )));
            }
            pattern.push(margin > 0.0);
        }
        Ok(pattern)
    }

    pub fn cell_label(pattern: &[bool]) -> String {
        pattern.iter().map(|&b| if b { '+' } else { '-' }).collect()
    }

    pub fn describe(&self) -> String {
        format!(
            "sign-partition[{}]",
            self.tests
                .iter()
                .map(|t| t.label.as_str())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// A depth-k refinement of a base partition under the dynamics: cells are
/// itineraries `(pattern(psi), pattern(T^-1 psi), ..., pattern(T^-k psi))`.
#[derive(Debug, Clone)]
pub struct RefinedStatePartition {
    base: StateSpacePartition,
    transport: AffineTransport,
    depth: usize,
}

impl RefinedStatePartition {
    /// Depth 0: the base partition itself.
    pub fn initial(base: StateSpacePartition, transport: AffineTransport) -> Self {
        Self {
            base,
            transport,
            depth: 0,
        }
    }

    pub fn base(&self) -> &StateSpacePartition {
        &self.base
    }

    pub fn transport(&self) -> &AffineTransport {
        &self.transport
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Itinerary of one atom: the base pattern of `T^{-p}` applied to it for
    /// `p = 0..=depth`.
    pub fn classify_itinerary(
        &self,
        atom: &DensityState,
        tol: &Tolerances,
    ) -> Result<Vec<Vec<bool>>> {
        let mut itinerary = Vec::with_capacity(self.depth + 1);
        let mut current = atom.clone();
        for p in 0..=self.depth {
            itinerary.push(self.base.classify(&current, tol)?);
            if p < self.depth {
                current = self.transport.apply_inverse(&current, tol)?;
            }
        }
        Ok(itinerary)
    }

    pub fn itinerary_label(itinerary: &[Vec<bool>]) -> String {
        itinerary
            .iter()
            .map(|p| StateSpacePartition::cell_label(p))
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// One refinement step: the depth-(k+1) partition whose cells are the
/// intersections of depth-k cells with their one-step transports.
pub fn refine_by_dynamics(p: &RefinedStatePartition) -> RefinedStatePartition {
    RefinedStatePartition {
        base: p.base.clone(),
        transport: p.transport.clone(),
        depth: p.depth + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli_x, qubit_system};
    use num_complex::Complex64;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn z_test() -> TestObservable {
        let m = CMatrix::from_fn(2, 2, |i, j| {
            Complex64::new(if i == 0 && j == 0 { 1.0 } else { 0.0 }, 0.0)
        });
        TestObservable::new(m, 0.5, "z0").unwrap()
    }

    #[test]
    fn classify_z_eigenstates() {
        let p = StateSpacePartition::new(vec![z_test()]).unwrap();
        let up = DensityState::from_diagonal(&[1.0, 0.0], &TOL).unwrap();
        let down = DensityState::from_diagonal(&[0.0, 1.0], &TOL).unwrap();
        assert_eq!(p.classify(&up, &TOL).unwrap(), vec![true]);
        assert_eq!(p.classify(&down, &TOL).unwrap(), vec![false]);
    }

    #[test]
    fn tie_aborts() {
        let p = StateSpacePartition::new(vec![z_test()]).unwrap();
        let mixed = DensityState::maximally_mixed(2);
        assert!(matches!(
            p.classify(&mixed, &TOL),
            Err(KsError::UnclassifiableAtom(_))
        ));
    }

    #[test]
    fn pauli_x_itineraries_alternate() {
        let sys = qubit_system((0.5, 0.5), pauli_x(), &TOL).unwrap();
        let transport = AffineTransport::from_system(&sys);
        let base = StateSpacePartition::new(vec![z_test()]).unwrap();
        let mut rp = RefinedStatePartition::initial(base, transport);
        rp = refine_by_dynamics(&rp);
        rp = refine_by_dynamics(&rp);
        let up = DensityState::from_diagonal(&[1.0, 0.0], &TOL).unwrap();
        let itinerary = rp.classify_itinerary(&up, &TOL).unwrap();
        assert_eq!(
            RefinedStatePartition::itinerary_label(&itinerary),
            "+.-.+"
        );
    }
}
