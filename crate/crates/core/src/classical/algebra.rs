//! Iterated refinement algebras `A_k` and their entropy.
//!
//! `A_k` is generated by the partition cells pulled back through
//! `T^{-p}, p = 0..k`; its minimal atoms carry itinerary labels
//! `(i_0, ..., i_k)`. Atom measures are recomputed from the intersected cell
//! representation each step, so cylinder and interval arithmetic stays exact.

use crate::classical::cell::Cell;
use crate::classical::partition::Partition;
use crate::classical::system::ClassicalSystem;
use crate::decomposition::{ClassicalStateVector, FiniteDecomposition};
use crate::entropy::{eta_clamped, kahan_sum};
use crate::error::{KsError, Result};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct AlgebraAtom {
    /// Itinerary `(i_0, ..., i_k)`: which partition cell each pullback level
    /// hit.
    pub label: Vec<usize>,
    pub cell: Cell,
    pub measure: f64,
}

impl AlgebraAtom {
    pub fn label_string(&self) -> String {
        self.label
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

#[derive(Debug, Clone)]
pub struct RefinedAlgebra {
    pub depth: usize,
    atoms: Vec<AlgebraAtom>,
}

impl RefinedAlgebra {
    pub fn atoms(&self) -> &[AlgebraAtom] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    fn check_total(&self, tol: &Tolerances) -> Result<()> {
        let total = kahan_sum(self.atoms.iter().map(|a| a.measure));
        if (total - 1.0).abs() > tol.atom_sum {
            return Err(KsError::InvalidPartition(format!(
                "depth-{} atoms sum to {total}",
                self.depth
            )));
        }
        Ok(())
    }

    /// The orthogonal decomposition this algebra induces, expressed over the
    /// atom keys of a finer algebra from the same refinement chain. Using the
    /// finer key universe lets consecutive depths be compared in the Choquet
    /// order.
    pub fn decomposition_on(
        &self,
        finer: &RefinedAlgebra,
        tol: &Tolerances,
    ) -> Result<FiniteDecomposition<ClassicalStateVector>> {
        if finer.depth < self.depth {
            return Err(KsError::InvalidDecomposition(
                "finer algebra must have at least the same depth".into(),
            ));
        }
        let mut weights = Vec::with_capacity(self.atoms.len());
        let mut components = Vec::with_capacity(self.atoms.len());
        let mut bary_masses = Vec::new();
        for atom in &self.atoms {
            let members: Vec<&AlgebraAtom> = finer
                .atoms
                .iter()
                .filter(|f| f.label.starts_with(&atom.label))
                .collect();
            if members.is_empty() {
                return Err(KsError::InvalidDecomposition(format!(
                    "atom {} has no members in the finer algebra",
                    atom.label_string()
                )));
            }
            let w = kahan_sum(members.iter().map(|f| f.measure));
            let comp = ClassicalStateVector::from_pairs(
                members
                    .iter()
                    .map(|f| (f.label_string(), f.measure / w)),
                tol,
            )?;
            for f in &members {
                bary_masses.push((f.label_string(), f.measure));
            }
            weights.push(w);
            components.push(comp);
        }
        let barycenter = ClassicalStateVector::from_pairs(bary_masses, tol)?;
        FiniteDecomposition::new(weights, components, barycenter, tol)
    }
}

/// `A_0`: the atoms are the partition cells themselves.
pub fn initial_algebra(
    sys: &ClassicalSystem,
    p0: &Partition,
    tol: &Tolerances,
) -> Result<RefinedAlgebra> {
    let mut atoms = Vec::with_capacity(p0.len());
    for (i, cell) in p0.cells().iter().enumerate() {
        let measure = sys.measure(cell)?;
        if measure > tol.atom_drop {
            atoms.push(AlgebraAtom {
                label: vec![i],
                cell: cell.clone(),
                measure,
            });
        }
    }
    let algebra = RefinedAlgebra { depth: 0, atoms };
    algebra.check_total(tol)?;
    Ok(algebra)
}

/// `A_{k+1}` from `A_k`: intersect every atom with the partition cells
/// pulled back one level deeper.
pub fn refine_algebra(
    sys: &ClassicalSystem,
    prev: &RefinedAlgebra,
    p0: &Partition,
    tol: &Tolerances,
) -> Result<RefinedAlgebra> {
    let depth = prev.depth + 1;
    let pulled: Vec<Cell> = p0
        .cells()
        .iter()
        .map(|c| sys.pullback(c, depth, tol))
        .collect::<Result<Vec<_>>>()?;
    refine_with_pulled(sys, prev, &pulled, tol)
}

fn refine_with_pulled(
    sys: &ClassicalSystem,
    prev: &RefinedAlgebra,
    pulled: &[Cell],
    tol: &Tolerances,
) -> Result<RefinedAlgebra> {
    let depth = prev.depth + 1;
    let mut atoms = Vec::with_capacity(prev.atoms.len());
    for atom in &prev.atoms {
        for (i, pb) in pulled.iter().enumerate() {
            if let Some(cell) = atom.cell.intersect(pb)? {
                if cell.is_empty() {
                    continue;
                }
                let measure = sys.measure(&cell)?;
                if measure > tol.atom_drop {
                    let mut label = atom.label.clone();
                    label.push(i);
                    atoms.push(AlgebraAtom {
                        label,
                        cell,
                        measure,
                    });
                    if atoms.len() > tol.max_atoms {
                        return Err(KsError::BudgetExceeded(format!(
                            "depth-{depth} algebra exceeds {} atoms",
                            tol.max_atoms
                        )));
                    }
                }
            }
        }
    }
    let algebra = RefinedAlgebra { depth, atoms };
    algebra.check_total(tol)?;
    Ok(algebra)
}

/// Incremental refinement: carries the pulled-back partition cells from
/// depth to depth so each step costs one pullback application instead of
/// rebuilding `T^{-k}` from scratch.
pub struct RefinementChain<'a> {
    sys: &'a ClassicalSystem,
    pulled: Vec<Cell>,
    algebra: RefinedAlgebra,
}

impl<'a> RefinementChain<'a> {
    pub fn new(sys: &'a ClassicalSystem, p0: &Partition, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            sys,
            pulled: p0.cells().to_vec(),
            algebra: initial_algebra(sys, p0, tol)?,
        })
    }

    pub fn algebra(&self) -> &RefinedAlgebra {
        &self.algebra
    }

    pub fn step(&mut self, tol: &Tolerances) -> Result<()> {
        for cell in self.pulled.iter_mut() {
            *cell = self.sys.pullback_step(cell, tol)?;
        }
        self.algebra = refine_with_pulled(self.sys, &self.algebra, &self.pulled, tol)?;
        Ok(())
    }
}

/// `H(A_k) = sum over atoms of eta(measure)`; nondecreasing in `k` along a
/// refinement chain.
pub fn algebra_entropy(a: &RefinedAlgebra) -> f64 {
    kahan_sum(a.atoms.iter().map(|atom| eta_clamped(atom.measure)))
}

/// The multi-index diagnostic: `sum_{i,j,p,r} eta(mu(T^{-p}X_i ∩ T^{-r}X_j))`
/// over `0 <= p, r <= k`. Reported alongside [`algebra_entropy`]; the two
/// agree at `k = 0` up to vanishing cross terms because intersections of
/// distinct cells are empty there.
pub fn pairwise_entropy(
    sys: &ClassicalSystem,
    p0: &Partition,
    k: usize,
    tol: &Tolerances,
) -> Result<f64> {
    let mut pulled: Vec<Vec<Cell>> = Vec::with_capacity(k + 1);
    let base: Vec<Cell> = p0.cells().to_vec();
    pulled.push(base);
    for p in 1..=k {
        let prev = &pulled[p - 1];
        let next: Vec<Cell> = prev
            .iter()
            .map(|c| sys.pullback_step(c, tol))
            .collect::<Result<Vec<_>>>()?;
        pulled.push(next);
    }
    let mut total = crate::entropy::KahanSum::default();
    for p in 0..=k {
        for r in 0..=k {
            for ci in &pulled[p] {
                for cj in &pulled[r] {
                    if let Some(cell) = ci.intersect(cj)? {
                        total.add(eta_clamped(sys.measure(&cell)?));
                    }
                }
            }
        }
    }
    Ok(total.value())
}

/// The orthogonal decomposition induced by a partition: weights are cell
/// measures, components are point masses on the algebra the partition
/// generates (normalized restrictions of the state).
pub fn decomposition_from_partition(
    sys: &ClassicalSystem,
    p: &Partition,
    tol: &Tolerances,
) -> Result<FiniteDecomposition<ClassicalStateVector>> {
    let algebra = initial_algebra(sys, p, tol)?;
    algebra.decomposition_on(&algebra, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::choquet_refines;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn doubling_dyadic_refinement_counts() {
        let sys = ClassicalSystem::DoublingMap;
        let p0 = Partition::dyadic(&sys, 1, &TOL).unwrap();
        let mut a = initial_algebra(&sys, &p0, &TOL).unwrap();
        for k in 1..=6 {
            a = refine_algebra(&sys, &a, &p0, &TOL).unwrap();
            assert_eq!(a.atom_count(), 1 << (k + 1));
            let expected = 0.5f64.powi(k as i32 + 1);
            for atom in a.atoms() {
                assert!((atom.measure - expected).abs() < 1e-15);
            }
            assert!(
                (algebra_entropy(&a) - (k + 1) as f64 * std::f64::consts::LN_2).abs() < 1e-12
            );
        }
    }

    #[test]
    fn rotation_atom_count_is_linear() {
        let sys = ClassicalSystem::rotation(0.618_033_988_749_894_9, true).unwrap();
        let p0 = Partition::two_arcs(&sys, &TOL).unwrap();
        let mut a = initial_algebra(&sys, &p0, &TOL).unwrap();
        for k in 1..=8 {
            a = refine_algebra(&sys, &a, &p0, &TOL).unwrap();
            assert!(a.atom_count() <= 2 * (k + 2));
        }
    }

    #[test]
    fn identity_permutation_algebra_is_stable() {
        let sys =
            ClassicalSystem::permutation(vec![0, 1, 2], vec![0.2, 0.3, 0.5], &TOL).unwrap();
        let p0 = Partition::points(&sys, &TOL).unwrap();
        let a0 = initial_algebra(&sys, &p0, &TOL).unwrap();
        let a1 = refine_algebra(&sys, &a0, &p0, &TOL).unwrap();
        assert_eq!(a1.atom_count(), a0.atom_count());
        assert!((algebra_entropy(&a1) - algebra_entropy(&a0)).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_initial_entropy() {
        let sys = ClassicalSystem::bernoulli(vec![0.5, 0.5], &TOL).unwrap();
        let p0 = Partition::symbols(&sys, &TOL).unwrap();
        let a0 = initial_algebra(&sys, &p0, &TOL).unwrap();
        assert!((algebra_entropy(&a0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn dirac_entropy_is_zero_at_all_depths() {
        let sys = ClassicalSystem::dirac(1, 4).unwrap();
        let p0 = Partition::point_groups(
            &sys,
            vec![vec![0, 1], vec![2, 3]],
            &TOL,
        )
        .unwrap();
        let mut a = initial_algebra(&sys, &p0, &TOL).unwrap();
        for _ in 0..4 {
            assert_eq!(algebra_entropy(&a), 0.0);
            a = refine_algebra(&sys, &a, &p0, &TOL).unwrap();
        }
    }

    #[test]
    fn pairwise_entropy_trivial_cases() {
        // whole-space partition: the only term is eta(1) = 0
        let sys = ClassicalSystem::bernoulli(vec![0.5, 0.5], &TOL).unwrap();
        let whole = Partition::new(&sys, vec![sys.whole_space()], &TOL).unwrap();
        assert_eq!(pairwise_entropy(&sys, &whole, 0, &TOL).unwrap(), 0.0);

        // symbol partition at k=0: diagonal terms give ln 2, cross terms vanish
        let p = Partition::symbols(&sys, &TOL).unwrap();
        let value = pairwise_entropy(&sys, &p, 0, &TOL).unwrap();
        assert!((value - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn pairwise_entropy_matches_algebra_entropy_plus_cross_terms_at_zero() {
        let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let p = Partition::symbols(&sys, &TOL).unwrap();
        let a0 = initial_algebra(&sys, &p, &TOL).unwrap();
        let diff =
            pairwise_entropy(&sys, &p, 0, &TOL).unwrap() - algebra_entropy(&a0);
        assert!(diff.abs() < 1e-12);
    }

    #[test]
    fn consecutive_depths_are_choquet_ordered() {
        let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let p0 = Partition::symbols(&sys, &TOL).unwrap();
        let a0 = initial_algebra(&sys, &p0, &TOL).unwrap();
        let a1 = refine_algebra(&sys, &a0, &p0, &TOL).unwrap();
        let fine = a1.decomposition_on(&a1, &TOL).unwrap();
        let coarse = a0.decomposition_on(&a1, &TOL).unwrap();
        assert!(choquet_refines(&fine, &coarse, &TOL).unwrap());
        assert!(!choquet_refines(&coarse, &fine, &TOL).unwrap());
    }

    #[test]
    fn partition_decomposition_is_orthogonal() {
        let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let p = Partition::symbols(&sys, &TOL).unwrap();
        let d = decomposition_from_partition(&sys, &p, &TOL).unwrap();
        assert!(d.is_orthogonal(&TOL));
        let mut w: Vec<f64> = d.weights().iter().collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((w[0] - 0.25).abs() < 1e-12 && (w[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn dirac_decomposition_is_trivial() {
        let sys = ClassicalSystem::dirac(0, 2).unwrap();
        let p = Partition::point_groups(&sys, vec![vec![0], vec![1]], &TOL).unwrap();
        let d = decomposition_from_partition(&sys, &p, &TOL).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d.weights().get(0) - 1.0).abs() < 1e-15);
    }
}
