//! Finite measurable partitions and their canonical constructors.

use crate::classical::cell::Cell;
use crate::classical::system::ClassicalSystem;
use crate::entropy::kahan_sum;
use crate::error::{KsError, Result};
use crate::tolerance::Tolerances;

/// A finite family of pairwise disjoint cells covering the space up to
/// measure zero. Cells of measure zero are dropped at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    cells: Vec<Cell>,
}

impl Partition {
    pub fn new(sys: &ClassicalSystem, cells: Vec<Cell>, tol: &Tolerances) -> Result<Self> {
        let mut kept = Vec::with_capacity(cells.len());
        let mut measures = Vec::with_capacity(cells.len());
        for cell in cells {
            sys.check_cell(&cell)?;
            let m = sys.measure(&cell)?;
            if m > tol.atom_drop {
                kept.push(cell);
                measures.push(m);
            }
        }
        if kept.is_empty() {
            return Err(KsError::InvalidPartition("no cells of positive measure".into()));
        }
        for i in 0..kept.len() {
            for j in (i + 1)..kept.len() {
                if !kept[i].disjoint_from(&kept[j])? {
                    return Err(KsError::InvalidPartition(format!(
                        "cells {i} and {j} intersect"
                    )));
                }
            }
        }
        let total = kahan_sum(measures.iter().copied());
        if (total - 1.0).abs() > tol.cover {
            return Err(KsError::InvalidPartition(format!(
                "cells cover measure {total}, not 1"
            )));
        }
        Ok(Self { cells: kept })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn describe(&self) -> String {
        format!(
            "{{{}}}",
            self.cells
                .iter()
                .map(|c| c.label())
                .collect::<Vec<_>>()
                .join(" | ")
        )
    }

    /// The time-0 symbol partition of a shift system.
    pub fn symbols(sys: &ClassicalSystem, tol: &Tolerances) -> Result<Self> {
        let n = sys
            .symbols()
            .ok_or_else(|| KsError::Unsupported("symbol partition needs a shift system".into()))?;
        let cells = (0..n)
            .map(|s| Cell::cylinder([(0, s)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sys, cells, tol)
    }

    /// Depth-two cylinder partition `{(0:i, 1:j)}` of a shift system.
    pub fn cylinders_depth2(sys: &ClassicalSystem, tol: &Tolerances) -> Result<Self> {
        let n = sys
            .symbols()
            .ok_or_else(|| KsError::Unsupported("cylinder partition needs a shift system".into()))?;
        let mut cells = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                cells.push(Cell::cylinder([(0, i), (1, j)])?);
            }
        }
        Self::new(sys, cells, tol)
    }

    /// Symbol partition read at a later coordinate.
    pub fn symbols_at(sys: &ClassicalSystem, pos: usize, tol: &Tolerances) -> Result<Self> {
        let n = sys
            .symbols()
            .ok_or_else(|| KsError::Unsupported("symbol partition needs a shift system".into()))?;
        let cells = (0..n)
            .map(|s| Cell::cylinder([(pos, s)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sys, cells, tol)
    }

    /// Equal-width interval partition with `m` cells.
    pub fn uniform_intervals(sys: &ClassicalSystem, m: usize, tol: &Tolerances) -> Result<Self> {
        if m == 0 {
            return Err(KsError::InvalidPartition("zero cells requested".into()));
        }
        let cells = (0..m)
            .map(|i| Cell::interval(i as f64 / m as f64, (i + 1) as f64 / m as f64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sys, cells, tol)
    }

    /// Dyadic partition with `2^level` cells.
    pub fn dyadic(sys: &ClassicalSystem, level: u32, tol: &Tolerances) -> Result<Self> {
        Self::uniform_intervals(sys, 1usize << level, tol)
    }

    /// Two arcs split at 1/2; the canonical coarse partition for rotations.
    pub fn two_arcs(sys: &ClassicalSystem, tol: &Tolerances) -> Result<Self> {
        Self::uniform_intervals(sys, 2, tol)
    }

    /// Interval partition from sorted interior cut points.
    pub fn from_thresholds(
        sys: &ClassicalSystem,
        mut cuts: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        cuts.retain(|c| (0.0..1.0).contains(c) && *c > 0.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut edges = vec![0.0];
        edges.extend(cuts);
        edges.push(1.0);
        let cells = edges
            .windows(2)
            .map(|w| Cell::interval(w[0], w[1]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sys, cells, tol)
    }

    /// One singleton cell per point of a finite system.
    pub fn points(sys: &ClassicalSystem, tol: &Tolerances) -> Result<Self> {
        let n = sys
            .point_count()
            .ok_or_else(|| KsError::Unsupported("point partition needs a finite system".into()))?;
        let cells = (0..n).map(|x| Cell::points([x])).collect();
        Self::new(sys, cells, tol)
    }

    /// Partition of a finite system into labeled groups of points.
    pub fn point_groups(
        sys: &ClassicalSystem,
        groups: Vec<Vec<usize>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let cells = groups.into_iter().map(Cell::points).collect();
        Self::new(sys, cells, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn symbol_partition_of_bernoulli() {
        let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let p = Partition::symbols(&sys, &TOL).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn overlap_rejected() {
        let sys = ClassicalSystem::DoublingMap;
        let cells = vec![
            Cell::interval(0.0, 0.6).unwrap(),
            Cell::interval(0.5, 1.0).unwrap(),
        ];
        assert!(Partition::new(&sys, cells, &TOL).is_err());
    }

    #[test]
    fn cover_defect_rejected() {
        let sys = ClassicalSystem::DoublingMap;
        let cells = vec![
            Cell::interval(0.0, 0.4).unwrap(),
            Cell::interval(0.5, 1.0).unwrap(),
        ];
        assert!(Partition::new(&sys, cells, &TOL).is_err());
    }

    #[test]
    fn zero_measure_cells_dropped() {
        let sys = ClassicalSystem::dirac(0, 3).unwrap();
        let p = Partition::point_groups(&sys, vec![vec![0], vec![1], vec![2]], &TOL).unwrap();
        // only the cell containing the point mass survives
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn thresholds_build_interval_partition() {
        let sys = ClassicalSystem::rotation(0.3, false).unwrap();
        let p = Partition::from_thresholds(&sys, vec![0.7, 0.2], &TOL).unwrap();
        assert_eq!(p.len(), 3);
    }
}
