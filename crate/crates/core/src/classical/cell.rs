//! Measurable cells: interval unions on the circle, shift cylinders, and
//! finite point sets.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{KsError, Result};

/// A measurable set in one of the three supported representations.
///
/// - `Intervals`: a finite union of disjoint half-open intervals in `[0, 1)`,
///   kept sorted by left endpoint. Half-open boundaries make disjointness
///   exact and boundary points carry no measure for the systems in scope.
/// - `Cylinder`: a conjunction of position -> symbol constraints on a
///   one-sided shift space.
/// - `Points`: a subset of a finite state set.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Intervals(Vec<(f64, f64)>),
    Cylinder(BTreeMap<usize, usize>),
    Points(BTreeSet<usize>),
}

impl Cell {
    pub fn intervals(raw: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Cell::Intervals(normalize_intervals(raw)?))
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::intervals(vec![(a, b)])
    }

    pub fn cylinder<I: IntoIterator<Item = (usize, usize)>>(constraints: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (pos, sym) in constraints {
            if let Some(&prev) = map.get(&pos) {
                if prev != sym {
                    return Err(KsError::InvalidPartition(format!(
                        "position {pos} constrained to both {prev} and {sym}"
                    )));
                }
            }
            map.insert(pos, sym);
        }
        Ok(Cell::Cylinder(map))
    }

    pub fn points<I: IntoIterator<Item = usize>>(points: I) -> Self {
        Cell::Points(points.into_iter().collect())
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Cell::Intervals(v) => v.is_empty(),
            // a cylinder with no constraints is the whole space
            Cell::Cylinder(_) => false,
            Cell::Points(p) => p.is_empty(),
        }
    }

    /// Representation size, checked against the complexity budget.
    pub fn complexity(&self) -> usize {
        match self {
            Cell::Intervals(v) => v.len(),
            Cell::Cylinder(c) => c.len().max(1),
            Cell::Points(p) => p.len(),
        }
    }

    /// Intersection of two cells of the same representation. `None` means
    /// the intersection is empty.
    pub fn intersect(&self, other: &Cell) -> Result<Option<Cell>> {
        match (self, other) {
            (Cell::Intervals(a), Cell::Intervals(b)) => {
                let out = intersect_sorted_intervals(a, b);
                Ok(if out.is_empty() {
                    None
                } else {
                    Some(Cell::Intervals(out))
                })
            }
            (Cell::Cylinder(a), Cell::Cylinder(b)) => {
                let mut merged = a.clone();
                for (&pos, &sym) in b {
                    if let Some(&prev) = merged.get(&pos) {
                        if prev != sym {
                            return Ok(None);
                        }
                    } else {
                        merged.insert(pos, sym);
                    }
                }
                Ok(Some(Cell::Cylinder(merged)))
            }
            (Cell::Points(a), Cell::Points(b)) => {
                let out: BTreeSet<usize> = a.intersection(b).copied().collect();
                Ok(if out.is_empty() {
                    None
                } else {
                    Some(Cell::Points(out))
                })
            }
            _ => Err(KsError::ShapeMismatch(
                "cannot intersect cells of different representations".into(),
            )),
        }
    }

    /// Set-level disjointness (used by partition validation).
    pub fn disjoint_from(&self, other: &Cell) -> Result<bool> {
        Ok(self.intersect(other)?.is_none())
    }

    /// Compact human-readable label.
    pub fn label(&self) -> String {
        match self {
            Cell::Intervals(v) => v
                .iter()
                .map(|(a, b)| format!("[{a:.6},{b:.6})"))
                .collect::<Vec<_>>()
                .join("+"),
            Cell::Cylinder(c) => {
                if c.is_empty() {
                    "full".to_string()
                } else {
                    c.iter()
                        .map(|(p, s)| format!("{p}:{s}"))
                        .collect::<Vec<_>>()
                        .join(",")
                }
            }
            Cell::Points(p) => format!(
                "{{{}}}",
                p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            ),
        }
    }
}

/// Sort, drop empty, and verify disjointness and containment in `[0, 1)`.
pub fn normalize_intervals(raw: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    let v: Vec<(f64, f64)> = raw.into_iter().filter(|(a, b)| b > a).collect();
    for &(a, b) in &v {
        if !(0.0..1.0).contains(&a) || b > 1.0 + 1e-15 || !a.is_finite() || !b.is_finite() {
            return Err(KsError::InvalidPartition(format!(
                "interval [{a},{b}) outside [0,1)"
            )));
        }
    }
    let mut v = v;
    v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    for w in v.windows(2) {
        if w[1].0 < w[0].1 - 1e-15 {
            return Err(KsError::InvalidPartition(format!(
                "overlapping intervals [{},{}) and [{},{})",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(v)
}

/// Intersection of two sorted disjoint interval lists. Walks the shorter
/// list and binary-searches its starting partner in the longer one, so an
/// atom-vs-pullback intersection costs `O(log n)` rather than `O(n)`.
pub fn intersect_sorted_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = Vec::new();
    for &(s0, s1) in short {
        // first interval in `long` whose end exceeds s0
        let mut idx = long.partition_point(|&(_, e)| e <= s0);
        while idx < long.len() {
            let (l0, l1) = long[idx];
            if l0 >= s1 {
                break;
            }
            let lo = s0.max(l0);
            let hi = s1.min(l1);
            if hi > lo {
                out.push((lo, hi));
            }
            idx += 1;
        }
    }
    out.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    out
}

pub fn intervals_length(v: &[(f64, f64)]) -> f64 {
    crate::entropy::kahan_sum(v.iter().map(|(a, b)| b - a))
}
