//! Convex sets of distribution vectors in V-representation.
//!
//! Every set handled here lives in the nonnegative orthant, which makes the
//! coordinate-hyperplane restriction a plain generator filter.

use std::collections::BTreeSet;

use num::{One, Zero};

use crate::error::PolytopeError;
use crate::lp::feasible_point;
use crate::partition::Partition;
use crate::rational::Rational;

pub type Point = Vec<Rational>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexSet {
    dim: usize,
    generators: Vec<Point>,
}

fn check_dim(dim: usize, v: &[Rational]) -> Result<(), PolytopeError> {
    if v.len() != dim {
        return Err(PolytopeError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

/// Exact LP test: is `v` a convex combination of `gens`?
pub fn in_hull(gens: &[Point], v: &[Rational]) -> bool {
    if gens.is_empty() {
        return false;
    }
    if gens.iter().any(|g| g.as_slice() == v) {
        return true;
    }
    let dim = v.len();
    // Coordinates where every generator and v are zero impose nothing.
    let mut rows: Vec<usize> = Vec::new();
    for j in 0..dim {
        let any_gen = gens.iter().any(|g| !g[j].is_zero());
        if !any_gen {
            if !v[j].is_zero() {
                return false;
            }
            continue;
        }
        rows.push(j);
    }
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|&j| gens.iter().map(|g| g[j].clone()).collect())
        .collect();
    let mut b: Vec<Rational> = rows.iter().map(|&j| v[j].clone()).collect();
    a.push(vec![Rational::one(); gens.len()]);
    b.push(Rational::one());
    feasible_point(&a, &b).is_some()
}

/// Extreme points of `conv(points)`, sorted. Empty input yields the empty set.
pub fn hull_reduce(dim: usize, points: Vec<Point>) -> Result<ConvexSet, PolytopeError> {
    for p in &points {
        check_dim(dim, p)?;
    }
    let mut pts = points;
    pts.sort();
    pts.dedup();
    let mut keep: Vec<Point> = pts.clone();
    let mut i = 0;
    while i < keep.len() {
        let others: Vec<Point> = keep
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, p)| p.clone())
            .collect();
        if in_hull(&others, &keep[i]) {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(ConvexSet {
        dim,
        generators: keep,
    })
}

/// Mutual inclusion of generators. Two empty sets are equal regardless of
/// dimension.
pub fn set_equal(a: &ConvexSet, b: &ConvexSet) -> Result<bool, PolytopeError> {
    if a.is_empty() || b.is_empty() {
        return Ok(a.is_empty() && b.is_empty());
    }
    if a.dim != b.dim {
        return Err(PolytopeError::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    for g in &a.generators {
        if !b.contains(g)? {
            return Ok(false);
        }
    }
    for g in &b.generators {
        if !a.contains(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl ConvexSet {
    pub fn empty(dim: usize) -> ConvexSet {
        ConvexSet {
            dim,
            generators: Vec::new(),
        }
    }

    /// Wraps generators as given, without reduction.
    pub fn from_generators(dim: usize, generators: Vec<Point>) -> Result<ConvexSet, PolytopeError> {
        for g in &generators {
            check_dim(dim, g)?;
        }
        Ok(ConvexSet { dim, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool, PolytopeError> {
        check_dim(self.dim, v)?;
        Ok(in_hull(&self.generators, v))
    }

    /// Canonical form: sorted extreme points.
    pub fn reduced(&self) -> ConvexSet {
        hull_reduce(self.dim, self.generators.clone()).expect("generators share the dimension")
    }

    /// Intersection with `x_i = 0` for every `i` in `zero_coords`.
    pub fn restrict_zero(&self, zero_coords: &BTreeSet<usize>) -> ConvexSet {
        ConvexSet {
            dim: self.dim,
            generators: self
                .generators
                .iter()
                .filter(|g| zero_coords.iter().all(|&i| g[i].is_zero()))
                .cloned()
                .collect(),
        }
    }

    /// Projection onto block masses, hull-reduced.
    pub fn quotient_project(&self, part: &Partition) -> ConvexSet {
        let points = self
            .generators
            .iter()
            .map(|g| project_point(g, part))
            .collect();
        hull_reduce(part.len(), points).expect("projected points share the dimension")
    }
}

/// Sums coordinates within each block.
pub fn project_point(v: &[Rational], part: &Partition) -> Point {
    let mut out = vec![Rational::zero(); part.len()];
    for (i, x) in v.iter().enumerate() {
        if !x.is_zero() {
            out[part.block_of(crate::dist::StateId(i))] += x;
        }
    }
    out
}
