//! Projection-friendly feasible sets.

use crate::error::{check_dim, Error, Result};
use crate::Vector;

/// A closed convex set with a cheap Euclidean projection.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    Unbounded,
    /// Axis-aligned box `lower <= x <= upper`.
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
    NonnegativeOrthant,
}

impl FeasibleSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
            return Err(Error::invalid("box requires lower <= upper componentwise"));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(Vector::from_element(dim, lo), Vector::from_element(dim, hi))
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("ball radius must be positive and finite"));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    /// Dimension fixed by the descriptor, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            FeasibleSet::Box { lower, .. } => Some(lower.len()),
            FeasibleSet::Ball { center, .. } => Some(center.len()),
            FeasibleSet::Unbounded | FeasibleSet::NonnegativeOrthant => None,
        }
    }

    /// Euclidean diameter; `None` when the set is unbounded.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            FeasibleSet::Box { lower, upper } => Some((upper - lower).norm()),
            FeasibleSet::Ball { radius, .. } => Some(2.0 * radius),
            FeasibleSet::Unbounded | FeasibleSet::NonnegativeOrthant => None,
        }
    }

    pub fn contains(&self, point: &Vector, tol: f64) -> bool {
        match self.project(point) {
            Ok(p) => (p - point).norm() <= tol,
            Err(_) => false,
        }
    }

    /// Closest point of the set to `point`.
    pub fn project(&self, point: &Vector) -> Result<Vector> {
        if let Some(d) = self.dim() {
            check_dim(d, point.len())?;
        }
        Ok(match self {
            FeasibleSet::Unbounded => point.clone(),
            FeasibleSet::Box { lower, upper } => {
                Vector::from_fn(point.len(), |i, _| point[i].clamp(lower[i], upper[i]))
            }
            FeasibleSet::Ball { center, radius } => {
                let offset = point - center;
                let dist = offset.norm();
                if dist <= *radius {
                    point.clone()
                } else {
                    center + offset * (*radius / dist)
                }
            }
            FeasibleSet::NonnegativeOrthant => point.map(|v| v.max(0.0)),
        })
    }
}
