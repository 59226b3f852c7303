//! Time-varying problem interfaces and a few generic sequences.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::{Rng, Vector};

/// The cost of one slot.
pub trait SlotProblem {
    fn dim(&self) -> usize;
    fn cost(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;

    /// The exposed minimizer `x_k*`, when the scenario knows it.
    fn minimizer(&self) -> Option<Vector> {
        None
    }

    /// Projection onto the minimizer set `X_k*`. Defaults to the exposed
    /// minimizer, which is correct whenever the minimizer is unique.
    fn project_minimizers(&self, _x: &Vector) -> Option<Vector> {
        self.minimizer()
    }

    fn optimal_cost(&self) -> Option<f64> {
        self.minimizer().map(|m| self.cost(&m))
    }

    /// `dist(x, X_k*)`, if the minimizer set is exposed.
    fn distance_to_minimizers(&self, x: &Vector) -> Option<f64> {
        self.project_minimizers(x).map(|p| (x - p).norm())
    }
}

impl<S: SlotProblem + ?Sized> SlotProblem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn cost(&self, x: &Vector) -> f64 {
        (**self).cost(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }

    fn minimizer(&self) -> Option<Vector> {
        (**self).minimizer()
    }

    fn project_minimizers(&self, x: &Vector) -> Option<Vector> {
        (**self).project_minimizers(x)
    }

    fn optimal_cost(&self) -> Option<f64> {
        (**self).optimal_cost()
    }
}

/// A sequence of slot problems `f_1, f_2, ...` indexed from 1.
pub trait ProblemSequence {
    type Slot<'a>: SlotProblem
    where
        Self: 'a;

    fn dim(&self) -> usize;

    /// Number of slots available, `None` for unbounded sequences.
    fn horizon(&self) -> Option<usize> {
        None
    }

    fn slot(&self, k: usize) -> Result<Self::Slot<'_>>;
}

/// Minimizer path generators shared by the synthetic scenarios.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    Static,
    /// `x*_{k+1} = x*_k + velocity`.
    ConstantVelocity { velocity: Vector },
    /// `x*_{k+1} = x*_k + scale * k^(-decay) * direction`, a path whose
    /// length grows like `K^(1-decay)`.
    DecayingVelocity {
        scale: f64,
        decay: f64,
        direction: Vector,
    },
}

impl Trajectory {
    /// Decaying velocity along a random unit direction.
    pub fn decaying(dim: usize, scale: f64, decay: f64, rng: &mut Rng) -> Self {
        Trajectory::DecayingVelocity {
            scale,
            decay,
            direction: crate::noise::unit_sphere(dim, rng),
        }
    }

    /// Positions `x*_1 .. x*_horizon`.
    pub fn realize(&self, start: &Vector, horizon: usize) -> Result<Vec<Vector>> {
        let mut out = Vec::with_capacity(horizon);
        let mut x = start.clone();
        for k in 1..=horizon {
            out.push(x.clone());
            match self {
                Trajectory::Static => {}
                Trajectory::ConstantVelocity { velocity } => {
                    check_dim(start.len(), velocity.len())?;
                    x += velocity;
                }
                Trajectory::DecayingVelocity {
                    scale,
                    decay,
                    direction,
                } => {
                    check_dim(start.len(), direction.len())?;
                    x += direction * (scale * (k as f64).powf(-decay));
                }
            }
        }
        Ok(out)
    }
}

/// Seed-independent description of a [`Trajectory`]; random directions are
/// drawn when it is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec {
    Static,
    ConstantVelocity { speed: f64 },
    DecayingVelocity { scale: f64, decay: f64 },
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec::DecayingVelocity {
            scale: 0.05,
            decay: 0.75,
        }
    }
}

impl TrajectorySpec {
    pub fn build(&self, dim: usize, rng: &mut Rng) -> Trajectory {
        match *self {
            TrajectorySpec::Static => Trajectory::Static,
            TrajectorySpec::ConstantVelocity { speed } => Trajectory::ConstantVelocity {
                velocity: crate::noise::unit_sphere(dim, rng) * speed,
            },
            TrajectorySpec::DecayingVelocity { scale, decay } => Trajectory::decaying(dim, scale, decay, rng),
        }
    }
}

/// `f_k(x) = (curvature / 2) ||x - c_k||^2` with a prescribed center path.
#[derive(Debug, Clone)]
pub struct MovingQuadratic {
    curvature: f64,
    centers: Vec<Vector>,
}

impl MovingQuadratic {
    pub fn new(curvature: f64, centers: Vec<Vector>) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(Error::invalid("curvature must be positive"));
        }
        let dim = centers
            .first()
            .ok_or_else(|| Error::invalid("empty center path"))?
            .len();
        for c in &centers {
            check_dim(dim, c.len())?;
        }
        Ok(MovingQuadratic { curvature, centers })
    }

    pub fn from_trajectory(
        curvature: f64,
        start: &Vector,
        trajectory: &Trajectory,
        horizon: usize,
    ) -> Result<Self> {
        Self::new(curvature, trajectory.realize(start, horizon)?)
    }

    pub fn centers(&self) -> &[Vector] {
        &self.centers
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadraticSlot<'a> {
    curvature: f64,
    center: &'a Vector,
}

impl SlotProblem for QuadraticSlot<'_> {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn cost(&self, x: &Vector) -> f64 {
        0.5 * self.curvature * (x - self.center).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (x - self.center) * self.curvature
    }

    fn minimizer(&self) -> Option<Vector> {
        Some(self.center.clone())
    }

    fn optimal_cost(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl ProblemSequence for MovingQuadratic {
    type Slot<'a> = QuadraticSlot<'a>;

    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.centers.len())
    }

    fn slot(&self, k: usize) -> Result<QuadraticSlot<'_>> {
        let center = k
            .checked_sub(1)
            .and_then(|i| self.centers.get(i))
            .ok_or_else(|| Error::invalid(format!("slot {k} outside 1..={}", self.centers.len())))?;
        Ok(QuadraticSlot {
            curvature: self.curvature,
            center,
        })
    }
}

/// `f_k(x) = sum_i (x_i - c_i)^4 / 4` with a fixed center: convex but not
/// strongly convex, a compact-domain test case once paired with a box.
#[derive(Debug, Clone)]
pub struct QuarticBowl {
    center: Vector,
    horizon: usize,
}

impl QuarticBowl {
    pub fn new(center: Vector, horizon: usize) -> Result<Self> {
        if center.is_empty() || horizon == 0 {
            return Err(Error::invalid("quartic bowl needs a dimension and a horizon"));
        }
        Ok(QuarticBowl { center, horizon })
    }
}

impl SlotProblem for QuarticBowl {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn cost(&self, x: &Vector) -> f64 {
        (x - &self.center).iter().map(|d| 0.25 * d.powi(4)).sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (x - &self.center).map(|d| d.powi(3))
    }

    fn minimizer(&self) -> Option<Vector> {
        Some(self.center.clone())
    }

    fn optimal_cost(&self) -> Option<f64> {
        Some(0.0)
    }
}

impl ProblemSequence for QuarticBowl {
    type Slot<'a> = &'a QuarticBowl;

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.horizon)
    }

    fn slot(&self, k: usize) -> Result<&QuarticBowl> {
        if k == 0 || k > self.horizon {
            return Err(Error::invalid(format!("slot {k} outside 1..={}", self.horizon)));
        }
        Ok(self)
    }
}

/// Central finite-difference gradient with step `h`.
pub fn finite_difference_gradient<S: SlotProblem + ?Sized>(slot: &S, x: &Vector, h: f64) -> Vector {
    let mut probe = x.clone();
    Vector::from_fn(x.len(), |i, _| {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = slot.cost(&probe);
        probe[i] = orig - h;
        let down = slot.cost(&probe);
        probe[i] = orig;
        (up - down) / (2.0 * h)
    })
}

/// Largest relative error between the analytic gradient and central
/// differences over `points` Gaussian points of scale `scale`.
pub fn max_gradient_error<S: SlotProblem + ?Sized>(
    slot: &S,
    points: usize,
    scale: f64,
    rng: &mut Rng,
) -> f64 {
    let dim = slot.dim();
    (0..points)
        .map(|_| {
            let x = Vector::from_fn(dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
            let analytic = slot.gradient(&x);
            let numeric = finite_difference_gradient(slot, &x, 1e-6);
            (&analytic - &numeric).norm() / analytic.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}
