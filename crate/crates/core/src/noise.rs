//! Gradient-error models.
//!
//! A model perturbs the exact gradient `g` into `g + e_k` with
//! `E ||e_k||^2 <= eps_k^2 + nu^2 ||g||^2`. Every generator splits the error
//! into an additive part of size `eps_k` and a gradient-proportional part of
//! size `nu ||g||`, so the second-moment bound holds with equality.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{Rng, Vector};

/// Whether the errors may be adversarial or are zero-mean white noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorRegime {
    /// Only the second-moment bound holds; the theory's indicator is 1.
    General,
    /// Zero-mean i.i.d. errors in addition to the moment bound; indicator 0.
    WhiteNoise,
}

impl ErrorRegime {
    /// The 0/1 indicator used by the theory constants.
    pub fn indicator(self) -> f64 {
        match self {
            ErrorRegime::General => 1.0,
            ErrorRegime::WhiteNoise => 0.0,
        }
    }
}

/// Additive error level `eps_k` as a function of the (1-based) slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsSchedule {
    Constant(f64),
    /// `eps / sqrt(k)`
    InvSqrt(f64),
    /// `eps / k`
    Inv(f64),
    /// `eps` for `k <= k0`, zero afterwards.
    Window { eps: f64, k0: usize },
}

impl EpsSchedule {
    pub fn at(&self, k: usize) -> f64 {
        let k = k.max(1) as f64;
        match *self {
            EpsSchedule::Constant(e) => e,
            EpsSchedule::InvSqrt(e) => e / k.sqrt(),
            EpsSchedule::Inv(e) => e / k,
            EpsSchedule::Window { eps, k0 } => {
                if k <= k0 as f64 {
                    eps
                } else {
                    0.0
                }
            }
        }
    }

    /// Upper bound `eps >= eps_k` for all k.
    pub fn sup(&self) -> f64 {
        match *self {
            EpsSchedule::Constant(e)
            | EpsSchedule::InvSqrt(e)
            | EpsSchedule::Inv(e)
            | EpsSchedule::Window { eps: e, .. } => e,
        }
    }

    fn level(&self) -> f64 {
        self.sup()
    }
}

/// How error directions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorDistribution {
    /// Uniform direction on the unit sphere.
    SphereUniform,
    /// Isotropic Gaussian with the prescribed second moment.
    Gaussian,
    /// Deterministic, along `+grad`: the error points in the direction of
    /// increasing cost. With a small step this enlarges the step toward the
    /// minimizer.
    AlongGradient,
    /// Deterministic, along `-grad`: cancels part of the gradient and stalls
    /// the iterate. This is the direction that maximises the next cost.
    AgainstGradient,
}

impl ErrorDistribution {
    pub fn is_zero_mean(self) -> bool {
        matches!(self, ErrorDistribution::SphereUniform | ErrorDistribution::Gaussian)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModel {
    regime: ErrorRegime,
    schedule: EpsSchedule,
    nu: f64,
    distribution: ErrorDistribution,
}

impl ErrorModel {
    pub fn new(
        regime: ErrorRegime,
        schedule: EpsSchedule,
        nu: f64,
        distribution: ErrorDistribution,
    ) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::invalid("proportional factor nu must be finite and >= 0"));
        }
        let lvl = schedule.level();
        if !(lvl >= 0.0) || !lvl.is_finite() {
            return Err(Error::invalid("eps schedule must be finite and >= 0"));
        }
        if regime == ErrorRegime::WhiteNoise && !distribution.is_zero_mean() {
            return Err(Error::invalid(
                "white-noise regime needs a zero-mean distribution",
            ));
        }
        Ok(ErrorModel {
            regime,
            schedule,
            nu,
            distribution,
        })
    }

    /// Exact gradients.
    pub fn exact() -> Self {
        ErrorModel {
            regime: ErrorRegime::WhiteNoise,
            schedule: EpsSchedule::Constant(0.0),
            nu: 0.0,
            distribution: ErrorDistribution::Gaussian,
        }
    }

    pub fn white(schedule: EpsSchedule, nu: f64, distribution: ErrorDistribution) -> Result<Self> {
        Self::new(ErrorRegime::WhiteNoise, schedule, nu, distribution)
    }

    pub fn adversarial(schedule: EpsSchedule, nu: f64, distribution: ErrorDistribution) -> Result<Self> {
        Self::new(ErrorRegime::General, schedule, nu, distribution)
    }

    pub fn regime(&self) -> ErrorRegime {
        self.regime
    }

    pub fn schedule(&self) -> EpsSchedule {
        self.schedule
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn distribution(&self) -> ErrorDistribution {
        self.distribution
    }

    /// Draws `e_k` for slot `k` and returns `(grad + e_k, eps_k)`.
    pub fn apply(&self, exact_grad: &Vector, k: usize, rng: &mut Rng) -> (Vector, f64) {
        let eps_k = self.schedule.at(k);
        let prop = self.nu * exact_grad.norm();
        if eps_k == 0.0 && prop == 0.0 {
            return (exact_grad.clone(), eps_k);
        }
        let dim = exact_grad.len();
        let err = match self.distribution {
            ErrorDistribution::SphereUniform => {
                unit_sphere(dim, rng) * eps_k + unit_sphere(dim, rng) * prop
            }
            ErrorDistribution::Gaussian => {
                let scale = 1.0 / (dim as f64).sqrt();
                gaussian(dim, rng) * (eps_k * scale) + gaussian(dim, rng) * (prop * scale)
            }
            ErrorDistribution::AlongGradient | ErrorDistribution::AgainstGradient => {
                let sign = if self.distribution == ErrorDistribution::AlongGradient {
                    1.0
                } else {
                    -1.0
                };
                let mag = (eps_k * eps_k + prop * prop).sqrt();
                gradient_direction(exact_grad) * (sign * mag)
            }
        };
        (exact_grad + err, eps_k)
    }
}

/// Unit vector along `g`; the first coordinate axis when `g = 0`.
fn gradient_direction(g: &Vector) -> Vector {
    let n = g.norm();
    if n > 0.0 {
        g / n
    } else {
        let mut e = Vector::zeros(g.len());
        if !g.is_empty() {
            e[0] = 1.0;
        }
        e
    }
}

fn gaussian(dim: usize, rng: &mut Rng) -> Vector {
    Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn unit_sphere(dim: usize, rng: &mut Rng) -> Vector {
    loop {
        let z = gaussian(dim, rng);
        let n = z.norm();
        if n > 1e-12 {
            return z / n;
        }
    }
}
