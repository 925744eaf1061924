//! Per-arm reward distributions with sampling, means and centered moments.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{Error, Result};
use crate::estimators::HeavyTailParams;

/// Relative tolerance used for moment quadrature.
pub const MOMENT_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArmDistribution {
    Gaussian { mean: f64, sigma: f64 },
    Laplace { mean: f64, scale: f64 },
    /// `mean + scale * U^(-1/shape) - shape * scale / (shape - 1)` with `U` uniform.
    ShiftedPareto { mean: f64, shape: f64, scale: f64 },
    /// Zero with probability `mass_at_zero`, otherwise `atom`.
    TwoPoint { mass_at_zero: f64, atom: f64 },
}

impl ArmDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } | Self::Laplace { mean, .. } | Self::ShiftedPareto { mean, .. } => mean,
            Self::TwoPoint { mass_at_zero, atom } => (1.0 - mass_at_zero) * atom,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { mean, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sigma * z
            }
            Self::Laplace { mean, scale } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                mean - scale * u.signum() * (-2.0 * u.abs()).ln_1p()
            }
            Self::ShiftedPareto { mean, shape, scale } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                mean + scale * u.powf(-1.0 / shape) - shape * scale / (shape - 1.0)
            }
            Self::TwoPoint { mass_at_zero, atom } => {
                if rng.random::<f64>() < mass_at_zero {
                    0.0
                } else {
                    atom
                }
            }
        }
    }

    /// Structural checks; the moment class is checked separately.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Self::Gaussian { mean, sigma } => {
                if !mean.is_finite() || !(sigma >= 0.0 && sigma.is_finite()) {
                    return bad(format!("gaussian needs finite mean and sigma >= 0, got {mean}, {sigma}"));
                }
            }
            Self::Laplace { mean, scale } => {
                if !mean.is_finite() || !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!("laplace needs finite mean and scale > 0, got {mean}, {scale}"));
                }
            }
            Self::ShiftedPareto { mean, shape, scale } => {
                if !mean.is_finite() || !(shape > 1.0) || !(scale > 0.0 && scale.is_finite()) {
                    return bad(format!(
                        "shifted pareto needs finite mean, shape > 1, scale > 0, got {mean}, {shape}, {scale}"
                    ));
                }
            }
            Self::TwoPoint { mass_at_zero, atom } => {
                if !(0.0..=1.0).contains(&mass_at_zero) || !atom.is_finite() {
                    return bad(format!("two-point needs mass in [0, 1] and finite atom, got {mass_at_zero}, {atom}"));
                }
            }
        }
        Ok(())
    }

    /// `E|X - E X|^order`.
    pub fn centered_moment(&self, order: f64) -> Result<f64> {
        if !(order >= 1.0) {
            return Err(Error::InvalidParameter(format!("moment order must be >= 1, got {order}")));
        }
        match *self {
            Self::Gaussian { sigma, .. } => Ok(gaussian_abs_moment(sigma, order)),
            Self::Laplace { scale, .. } => Ok(scale.powf(order) * gamma_integral(order)),
            Self::ShiftedPareto { shape, scale, .. } => {
                if shape <= order {
                    return Err(Error::MomentDiverges { order, shape });
                }
                Ok(scale.powf(order) * unit_pareto_moment(shape, order))
            }
            Self::TwoPoint { mass_at_zero, atom } => {
                let p = 1.0 - mass_at_zero;
                let a = atom.abs();
                // mass (1-p) at distance p a, mass p at distance (1-p) a
                Ok(mass_at_zero * (p * a).powf(order) + p * ((1.0 - p) * a).powf(order))
            }
        }
    }
}

/// `sigma^q 2^(q/2) Gamma((q+1)/2) / sqrt(pi)`.
fn gaussian_abs_moment(sigma: f64, q: f64) -> f64 {
    if q == 2.0 {
        return sigma * sigma;
    }
    sigma.powf(q) * 2f64.powf(q / 2.0) * statrs::function::gamma::gamma((q + 1.0) / 2.0)
        / std::f64::consts::PI.sqrt()
}

/// `int_0^inf u^q e^(-u) du` by quadrature, split at 1 with `u = 1/s` on the tail.
fn gamma_integral(q: f64) -> f64 {
    let head = integrate(|u| u.powf(q) * (-u).exp(), 0.0, 1.0, MOMENT_REL_TOL);
    let tail = integrate(
        |s: f64| {
            if s <= 0.0 {
                0.0
            } else {
                s.powf(-q - 2.0) * (-1.0 / s).exp()
            }
        },
        0.0,
        1.0,
        MOMENT_REL_TOL,
    );
    head + tail
}

/// `E|P - E P|^q` for a Pareto variable with unit scale and shape `alpha`.
///
/// Written as `int_0^1 |w^(-1/alpha) - m|^q dw` with `m = alpha/(alpha-1)`,
/// split at the kink and at `u = 2m`. The singular piece near `w = 0` uses
/// `w = w0 s^beta`, `beta = 1/(1 - q/alpha)`, which makes the integrand
/// bounded.
pub fn unit_pareto_moment(alpha: f64, q: f64) -> f64 {
    let m = alpha / (alpha - 1.0);
    let w1 = m.powf(-alpha);
    let w0 = (2.0 * m).powf(-alpha);
    let body = |w: f64| (w.powf(-1.0 / alpha) - m).abs().powf(q);
    let mid = integrate(body, w0, w1, MOMENT_REL_TOL);
    let head = integrate(body, w1, 1.0, MOMENT_REL_TOL);
    let beta = 1.0 / (1.0 - q / alpha);
    let w0_root = w0.powf(1.0 / alpha);
    let prefactor = w0.powf(1.0 - q / alpha) * beta;
    let tail = integrate(
        |s: f64| prefactor * (1.0 - m * w0_root * s.powf(beta / alpha)).powf(q),
        0.0,
        1.0,
        MOMENT_REL_TOL,
    );
    head + mid + tail
}

/// Shifted Pareto arm with the given mean whose centered `(1+eps)`-moment
/// does not exceed `v`.
///
/// The scale is the unshifted-Pareto scale `mean (shape-1)/shape` when the
/// mean is positive, capped by the largest scale meeting the moment bound.
pub fn make_shifted_pareto(mean: f64, ht: &HeavyTailParams, shape: f64) -> Result<ArmDistribution> {
    let q = ht.order();
    if shape <= q {
        return Err(Error::MomentDiverges { order: q, shape });
    }
    let unit = unit_pareto_moment(shape, q);
    let cap = (ht.v / unit).powf(1.0 / q);
    let natural = if mean > 0.0 { mean * (shape - 1.0) / shape } else { f64::INFINITY };
    let mut scale = natural.min(cap);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InfeasibleMoment { bound: ht.v });
    }
    let moment = |s: f64| s.powf(q) * unit;
    if moment(scale) > ht.v {
        let (mut lo, mut hi) = (0.0, scale);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moment(mid) <= ht.v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        scale = lo;
        if !(scale > 0.0) {
            return Err(Error::InfeasibleMoment { bound: ht.v });
        }
    }
    Ok(ArmDistribution::ShiftedPareto { mean, shape, scale })
}
