//! The delta-scopic EPR criterion layer.
//!
//! Assembles the steering parameter and its delta-inflated generalization
//! from inference statistics, evaluates the Gaussian closed form and its
//! threshold curve, inverts for the critical delta, and maps Schwinger-spin
//! statistics onto normalized quadratures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distributions::{delta_inflated_variance, InferenceStats};
use crate::error::{Error, Result};

/// sqrt(2/pi), the Gaussian mean-absolute-deviation factor.
pub const SQRT_2_OVER_PI: f64 = 0.7978845608028654;

/// Nonlocal-indeterminacy bounds for the two conjugate observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaLRParams {
    pub delta_x: f64,
    pub delta_p: f64,
}

impl DeltaLRParams {
    pub fn new(delta_x: f64, delta_p: f64) -> Result<Self> {
        for d in [delta_x, delta_p] {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::NegativeDelta(d));
            }
        }
        Ok(DeltaLRParams { delta_x, delta_p })
    }

    pub fn symmetric(delta: f64) -> Result<Self> {
        Self::new(delta, delta)
    }
}

/// Schwinger-spin measurement scales, in particle units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwingerConfig {
    /// |<J_B^X>|.
    pub jx_mean: f64,
    /// <b_LO^dag b_LO>.
    pub lo_intensity: f64,
}

impl SchwingerConfig {
    pub fn new(jx_mean: f64, lo_intensity: f64) -> Result<Self> {
        if !(jx_mean > 0.0) {
            return Err(Error::NonPositiveJx(jx_mean));
        }
        if !(lo_intensity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lo_intensity must be positive, got {lo_intensity}"
            )));
        }
        Ok(SchwingerConfig { jx_mean, lo_intensity })
    }

    /// jx_mean ~ lo_intensity/2 holds only in the weak-signal regime; flag
    /// disagreements above 10% without enforcing the relation.
    pub fn consistency_warning(&self) -> Option<String> {
        let expected = self.lo_intensity / 2.0;
        let rel = (self.jx_mean - expected).abs() / expected;
        if rel > 0.10 {
            Some(format!(
                "jx_mean = {} deviates from lo_intensity/2 = {} by {:.1}%",
                self.jx_mean,
                expected,
                100.0 * rel
            ))
        } else {
            None
        }
    }
}

/// One evaluated point of the delta-inflated steering product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonDeltaPoint {
    pub delta: f64,
    pub value: f64,
    /// value < 1, the delta-scopic nonlocality verdict at this delta.
    pub nonlocal: bool,
}

/// Full analysis result for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub epsilon: f64,
    pub epsilon_delta: Vec<EpsilonDeltaPoint>,
    pub critical_delta: Option<f64>,
    pub gaussian_assumed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_j: Option<f64>,
    pub metadata: BTreeMap<String, String>,
}

/// Steering parameter from the two inference variances.
pub fn epsilon(sx: &InferenceStats, sp: &InferenceStats) -> f64 {
    sx.var_inf.sqrt() * sp.var_inf.sqrt()
}

/// Distribution-agnostic delta-inflated steering product.
pub fn epsilon_delta_general(
    sx: &InferenceStats,
    sp: &InferenceStats,
    d: &DeltaLRParams,
) -> Result<f64> {
    let vx = delta_inflated_variance(sx, d.delta_x)?;
    let vp = delta_inflated_variance(sp, d.delta_p)?;
    Ok(vx.sqrt() * vp.sqrt())
}

/// Gaussian closed form in the symmetric simplification
/// (sigma = inferred sd of both observables, common delta):
/// sigma^2 + delta^2 + 2 delta sigma sqrt(2/pi).
pub fn epsilon_delta_gaussian(sigma: f64, delta: f64) -> f64 {
    sigma * sigma + delta * delta + 2.0 * delta * sigma * SQRT_2_OVER_PI
}

/// Largest epsilon that still implies delta-scopic nonlocality at the given
/// delta: [-delta sqrt(2/pi) + sqrt(2 delta^2/pi - (delta^2 - 1))]^2.
///
/// The bracket crosses zero exactly at delta = 1 (epsilon_delta >= delta^2,
/// so no state violates delta-LR beyond that); the formula's square would
/// rise again on a spurious branch, so the value is clamped to 0 there.
pub fn threshold_epsilon(delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::NegativeDelta(delta));
    }
    let two_over_pi = 2.0 / std::f64::consts::PI;
    let radicand = two_over_pi * delta * delta - (delta * delta - 1.0);
    if radicand < 0.0 {
        return Err(Error::DeltaTooLarge(delta));
    }
    let bracket = (-delta * two_over_pi.sqrt() + radicand.sqrt()).max(0.0);
    Ok(bracket * bracket)
}

/// The unique delta >= 0 where the Gaussian closed form crosses 1 at
/// sigma = sqrt(eps); closed quadratic root, no numeric root-finding.
pub fn critical_delta(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let sigma = eps.sqrt();
    let two_over_pi = 2.0 / std::f64::consts::PI;
    let delta = -sigma * two_over_pi.sqrt()
        + (sigma * sigma * two_over_pi - sigma * sigma + 1.0).sqrt();
    Ok(delta.max(0.0))
}

/// Rescale particle-unit spin statistics into dimensionless quadrature
/// statistics: variances divide by |<J^X>|/2, absolute deviations by its
/// square root.
pub fn schwinger_normalize(
    jz_stats: &InferenceStats,
    jy_stats: &InferenceStats,
    cfg: &SchwingerConfig,
) -> Result<(InferenceStats, InferenceStats)> {
    if !(cfg.jx_mean > 0.0) {
        return Err(Error::NonPositiveJx(cfg.jx_mean));
    }
    let unit = cfg.jx_mean / 2.0;
    let scale = |s: &InferenceStats| InferenceStats {
        var_inf: s.var_inf / unit,
        abs_dev: s.abs_dev / unit.sqrt(),
        n_effective: s.n_effective,
    };
    Ok((scale(jz_stats), scale(jy_stats)))
}

/// Nonlocal indeterminacy in particle units: delta * sqrt(|<J^X>|/2).
pub fn delta_j(delta: f64, cfg: &SchwingerConfig) -> f64 {
    delta * (cfg.jx_mean / 2.0).sqrt()
}

/// Evaluate the delta-inflated product over a delta grid and assemble a
/// report. Uses the general (distribution-agnostic) path.
pub fn build_report(
    sx: &InferenceStats,
    sp: &InferenceStats,
    deltas: &[f64],
    schwinger: Option<&SchwingerConfig>,
    gaussian_assumed: bool,
) -> Result<SteeringReport> {
    let eps = epsilon(sx, sp);
    let mut points = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let value = if gaussian_assumed {
            epsilon_delta_gaussian(eps.sqrt(), d)
        } else {
            epsilon_delta_general(sx, sp, &DeltaLRParams::symmetric(d)?)?
        };
        points.push(EpsilonDeltaPoint { delta: d, value, nonlocal: value < 1.0 });
    }
    let critical = if eps > 0.0 && eps <= 1.0 { Some(critical_delta(eps)?) } else { None };
    let dj = match (schwinger, critical) {
        (Some(cfg), Some(c)) => Some(delta_j(c, cfg)),
        _ => None,
    };
    Ok(SteeringReport {
        epsilon: eps,
        epsilon_delta: points,
        critical_delta: critical,
        gaussian_assumed,
        delta_j: dj,
        metadata: BTreeMap::new(),
    })
}
