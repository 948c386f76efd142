//! Monte Carlo experiment simulation.
//!
//! Generates quadrature sample records from Gaussian states, and simulates
//! the linearized four-mode Schwinger-spin readout: local-oscillator mixing,
//! analyzer angle choice, and integer photon-count differences.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::distributions::{Quadrature, SampleRecord};
use crate::error::{Error, Result};
use crate::gaussian::GaussianTwoModeState;

/// Configuration of the Schwinger-spin photon-counting readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneConfig {
    /// Mean local-oscillator particles per shot (E^2).
    pub lo_intensity: f64,
    /// Alice's analyzer angle, radians (0 -> X, pi/2 -> P).
    pub theta_a: f64,
    /// Bob's analyzer angle, radians.
    pub theta_b: f64,
    pub shots: usize,
    pub seed: u64,
}

impl HomodyneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo_intensity >= 10.0) {
            return Err(Error::RegimeViolation(self.lo_intensity));
        }
        if self.lo_intensity < 1e4 {
            eprintln!(
                "warning: lo_intensity = {} is below 1e4; linearized readout may be inaccurate",
                self.lo_intensity
            );
        }
        if self.shots == 0 {
            return Err(Error::InvalidParameter("shots must be positive".into()));
        }
        Ok(())
    }
}

/// Per-shot detector counts behind the two analyzers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub n_plus_a: u64,
    pub n_minus_a: u64,
    pub n_plus_b: u64,
    pub n_minus_b: u64,
}

impl CountRecord {
    /// Spin outcomes (J_A, J_B): half the count difference at each site.
    pub fn spin_outcomes(&self) -> (f64, f64) {
        (
            (self.n_plus_a as f64 - self.n_minus_a as f64) / 2.0,
            (self.n_plus_b as f64 - self.n_minus_b as f64) / 2.0,
        )
    }
}

/// Draw `n_per_setting` records for the (X,X) pair and the same number for
/// (P,P), from the corresponding two-dimensional marginals.
pub fn sample_quadrature_records(
    state: &GaussianTwoModeState,
    n_per_setting: usize,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let mut records = Vec::with_capacity(2 * n_per_setting);
    for v in state.sample_stream(n_per_setting, seed, 0)? {
        records.push(SampleRecord::new(Quadrature::X, Quadrature::X, v[0], v[2])?);
    }
    for v in state.sample_stream(n_per_setting, seed, 1)? {
        records.push(SampleRecord::new(Quadrature::P, Quadrature::P, v[1], v[3])?);
    }
    Ok(records)
}

/// Simulate the Schwinger-spin counting readout in the linearized
/// (signal much weaker than LO) regime.
///
/// Per shot: draw the signal quadratures rotated by the analyzer angles,
/// set the site spin outcome J = E x / 2 with E = sqrt(lo_intensity), draw
/// a Poissonian LO total L per site, and emit integer counts
/// n_pm = round((L +- 2J)/2) with ties to even.
pub fn simulate_schwinger_counts(
    state: &GaussianTwoModeState,
    cfg: &HomodyneConfig,
) -> Result<Vec<CountRecord>> {
    cfg.validate()?;
    if !state.is_physical() {
        return Err(Error::NonPhysicalState(state.physicality_margin()));
    }
    let amplitude = cfg.lo_intensity.sqrt();
    let (ca, sa) = (cfg.theta_a.cos(), cfg.theta_a.sin());
    let (cb, sb) = (cfg.theta_b.cos(), cfg.theta_b.sin());

    let draws = state.sample_stream(cfg.shots, cfg.seed, 0)?;
    let mut lo_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    lo_rng.set_stream(1);
    let poisson = Poisson::new(cfg.lo_intensity)
        .map_err(|e| Error::InvalidParameter(format!("Poisson LO intensity: {e}")))?;

    let mut out = Vec::with_capacity(cfg.shots);
    for v in draws {
        let x_a = ca * v[0] + sa * v[1];
        let x_b = cb * v[2] + sb * v[3];
        let j_a = amplitude * x_a / 2.0;
        let j_b = amplitude * x_b / 2.0;
        let l_a: f64 = poisson.sample(&mut lo_rng);
        let l_b: f64 = poisson.sample(&mut lo_rng);
        out.push(CountRecord {
            n_plus_a: to_count((l_a + 2.0 * j_a) / 2.0),
            n_minus_a: to_count((l_a - 2.0 * j_a) / 2.0),
            n_plus_b: to_count((l_b + 2.0 * j_b) / 2.0),
            n_minus_b: to_count((l_b - 2.0 * j_b) / 2.0),
        });
    }
    Ok(out)
}

/// Run the counting readout for both conjugate setting pairs, (0, 0) and
/// (pi/2, pi/2), and return the spin outcomes as particle-unit records.
pub fn schwinger_spin_records(
    state: &GaussianTwoModeState,
    lo_intensity: f64,
    shots: usize,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut records = Vec::with_capacity(2 * shots);
    for (quad, theta, seed_offset) in [(Quadrature::X, 0.0, 0), (Quadrature::P, half_pi, 1)] {
        let cfg = HomodyneConfig {
            lo_intensity,
            theta_a: theta,
            theta_b: theta,
            shots,
            seed: seed.wrapping_add(seed_offset),
        };
        for c in simulate_schwinger_counts(state, &cfg)? {
            let (ja, jb) = c.spin_outcomes();
            records.push(SampleRecord::new(quad, quad, ja, jb)?);
        }
    }
    Ok(records)
}

fn to_count(v: f64) -> u64 {
    let rounded = round_ties_even(v);
    if rounded < 0.0 {
        0
    } else {
        rounded as u64
    }
}

// nearest integer, ties to even
fn round_ties_even(v: f64) -> f64 {
    let floor = v.floor();
    let frac = v - floor;
    if frac > 0.5 {
        floor + 1.0
    } else if frac < 0.5 {
        floor
    } else if (floor as i64) % 2 == 0 {
        floor
    } else {
        floor + 1.0
    }
}
