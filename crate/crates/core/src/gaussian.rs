//! Analytic two-mode Gaussian state engine.
//!
//! States are described by a 4-dim mean vector and a 4x4 covariance matrix
//! over (X_A, P_A, X_B, P_B) in the [X, P] = 2i scaling, where the vacuum
//! variance is 1 and the Heisenberg bound reads dX dP >= 1.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::distributions::{JointDistribution, Quadrature};
use crate::error::{Error, Result};

const PHYSICALITY_TOL: f64 = 1e-10;

/// Two-mode Gaussian state: mean vector and covariance over
/// (X_A, P_A, X_B, P_B).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTwoModeState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl GaussianTwoModeState {
    pub fn new(mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        let sym_err = (cov - cov.transpose()).abs().max();
        if sym_err > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "covariance not symmetric (max asymmetry {sym_err:.3e})"
            )));
        }
        let state = GaussianTwoModeState { mean, cov };
        let lambda = state.physicality_margin();
        if lambda < -PHYSICALITY_TOL {
            return Err(Error::NonPhysicalState(lambda));
        }
        Ok(state)
    }

    /// Vacuum: identity covariance, zero mean.
    pub fn vacuum() -> Self {
        GaussianTwoModeState { mean: Vector4::zeros(), cov: Matrix4::identity() }
    }

    /// Two-mode squeezed state with squeezing parameter `r`:
    /// diagonal cosh(2r), X-X cross sinh(2r), P-P cross -sinh(2r).
    pub fn two_mode_squeezed(r: f64) -> Self {
        let ch = (2.0 * r).cosh();
        let sh = (2.0 * r).sinh();
        let cov = Matrix4::new(
            ch, 0.0, sh, 0.0, //
            0.0, ch, 0.0, -sh, //
            sh, 0.0, ch, 0.0, //
            0.0, -sh, 0.0, ch,
        );
        GaussianTwoModeState { mean: Vector4::zeros(), cov }
    }

    /// Smallest eigenvalue of cov + i*Omega; nonnegative (within tolerance)
    /// for physical states.
    pub fn physicality_margin(&self) -> f64 {
        let mut m = nalgebra::Matrix4::<Complex64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = Complex64::new(self.cov[(i, j)], 0.0);
            }
        }
        // symplectic form for [X, P] = 2i with vacuum variance 1
        let omega = [(0, 1), (2, 3)];
        for &(a, b) in &omega {
            m[(a, b)] += Complex64::new(0.0, 1.0);
            m[(b, a)] += Complex64::new(0.0, -1.0);
        }
        let eig = m.symmetric_eigen();
        eig.eigenvalues.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= -PHYSICALITY_TOL
    }

    /// Independent single-mode attenuation with a common thermal occupation:
    /// each diagonal block goes to eta*block + (1-eta)(1+2 n_th) I, cross
    /// blocks scale by sqrt(eta_a eta_b), means by sqrt(eta).
    pub fn apply_loss(&self, eta_a: f64, eta_b: f64, n_th: f64) -> Result<Self> {
        for eta in [eta_a, eta_b] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::OutOfRangeTransmission(eta));
            }
        }
        if !(n_th >= 0.0) {
            return Err(Error::InvalidParameter(format!("n_th must be nonnegative, got {n_th}")));
        }
        let noise = 1.0 + 2.0 * n_th;
        let scale = |i: usize| if i < 2 { eta_a } else { eta_b };
        let mut cov = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                cov[(i, j)] = (scale(i) * scale(j)).sqrt() * self.cov[(i, j)];
            }
            cov[(i, i)] += (1.0 - scale(i)) * noise;
        }
        let mut mean = self.mean;
        for i in 0..4 {
            mean[i] *= scale(i).sqrt();
        }
        GaussianTwoModeState::new(mean, cov)
    }

    /// (Var(q_A), Var(q_B), Cov(q_A, q_B)) for the chosen quadrature pair.
    pub fn marginal_pair(&self, quad: Quadrature) -> (f64, f64, f64) {
        let (ia, ib) = match quad {
            Quadrature::X => (0, 2),
            Quadrature::P => (1, 3),
        };
        (self.cov[(ia, ia)], self.cov[(ib, ib)], self.cov[(ia, ib)])
    }

    /// Gaussian conditional variance of q_B given q_A (Schur complement):
    /// Var(q_B) - Cov(q_A, q_B)^2 / Var(q_A).
    pub fn inference_variance(&self, quad: Quadrature) -> Result<f64> {
        let (va, vb, c) = self.marginal_pair(quad);
        if !(va > 0.0) {
            return Err(Error::SingularMarginal(va));
        }
        Ok(vb - c * c / va)
    }

    /// EPR steering parameter: product of the inferred standard deviations.
    pub fn epsilon_analytic(&self) -> Result<f64> {
        let vx = self.inference_variance(Quadrature::X)?;
        let vp = self.inference_variance(Quadrature::P)?;
        Ok(vx.max(0.0).sqrt() * vp.max(0.0).sqrt())
    }

    /// Duan parameter: (Var(X_A - X_B) + Var(P_A + P_B)) / 4.
    pub fn duan_analytic(&self) -> f64 {
        let c = &self.cov;
        let var_xm = c[(0, 0)] + c[(2, 2)] - 2.0 * c[(0, 2)];
        let var_pp = c[(1, 1)] + c[(3, 3)] + 2.0 * c[(1, 3)];
        (var_xm + var_pp) / 4.0
    }

    /// Mean photon number (trace of cov - 4)/4 + |mean|^2/4; reported for
    /// context only, certification uses measured D.
    pub fn mean_photon_number(&self) -> f64 {
        (self.cov.trace() - 4.0) / 4.0 + self.mean.norm_squared() / 4.0
    }

    /// Draw `n` i.i.d. 4-vectors, deterministic per seed (stream 0).
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<[f64; 4]>> {
        self.sample_stream(n, seed, 0)
    }

    /// Seed-stream sampling: the same (seed, stream) pair always produces
    /// the same draws, so parallel generation can partition by stream.
    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<Vec<[f64; 4]>> {
        let margin = self.physicality_margin();
        if margin < -PHYSICALITY_TOL {
            return Err(Error::NonPhysicalState(margin));
        }
        let factor = self.covariance_factor();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let z = Vector4::from_fn(|_, _| StandardNormal.sample(&mut rng));
            let v = self.mean + factor * z;
            out.push([v[0], v[1], v[2], v[3]]);
        }
        Ok(out)
    }

    /// Discretize one quadrature-pair marginal into a joint table.
    pub fn discretize(&self, quad: Quadrature, bins: usize, span_sigmas: f64) -> Result<JointDistribution> {
        let (va, vb, c) = self.marginal_pair(quad);
        JointDistribution::from_gaussian_moments(va, vb, c, bins, span_sigmas)
    }

    /// Cholesky factor of the symmetrized covariance, falling back to an
    /// eigenvalue square root when the state sits on the physical boundary.
    fn covariance_factor(&self) -> Matrix4<f64> {
        let sym = (self.cov + self.cov.transpose()) * 0.5;
        if let Some(chol) = sym.cholesky() {
            return chol.l();
        }
        let eig = sym.symmetric_eigen();
        let mut root = Matrix4::zeros();
        for i in 0..4 {
            root[(i, i)] = eig.eigenvalues[i].max(0.0).sqrt();
        }
        eig.eigenvectors * root
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::BinningPolicy;
    use crate::distributions::SampleRecord;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn tmss_r0_is_vacuum() {
        let s = GaussianTwoModeState::two_mode_squeezed(0.0);
        assert_eq!(s.cov, Matrix4::identity());
        assert_eq!(s.mean, Vector4::zeros());
    }

    #[test]
    fn tmss_r1_covariance_entries() {
        let s = GaussianTwoModeState::two_mode_squeezed(1.0);
        assert_relative_eq!(s.cov[(0, 0)], 3.7621956910836314, epsilon = 1e-12);
        assert_relative_eq!(s.cov[(0, 2)], 3.626860407847019, epsilon = 1e-12);
        assert_relative_eq!(s.cov[(1, 3)], -3.626860407847019, epsilon = 1e-12);
        assert_eq!(s.cov[(0, 1)], 0.0);
    }

    #[test]
    fn tmss_grid_is_physical() {
        for i in -8..=8 {
            let r = i as f64 * 0.25;
            assert!(GaussianTwoModeState::two_mode_squeezed(r).is_physical(), "r = {r}");
        }
    }

    #[test]
    fn nonphysical_covariance_rejected() {
        // below-vacuum on both quadratures of one mode violates uncertainty
        let cov = Matrix4::from_diagonal(&Vector4::new(0.25, 0.25, 1.0, 1.0));
        assert!(GaussianTwoModeState::new(Vector4::zeros(), cov).is_err());
    }

    #[test]
    fn loss_identity_channel() {
        let s = GaussianTwoModeState::two_mode_squeezed(1.0);
        let out = s.apply_loss(1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!((out.cov - s.cov).abs().max(), 0.0, epsilon = 1e-14);
        assert_relative_eq!(out.inference_variance(Quadrature::X).unwrap(),
            s.inference_variance(Quadrature::X).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn loss_full_attenuation_gives_vacuum() {
        let s = GaussianTwoModeState::two_mode_squeezed(1.3);
        let out = s.apply_loss(0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!((out.cov - Matrix4::identity()).abs().max(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn loss_rejects_out_of_range() {
        let s = GaussianTwoModeState::vacuum();
        assert!(matches!(s.apply_loss(1.2, 1.0, 0.0), Err(Error::OutOfRangeTransmission(_))));
        assert!(matches!(s.apply_loss(0.5, -0.1, 0.0), Err(Error::OutOfRangeTransmission(_))));
    }

    #[test]
    fn inference_variance_closed_forms() {
        let vac = GaussianTwoModeState::vacuum();
        assert_relative_eq!(vac.inference_variance(Quadrature::X).unwrap(), 1.0);
        assert_relative_eq!(vac.inference_variance(Quadrature::P).unwrap(), 1.0);

        let s = GaussianTwoModeState::two_mode_squeezed(1.0);
        let expected = 1.0 / 2.0f64.cosh();
        assert_relative_eq!(s.inference_variance(Quadrature::X).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(s.inference_variance(Quadrature::P).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 0.26580222883407964, epsilon = 1e-15);
    }

    #[test]
    fn epsilon_closed_forms() {
        assert_relative_eq!(GaussianTwoModeState::vacuum().epsilon_analytic().unwrap(), 1.0);
        let s = GaussianTwoModeState::two_mode_squeezed(1.0);
        assert_relative_eq!(s.epsilon_analytic().unwrap(), 0.26580222883407964, epsilon = 1e-12);
        let s = GaussianTwoModeState::two_mode_squeezed(0.1);
        assert_relative_eq!(s.epsilon_analytic().unwrap(), 1.0 / 0.2f64.cosh(), epsilon = 1e-12);
        assert_relative_eq!(s.epsilon_analytic().unwrap(), 0.9803, epsilon = 1e-4);
    }

    #[test]
    fn duan_closed_forms() {
        assert_relative_eq!(GaussianTwoModeState::vacuum().duan_analytic(), 1.0);
        for r in [0.25, 0.5, 1.0, 1.5] {
            let s = GaussianTwoModeState::two_mode_squeezed(r);
            assert_relative_eq!(s.duan_analytic(), (-2.0 * r).exp(), epsilon = 1e-12);
            // cross-check against (1-x)/(1+x) with x = tanh r
            let x = r.tanh();
            assert_relative_eq!(s.duan_analytic(), (1.0 - x) / (1.0 + x), epsilon = 1e-12);
        }
    }

    #[test]
    fn mean_photon_number_of_tmss() {
        let r = 0.7f64;
        let s = GaussianTwoModeState::two_mode_squeezed(r);
        assert_relative_eq!(s.mean_photon_number(), 2.0 * r.sinh().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_per_seed_and_stream() {
        let s = GaussianTwoModeState::two_mode_squeezed(0.8);
        let a = s.sample(1000, 42).unwrap();
        let b = s.sample(1000, 42).unwrap();
        assert_eq!(a, b);
        let c = s.sample_stream(1000, 42, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn vacuum_sample_variances_concentrate() {
        let s = GaussianTwoModeState::vacuum();
        let draws = s.sample(1_000_000, 7).unwrap();
        for k in 0..4 {
            let n = draws.len() as f64;
            let mean: f64 = draws.iter().map(|v| v[k]).sum::<f64>() / n;
            let var: f64 = draws.iter().map(|v| (v[k] - mean).powi(2)).sum::<f64>() / n;
            assert!((0.99..=1.01).contains(&var), "axis {k}: {var}");
        }
    }

    #[test]
    fn lossy_duan_agrees_with_monte_carlo() {
        let s = GaussianTwoModeState::two_mode_squeezed(1.0)
            .apply_loss(0.5, 0.5, 0.0)
            .unwrap();
        let d_analytic = s.duan_analytic();
        assert!(d_analytic > (-2.0f64).exp());

        let n = 1_000_000usize;
        let draws = s.sample(n, 11).unwrap();
        let vals: Vec<f64> = draws
            .iter()
            .map(|v| {
                let xm = v[0] - v[2];
                let pp = v[1] + v[3];
                (xm * xm + pp * pp) / 4.0
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        // means are zero, so E[(X_A-X_B)^2 + (P_A+P_B)^2]/4 estimates D
        let var_est = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let se = (var_est / n as f64).sqrt();
        assert!((mean - d_analytic).abs() < 3.0 * se, "MC {mean} vs analytic {d_analytic}");
    }

    #[test]
    fn empirical_epsilon_matches_analytic() {
        let s = GaussianTwoModeState::two_mode_squeezed(1.0);
        let n = 1_000_000usize;
        let mut records = Vec::with_capacity(2 * n);
        for v in s.sample_stream(n, 3, 0).unwrap() {
            records.push(SampleRecord::new(Quadrature::X, Quadrature::X, v[0], v[2]).unwrap());
        }
        for v in s.sample_stream(n, 3, 1).unwrap() {
            records.push(SampleRecord::new(Quadrature::P, Quadrature::P, v[1], v[3]).unwrap());
        }
        // 200 bins keep the O(h^2) bin-center bias comfortably below 1%
        let policy = BinningPolicy::with_bins(200);
        let dx = JointDistribution::build_joint(&records, (Quadrature::X, Quadrature::X), policy).unwrap();
        let dp = JointDistribution::build_joint(&records, (Quadrature::P, Quadrature::P), policy).unwrap();
        let eps = (dx.inference_stats().var_inf * dp.inference_stats().var_inf).sqrt();
        assert_relative_eq!(eps, 0.26580222883407964, max_relative = 0.01);
    }

    proptest! {
        #[test]
        fn loss_preserves_physicality(
            r in -1.5f64..1.5,
            eta_a in 0.0f64..=1.0,
            eta_b in 0.0f64..=1.0,
            n_th in 0.0f64..3.0,
        ) {
            let s = GaussianTwoModeState::two_mode_squeezed(r);
            let out = s.apply_loss(eta_a, eta_b, n_th).unwrap();
            prop_assert!(out.is_physical());
        }
    }
}
