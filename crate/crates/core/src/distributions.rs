//! Binned joint outcome distributions and the conditional-variance machinery.
//!
//! A [`JointDistribution`] is a normalized probability table over one pair of
//! commuting observables (one measurement-setting pair). From it we derive
//! conditional moments, the average conditional variance (the inference
//! variance), the absolute-deviation cross term, and the delta-inflated
//! inference variance. All conditional statistics are evaluated on bin
//! centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which quadrature a party measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    P,
}

impl std::fmt::Display for Quadrature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Quadrature::X => write!(f, "X"),
            Quadrature::P => write!(f, "P"),
        }
    }
}

impl std::str::FromStr for Quadrature {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "X" | "x" => Ok(Quadrature::X),
            "P" | "p" => Ok(Quadrature::P),
            other => {
                // Numeric analyzer angles in radians map onto X (0) and P (pi/2).
                if let Ok(theta) = other.parse::<f64>() {
                    let half_pi = std::f64::consts::FRAC_PI_2;
                    if theta.abs() < 1e-6 {
                        return Ok(Quadrature::X);
                    }
                    if (theta - half_pi).abs() < 1e-6 {
                        return Ok(Quadrature::P);
                    }
                    return Err(format!(
                        "unsupported analyzer angle {theta} (only 0 and pi/2 map to a quadrature)"
                    ));
                }
                Err(format!("unrecognized setting {other:?} (expected X, P, or an angle)"))
            }
        }
    }
}

/// One measurement shot: which quadratures were measured and the outcomes,
/// in dimensionless quadrature units (vacuum variance 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub setting_a: Quadrature,
    pub setting_b: Quadrature,
    pub outcome_a: f64,
    pub outcome_b: f64,
}

impl SampleRecord {
    pub fn new(
        setting_a: Quadrature,
        setting_b: Quadrature,
        outcome_a: f64,
        outcome_b: f64,
    ) -> Result<Self> {
        if !outcome_a.is_finite() || !outcome_b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "outcomes must be finite, got ({outcome_a}, {outcome_b})"
            )));
        }
        Ok(SampleRecord { setting_a, setting_b, outcome_a, outcome_b })
    }
}

/// How raw outcomes are binned into a joint probability table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinningPolicy {
    /// Bins per axis.
    pub bins: usize,
    /// Half-width of the binned range in per-axis standard deviations.
    pub span_sigmas: f64,
    /// Apply a per-bin n/(n-1) correction to conditional variances.
    pub bessel: bool,
}

impl Default for BinningPolicy {
    fn default() -> Self {
        // [mean - 5 sd, mean + 5 sd] captures >99.99994% of Gaussian mass;
        // outliers are clamped into the edge bins so normalization is exact.
        BinningPolicy { bins: 100, span_sigmas: 5.0, bessel: false }
    }
}

impl BinningPolicy {
    pub fn with_bins(bins: usize) -> Self {
        BinningPolicy { bins, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.bins < 1 {
            return Err(Error::InvalidParameter("binning policy needs at least 1 bin".into()));
        }
        if !(self.span_sigmas > 0.0) || !self.span_sigmas.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "span_sigmas must be positive and finite, got {}",
                self.span_sigmas
            )));
        }
        Ok(())
    }
}

/// Conditional statistics of the B outcome within one nonempty A bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoment {
    /// Marginal probability of the A bin.
    pub weight: f64,
    /// Conditional mean of B (bin centers).
    pub mean_b: f64,
    /// Conditional variance of B (bin centers).
    pub var_b: f64,
}

/// Inference statistics for one setting pair: the average conditional
/// variance and the absolute-deviation cross term of the delta-inflated
/// variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceStats {
    /// Average conditional variance of B given A, quadrature units squared.
    pub var_inf: f64,
    /// Sum over the joint table of P(a,b)|b - <B|a>|, quadrature units.
    pub abs_dev: f64,
    /// Number of raw samples behind the statistics (0 for analytic origin).
    pub n_effective: u64,
}

impl InferenceStats {
    pub fn new(var_inf: f64, abs_dev: f64, n_effective: u64) -> Result<Self> {
        if !(var_inf >= 0.0) || !(abs_dev >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inference stats must be nonnegative, got var_inf={var_inf}, abs_dev={abs_dev}"
            )));
        }
        // Cauchy-Schwarz on the conditional mixture; allow numerical slack.
        if abs_dev * abs_dev > var_inf * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "abs_dev^2 = {} exceeds var_inf = {}",
                abs_dev * abs_dev,
                var_inf
            )));
        }
        Ok(InferenceStats { var_inf, abs_dev, n_effective })
    }
}

/// Normalized joint probability table over one setting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    /// K_A + 1 strictly increasing bin edges for the A axis.
    pub edges_a: Vec<f64>,
    /// K_B + 1 strictly increasing bin edges for the B axis.
    pub edges_b: Vec<f64>,
    /// Row-major K_A x K_B probability table.
    prob: Vec<f64>,
    /// Raw sample count (0 for a discretized analytic density).
    pub n_samples: u64,
    bessel: bool,
}

impl JointDistribution {
    /// Build directly from a probability table; normalizes and validates.
    pub fn from_table(
        edges_a: Vec<f64>,
        edges_b: Vec<f64>,
        table: Vec<f64>,
        n_samples: u64,
    ) -> Result<Self> {
        let ka = edges_a.len().saturating_sub(1);
        let kb = edges_b.len().saturating_sub(1);
        if ka == 0 || kb == 0 || table.len() != ka * kb {
            return Err(Error::InvalidParameter(format!(
                "table shape {} does not match edges ({ka} x {kb})",
                table.len()
            )));
        }
        for edges in [&edges_a, &edges_b] {
            if edges.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidParameter("bin edges must be strictly increasing".into()));
            }
        }
        if table.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = table.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("probability table sums to zero".into()));
        }
        let prob = table.into_iter().map(|p| p / total).collect();
        Ok(JointDistribution { edges_a, edges_b, prob, n_samples, bessel: false })
    }

    /// Histogram the records matching `settings` into a normalized table.
    pub fn build_joint(
        records: &[SampleRecord],
        settings: (Quadrature, Quadrature),
        binning: BinningPolicy,
    ) -> Result<Self> {
        binning.validate()?;
        let matching: Vec<&SampleRecord> = records
            .iter()
            .filter(|r| r.setting_a == settings.0 && r.setting_b == settings.1)
            .collect();
        if matching.len() < 2 {
            return Err(Error::NoMatchingRecords { found: matching.len() });
        }

        let edges_a = axis_edges(matching.iter().map(|r| r.outcome_a), &binning, 'A')?;
        let edges_b = axis_edges(matching.iter().map(|r| r.outcome_b), &binning, 'B')?;

        let k = binning.bins;
        let mut counts = vec![0.0f64; k * k];
        for r in &matching {
            let ia = clamp_bin(r.outcome_a, &edges_a);
            let ib = clamp_bin(r.outcome_b, &edges_b);
            counts[ia * k + ib] += 1.0;
        }
        let n = matching.len() as f64;
        for c in &mut counts {
            *c /= n;
        }
        Ok(JointDistribution {
            edges_a,
            edges_b,
            prob: counts,
            n_samples: matching.len() as u64,
            bessel: binning.bessel,
        })
    }

    /// Discretize a centered bivariate normal with the given second moments
    /// onto a `bins` x `bins` table spanning `span_sigmas` standard
    /// deviations per axis. Each cell integrates the density over its
    /// rectangle (fixed subgrid quadrature), so the result is the
    /// infinite-sample limit of the empirical histogram.
    pub fn from_gaussian_moments(
        var_a: f64,
        var_b: f64,
        cov_ab: f64,
        bins: usize,
        span_sigmas: f64,
    ) -> Result<Self> {
        if !(var_a > 0.0) || !(var_b > 0.0) {
            return Err(Error::InvalidParameter("marginal variances must be positive".into()));
        }
        let det = var_a * var_b - cov_ab * cov_ab;
        if det <= 0.0 {
            return Err(Error::InvalidParameter("covariance block is singular".into()));
        }
        let sa = var_a.sqrt();
        let sb = var_b.sqrt();
        let edges_a = linspace(-span_sigmas * sa, span_sigmas * sa, bins + 1);
        let edges_b = linspace(-span_sigmas * sb, span_sigmas * sb, bins + 1);
        let inv_det = 1.0 / det;
        let density = |x: f64, y: f64| {
            let q = inv_det * (var_b * x * x - 2.0 * cov_ab * x * y + var_a * y * y);
            (-0.5 * q).exp()
        };
        const SUB: usize = 8;
        let ha = (edges_a[1] - edges_a[0]) / SUB as f64;
        let hb = (edges_b[1] - edges_b[0]) / SUB as f64;
        let mut table = Vec::with_capacity(bins * bins);
        for ia in 0..bins {
            for ib in 0..bins {
                let mut mass = 0.0;
                for sx in 0..SUB {
                    let x = edges_a[ia] + (sx as f64 + 0.5) * ha;
                    for sy in 0..SUB {
                        let y = edges_b[ib] + (sy as f64 + 0.5) * hb;
                        mass += density(x, y);
                    }
                }
                table.push(mass);
            }
        }
        JointDistribution::from_table(edges_a, edges_b, table, 0)
    }

    pub fn bins_a(&self) -> usize {
        self.edges_a.len() - 1
    }

    pub fn bins_b(&self) -> usize {
        self.edges_b.len() - 1
    }

    pub fn prob(&self, ia: usize, ib: usize) -> f64 {
        self.prob[ia * self.bins_b() + ib]
    }

    pub fn centers_a(&self) -> Vec<f64> {
        centers(&self.edges_a)
    }

    pub fn centers_b(&self) -> Vec<f64> {
        centers(&self.edges_b)
    }

    pub fn marginal_a(&self) -> Vec<f64> {
        let kb = self.bins_b();
        (0..self.bins_a())
            .map(|ia| self.prob[ia * kb..(ia + 1) * kb].iter().sum())
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.prob.iter().sum()
    }

    /// Mean and variance of the B marginal (bin centers).
    pub fn marginal_b_moments(&self) -> (f64, f64) {
        let cb = self.centers_b();
        let kb = self.bins_b();
        let mut mean = 0.0;
        let mut second = 0.0;
        for ia in 0..self.bins_a() {
            for ib in 0..kb {
                let p = self.prob[ia * kb + ib];
                mean += p * cb[ib];
                second += p * cb[ib] * cb[ib];
            }
        }
        (mean, second - mean * mean)
    }

    /// Conditional weight/mean/variance of B for each nonempty A bin.
    pub fn conditional_moments(&self) -> Vec<ConditionalMoment> {
        let cb = self.centers_b();
        let kb = self.bins_b();
        let mut out = Vec::new();
        for ia in 0..self.bins_a() {
            let row = &self.prob[ia * kb..(ia + 1) * kb];
            let weight: f64 = row.iter().sum();
            if weight <= 0.0 {
                continue; // conditional stats undefined on zero-probability events
            }
            let mean_b: f64 = row.iter().zip(&cb).map(|(p, c)| p * c).sum::<f64>() / weight;
            let mut var_b: f64 = row
                .iter()
                .zip(&cb)
                .map(|(p, c)| p * (c - mean_b) * (c - mean_b))
                .sum::<f64>()
                / weight;
            if self.bessel && self.n_samples > 0 {
                let n_bin = weight * self.n_samples as f64;
                if n_bin > 1.0 {
                    var_b *= n_bin / (n_bin - 1.0);
                }
            }
            out.push(ConditionalMoment { weight, mean_b, var_b });
        }
        out
    }

    /// The inference variance and absolute-deviation cross term.
    pub fn inference_stats(&self) -> InferenceStats {
        let cb = self.centers_b();
        let kb = self.bins_b();
        let mut var_inf = 0.0;
        let mut abs_dev = 0.0;
        for ia in 0..self.bins_a() {
            let row = &self.prob[ia * kb..(ia + 1) * kb];
            let weight: f64 = row.iter().sum();
            if weight <= 0.0 {
                continue;
            }
            let mean_b: f64 = row.iter().zip(&cb).map(|(p, c)| p * c).sum::<f64>() / weight;
            let mut var_b: f64 = row
                .iter()
                .zip(&cb)
                .map(|(p, c)| p * (c - mean_b) * (c - mean_b))
                .sum::<f64>()
                / weight;
            if self.bessel && self.n_samples > 0 {
                let n_bin = weight * self.n_samples as f64;
                if n_bin > 1.0 {
                    var_b *= n_bin / (n_bin - 1.0);
                }
            }
            var_inf += weight * var_b;
            abs_dev += row.iter().zip(&cb).map(|(p, c)| p * (c - mean_b).abs()).sum::<f64>();
        }
        InferenceStats { var_inf, abs_dev, n_effective: self.n_samples }
    }
}

/// The delta-inflated inference variance:
/// var_inf + delta^2 + 2 delta * abs_dev.
pub fn delta_inflated_variance(s: &InferenceStats, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::NegativeDelta(delta));
    }
    Ok(s.var_inf + delta * delta + 2.0 * delta * s.abs_dev)
}

fn axis_edges(
    outcomes: impl Iterator<Item = f64> + Clone,
    binning: &BinningPolicy,
    axis: char,
) -> Result<Vec<f64>> {
    let mut n = 0usize;
    let mut mean = 0.0;
    for v in outcomes.clone() {
        mean += v;
        n += 1;
    }
    mean /= n as f64;
    let var: f64 = outcomes.clone().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        let value = outcomes.clone().next().unwrap_or(f64::NAN);
        return Err(Error::DegenerateRange { axis, value });
    }
    let half = binning.span_sigmas * sd;
    Ok(linspace(mean - half, mean + half, binning.bins + 1))
}

fn clamp_bin(v: f64, edges: &[f64]) -> usize {
    let k = edges.len() - 1;
    let lo = edges[0];
    let hi = edges[k];
    if v <= lo {
        return 0;
    }
    if v >= hi {
        return k - 1;
    }
    let idx = ((v - lo) / (hi - lo) * k as f64) as usize;
    idx.min(k - 1)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

fn centers(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}
