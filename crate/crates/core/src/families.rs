//! Closed-form variational families.
//!
//! Two families are provided: a diagonal Gaussian parameterised by mean and
//! log standard deviation, and a mean-field Bernoulli parameterised by logits.
//! Each exposes sampling, the log-density and its score `d/dphi log q_phi(z)`
//! in closed form. Parameter vectors have a fixed layout so individual gradient
//! coordinates can be addressed:
//!
//! * Gaussian: `[mean_0 .. mean_{D-1}, log_std_0 .. log_std_{D-1}]`
//! * Bernoulli: `[logit_0 .. logit_{D-1}]`

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::stats::{sigmoid, softplus};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Bernoulli probabilities are kept inside `[EPS, 1 - EPS]`.
pub const BERNOULLI_EPS: f64 = 1e-7;

/// Largest logit magnitude, `ln((1 - EPS) / EPS)`.
pub fn bernoulli_logit_limit() -> f64 {
    ((1.0 - BERNOULLI_EPS) / BERNOULLI_EPS).ln()
}

/// Above this many binary coordinates `enumerate_support` refuses to run.
pub const MAX_ENUMERATION_DIM: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    DiagGaussian,
    MeanFieldBernoulli,
}

/// One draw `z ~ q_phi`. Bernoulli draws are stored as 0.0 / 1.0.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentSample {
    pub z: Vec<f64>,
    pub family: FamilyTag,
}

/// A variational family with closed-form density and score.
pub trait VariationalFamily: Clone + Send + Sync {
    fn tag(&self) -> FamilyTag;

    /// Latent dimensionality `D`.
    fn dim(&self) -> usize;

    /// Number of parameters `P`.
    fn num_params(&self) -> usize;

    /// Parameters flattened in the documented order.
    fn params_vector(&self) -> Vec<f64>;

    /// A copy of this family with parameters replaced by `params`.
    fn with_params(&self, params: &[f64]) -> Result<Self>;

    /// Draw one latent vector into `z` (length `D`).
    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64]);

    fn log_density(&self, z: &[f64]) -> Result<f64>;

    /// Write `d/dphi log q_phi(z)` into `out` (length `P`).
    fn score_into(&self, z: &[f64], out: &mut [f64]) -> Result<()>;

    /// `n` independent draws; fails for `n == 0`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<LatentSample>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        Ok((0..n)
            .map(|_| {
                let mut z = vec![0.0; self.dim()];
                self.draw_into(rng, &mut z);
                LatentSample { z, family: self.tag() }
            })
            .collect())
    }

    fn score(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_params()];
        self.score_into(z, &mut out)?;
        Ok(out)
    }
}

/// Diagonal Gaussian `N(mean, diag(exp(log_std)^2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagGaussianParams {
    mean: Vec<f64>,
    log_std: Vec<f64>,
}

impl DiagGaussianParams {
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>) -> Result<Self> {
        check_len(mean.len(), log_std.len())?;
        if mean.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if mean.iter().chain(&log_std).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Gaussian parameters must be finite".into()));
        }
        Ok(Self { mean, log_std })
    }

    /// Build from means and variances.
    pub fn from_mean_var(mean: Vec<f64>, var: &[f64]) -> Result<Self> {
        if var.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        Self::new(mean, var.iter().map(|v| 0.5 * v.ln()).collect())
    }

    /// Concatenate two blocks into one product distribution.
    pub fn concat(&self, other: &Self) -> Self {
        let mut mean = self.mean.clone();
        mean.extend_from_slice(&other.mean);
        let mut log_std = self.log_std.clone();
        log_std.extend_from_slice(&other.log_std);
        Self { mean, log_std }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn log_std(&self) -> &[f64] {
        &self.log_std
    }

    pub fn std(&self, k: usize) -> f64 {
        self.log_std[k].exp()
    }

    pub fn var(&self, k: usize) -> f64 {
        (2.0 * self.log_std[k]).exp()
    }
}

impl VariationalFamily for DiagGaussianParams {
    fn tag(&self) -> FamilyTag {
        FamilyTag::DiagGaussian
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn num_params(&self) -> usize {
        2 * self.mean.len()
    }

    fn params_vector(&self) -> Vec<f64> {
        let mut v = self.mean.clone();
        v.extend_from_slice(&self.log_std);
        v
    }

    fn with_params(&self, params: &[f64]) -> Result<Self> {
        check_len(self.num_params(), params.len())?;
        let d = self.dim();
        Self::new(params[..d].to_vec(), params[d..].to_vec())
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64]) {
        for ((zk, m), ls) in z.iter_mut().zip(&self.mean).zip(&self.log_std) {
            let eps: f64 = rng.sample(StandardNormal);
            *zk = m + ls.exp() * eps;
        }
    }

    fn log_density(&self, z: &[f64]) -> Result<f64> {
        check_len(self.dim(), z.len())?;
        let mut acc = 0.0;
        for ((zk, m), ls) in z.iter().zip(&self.mean).zip(&self.log_std) {
            let u = (zk - m) * (-ls).exp();
            acc += -0.5 * u * u - ls - 0.5 * LN_2PI;
        }
        Ok(acc)
    }

    fn score_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim();
        check_len(d, z.len())?;
        check_len(2 * d, out.len())?;
        let (mean_block, scale_block) = out.split_at_mut(d);
        for k in 0..d {
            let inv_var = (-2.0 * self.log_std[k]).exp();
            let diff = z[k] - self.mean[k];
            mean_block[k] = diff * inv_var;
            scale_block[k] = diff * diff * inv_var - 1.0;
        }
        Ok(())
    }
}

/// Fully factorised Bernoulli over `{0,1}^D` with logits.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldBernoulliParams {
    logits: Vec<f64>,
}

impl MeanFieldBernoulliParams {
    /// Logits may be infinite; they are clamped to `+-bernoulli_logit_limit()`.
    pub fn new(logits: Vec<f64>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if logits.iter().any(|l| l.is_nan()) {
            return Err(Error::NonFinite("logit is NaN".into()));
        }
        let limit = bernoulli_logit_limit();
        Ok(Self {
            logits: logits.into_iter().map(|l| l.clamp(-limit, limit)).collect(),
        })
    }

    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("probabilities must lie in [0, 1]".into()));
        }
        Self::new(probs.iter().map(|p| (p / (1.0 - p)).ln()).collect())
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    /// `theta_k = sigmoid(logit_k)`, inside `[EPS, 1 - EPS]`.
    pub fn prob(&self, k: usize) -> f64 {
        sigmoid(self.logits[k])
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.logits.len()).map(|k| self.prob(k)).collect()
    }
}

pub(crate) fn binary_value(v: f64) -> Result<bool> {
    if v.abs() <= 1e-9 {
        Ok(false)
    } else if (v - 1.0).abs() <= 1e-9 {
        Ok(true)
    } else {
        Err(Error::OutOfSupport(format!("{v} is not a binary value")))
    }
}

impl VariationalFamily for MeanFieldBernoulliParams {
    fn tag(&self) -> FamilyTag {
        FamilyTag::MeanFieldBernoulli
    }

    fn dim(&self) -> usize {
        self.logits.len()
    }

    fn num_params(&self) -> usize {
        self.logits.len()
    }

    fn params_vector(&self) -> Vec<f64> {
        self.logits.clone()
    }

    fn with_params(&self, params: &[f64]) -> Result<Self> {
        check_len(self.num_params(), params.len())?;
        Self::new(params.to_vec())
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64]) {
        for (k, zk) in z.iter_mut().enumerate() {
            let u: f64 = rng.random();
            *zk = if u < self.prob(k) { 1.0 } else { 0.0 };
        }
    }

    fn log_density(&self, z: &[f64]) -> Result<f64> {
        check_len(self.dim(), z.len())?;
        let mut acc = 0.0;
        for (zk, l) in z.iter().zip(&self.logits) {
            // log theta = -softplus(-l), log(1 - theta) = -softplus(l)
            acc -= if binary_value(*zk)? { softplus(-l) } else { softplus(*l) };
        }
        Ok(acc)
    }

    fn score_into(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.dim(), z.len())?;
        check_len(self.dim(), out.len())?;
        for (k, (o, zk)) in out.iter_mut().zip(z).enumerate() {
            let bit = if binary_value(*zk)? { 1.0 } else { 0.0 };
            *o = bit - self.prob(k);
        }
        Ok(())
    }
}

/// All `2^D` states of a mean-field Bernoulli with their exact probabilities.
/// State `b` has `z_k = (b >> k) & 1`.
pub fn enumerate_support(params: &MeanFieldBernoulliParams) -> Result<Vec<(Vec<f64>, f64)>> {
    let d = params.dim();
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::TooLarge {
            dim: d,
            limit: MAX_ENUMERATION_DIM,
        });
    }
    let probs = params.probs();
    Ok((0..1usize << d)
        .map(|b| {
            let z: Vec<f64> = (0..d).map(|k| ((b >> k) & 1) as f64).collect();
            let p = probs
                .iter()
                .zip(&z)
                .map(|(t, zk)| if *zk == 1.0 { *t } else { 1.0 - t })
                .product();
            (z, p)
        })
        .collect())
}

/// Kurtosis of the Gaussian natural sufficient statistics, per parameter slot.
///
/// Mean slots give 3 (kurtosis of `z`). Scale slots give the kurtosis of
/// `T2 = z^2`, `3(4 mu^4 + 20 mu^2 s^2 + 5 s^4) / (2 mu^2 + s^2)^2`, which
/// peaks at 15 for `mu = 0`. Note this is the natural-parameter statistic: the
/// log-std score `(z - mu)^2 / s^2 - 1` has kurtosis 15 for every `mu`, see
/// [`gaussian_score_kurtosis_exact`].
pub fn gaussian_score_kurtosis_analytic(params: &DiagGaussianParams) -> Vec<f64> {
    let d = params.dim();
    let mut out = vec![3.0; 2 * d];
    for k in 0..d {
        let mu2 = params.mean()[k].powi(2);
        let s2 = params.var(k);
        out[d + k] = 3.0 * (4.0 * mu2 * mu2 + 20.0 * mu2 * s2 + 5.0 * s2 * s2) / (2.0 * mu2 + s2).powi(2);
    }
    out
}

/// Kurtosis `E[s^4] / E[s^2]^2` of the score coordinates in the mean / log-std
/// parameterisation: 3 for means (Gaussian) and 15 for log-stds (`eps^2 - 1`).
pub fn gaussian_score_kurtosis_exact(params: &DiagGaussianParams) -> Vec<f64> {
    let d = params.dim();
    let mut out = vec![3.0; 2 * d];
    out[d..].fill(15.0);
    out
}

/// Kurtosis of the logit score `z - theta`: `(theta^3 + (1 - theta)^3) / (theta (1 - theta))`.
pub fn bernoulli_score_kurtosis(params: &MeanFieldBernoulliParams) -> Vec<f64> {
    params
        .probs()
        .into_iter()
        .map(|t| (t.powi(3) + (1.0 - t).powi(3)) / (t * (1.0 - t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::split_stream;
    use proptest::prelude::*;

    fn gauss(mean: &[f64], log_std: &[f64]) -> DiagGaussianParams {
        DiagGaussianParams::new(mean.to_vec(), log_std.to_vec()).unwrap()
    }

    #[test]
    fn zero_samples_is_an_error() {
        let q = gauss(&[0.0], &[0.0]);
        let mut rng = split_stream(1, "t", 0);
        assert!(matches!(q.sample(&mut rng, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tiny_std_draws_sit_on_the_mean() {
        let q = gauss(&[0.3, -2.0], &[-20.0, -20.0]);
        let mut rng = split_stream(1, "t", 0);
        for s in q.sample(&mut rng, 1000).unwrap() {
            assert!((s.z[0] - 0.3).abs() < 1e-6 && (s.z[1] + 2.0).abs() < 1e-6);
        }
        assert!(DiagGaussianParams::new(vec![0.0], vec![f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn saturated_bernoulli_draws_ones() {
        let q = MeanFieldBernoulliParams::new(vec![f64::INFINITY]).unwrap();
        let mut rng = split_stream(1, "t", 0);
        let draws = q.sample(&mut rng, 10_000).unwrap();
        let ones = draws.iter().filter(|s| s.z[0] == 1.0).count() as f64 / 1e4;
        assert!(ones >= 1.0 - 10.0 * BERNOULLI_EPS);
        assert!((q.prob(0) - (1.0 - BERNOULLI_EPS)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_sample_mean_within_clt_band() {
        let q = gauss(&[1.0], &[0.0]);
        let mut rng = split_stream(3, "clt", 0);
        let n = 100_000;
        let m: f64 = q.sample(&mut rng, n).unwrap().iter().map(|s| s.z[0]).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 3.0 / (n as f64).sqrt(), "{m}");
    }

    #[test]
    fn log_density_examples() {
        let std_normal = gauss(&[0.0], &[0.0]);
        assert!((std_normal.log_density(&[0.0]).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-15);

        let half = MeanFieldBernoulliParams::from_probs(&[0.5]).unwrap();
        assert!((half.log_density(&[1.0]).unwrap() - 0.5f64.ln()).abs() < 1e-15);

        let q = DiagGaussianParams::from_mean_var(vec![1.0, 2.0], &[1.0, 4.0]).unwrap();
        let expected = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * (2.0 * std::f64::consts::PI * 4.0).ln();
        assert!((q.log_density(&[1.0, 2.0]).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn log_density_errors() {
        let q = gauss(&[0.0, 0.0], &[0.0, 0.0]);
        assert!(matches!(q.log_density(&[0.0]), Err(Error::DimensionMismatch { .. })));
        let b = MeanFieldBernoulliParams::from_probs(&[0.3]).unwrap();
        assert!(matches!(b.log_density(&[0.5]), Err(Error::OutOfSupport(_))));
        assert!(b.score(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn score_examples() {
        let q = gauss(&[0.5, -1.0], &[0.3, -0.2]);
        let s = q.score(&[0.5, -1.0]).unwrap();
        assert_eq!(s, vec![0.0, 0.0, -1.0, -1.0]);
        let b = MeanFieldBernoulliParams::from_probs(&[0.5]).unwrap();
        assert!((b.score(&[1.0]).unwrap()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn score_has_zero_mean() {
        let families: Vec<Box<dyn Fn(&mut crate::rng::RngStream) -> (Vec<f64>, Vec<f64>)>> = vec![
            Box::new(|rng| {
                let q = gauss(&[1.5, -0.5], &[0.4, -0.7]);
                let n = 100_000;
                let mut rows = Vec::new();
                let mut z = vec![0.0; 2];
                for _ in 0..n {
                    q.draw_into(rng, &mut z);
                    rows.extend(q.score(&z).unwrap());
                }
                (rows, vec![4.0])
            }),
            Box::new(|rng| {
                let q = MeanFieldBernoulliParams::from_probs(&[0.2, 0.7, 0.5]).unwrap();
                let n = 100_000;
                let mut rows = Vec::new();
                let mut z = vec![0.0; 3];
                for _ in 0..n {
                    q.draw_into(rng, &mut z);
                    rows.extend(q.score(&z).unwrap());
                }
                (rows, vec![3.0])
            }),
        ];
        for (i, f) in families.iter().enumerate() {
            let mut rng = split_stream(11, "score-mean", i as u64);
            let (rows, p) = f(&mut rng);
            let p = p[0] as usize;
            let n = rows.len() / p;
            for c in 0..p {
                let col: Vec<f64> = rows.iter().skip(c).step_by(p).copied().collect();
                let m = crate::stats::mean(&col);
                let sd = crate::stats::sample_variance(&col).sqrt();
                assert!(m.abs() < 4.0 * sd / (n as f64).sqrt(), "family {i} coord {c}: {m}");
            }
        }
    }

    #[test]
    fn enumerate_support_examples() {
        let b = MeanFieldBernoulliParams::from_probs(&[0.3]).unwrap();
        let states = enumerate_support(&b).unwrap();
        assert_eq!(states[0].0, vec![0.0]);
        assert!((states[0].1 - 0.7).abs() < 1e-12);
        assert!((states[1].1 - 0.3).abs() < 1e-12);

        let b = MeanFieldBernoulliParams::from_probs(&[0.5, 0.5]).unwrap();
        let states = enumerate_support(&b).unwrap();
        assert_eq!(states.len(), 4);
        assert!(states.iter().all(|(_, p)| (p - 0.25).abs() < 1e-15));

        let b = MeanFieldBernoulliParams::new(vec![0.0; 21]).unwrap();
        assert!(matches!(enumerate_support(&b), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn bernoulli_density_normalises_and_matches_enumeration() {
        for d in 1..=10 {
            let logits: Vec<f64> = (0..d).map(|k| (k as f64 * 0.9).sin() * 3.0).collect();
            let b = MeanFieldBernoulliParams::new(logits).unwrap();
            let states = enumerate_support(&b).unwrap();
            let total: f64 = states.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let via_density: f64 = states.iter().map(|(z, _)| b.log_density(z).unwrap().exp()).sum();
            assert!((via_density - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_density_integrates_to_one() {
        let q = gauss(&[0.7], &[-0.4]);
        let sigma = q.std(0);
        let (a, b) = (0.7 - 8.0 * sigma, 0.7 + 8.0 * sigma);
        let n = 20_000;
        let h = (b - a) / n as f64;
        // composite Simpson
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * q.log_density(&[a + i as f64 * h]).unwrap().exp();
        }
        assert!((acc * h / 3.0 - 1.0).abs() < 1e-6);
    }

    fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], step: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut hi = x.to_vec();
                let mut lo = x.to_vec();
                hi[i] += step;
                lo[i] -= step;
                (f(&hi) - f(&lo)) / (2.0 * step)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn gaussian_score_matches_finite_differences(
            mean in prop::collection::vec(-3.0f64..3.0, 3),
            log_std in prop::collection::vec(-1.0f64..1.0, 3),
            eps in prop::collection::vec(-2.5f64..2.5, 3),
        ) {
            let q = gauss(&mean, &log_std);
            let z: Vec<f64> = (0..3).map(|k| mean[k] + log_std[k].exp() * eps[k]).collect();
            let fd = central_difference(
                |p| q.with_params(p).unwrap().log_density(&z).unwrap(),
                &q.params_vector(),
                1e-5,
            );
            let score = q.score(&z).unwrap();
            for (a, b) in score.iter().zip(&fd) {
                prop_assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0), "{a} vs {b}");
            }
        }

        #[test]
        fn bernoulli_score_matches_finite_differences(
            logits in prop::collection::vec(-6.0f64..6.0, 4),
            bits in prop::collection::vec(0u8..2, 4),
        ) {
            let q = MeanFieldBernoulliParams::new(logits).unwrap();
            let z: Vec<f64> = bits.iter().map(|b| *b as f64).collect();
            let fd = central_difference(
                |p| q.with_params(p).unwrap().log_density(&z).unwrap(),
                &q.params_vector(),
                1e-5,
            );
            let score = q.score(&z).unwrap();
            for (a, b) in score.iter().zip(&fd) {
                prop_assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn natural_statistic_kurtosis_values() {
        let k = gaussian_score_kurtosis_analytic(&gauss(&[0.0, 1.0, -2.0], &[0.3, 0.0, -0.5]));
        assert_eq!(&k[..3], &[3.0, 3.0, 3.0]);
        assert!((k[3] - 15.0).abs() < 1e-12);
        assert!((k[4] - 87.0 / 9.0).abs() < 1e-12);
        assert!(k[5] < 15.0);
        assert!(
            (bernoulli_score_kurtosis(&MeanFieldBernoulliParams::from_probs(&[0.5]).unwrap())[0] - 1.0).abs() < 1e-12
        );
    }

    fn mc_kurtosis(values: &[f64]) -> f64 {
        let m2 = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
        let m4 = values.iter().map(|v| v.powi(4)).sum::<f64>() / values.len() as f64;
        m4 / (m2 * m2)
    }

    #[test]
    fn natural_statistic_kurtosis_matches_monte_carlo() {
        // kurtosis of z^2 - m2 at mu = 1, sigma = 1 should be 87/9
        let q = gauss(&[1.0], &[0.0]);
        let mut rng = split_stream(5, "t2-kurtosis", 0);
        let m2 = 2.0;
        let mut z = [0.0];
        let centred: Vec<f64> = (0..1_000_000)
            .map(|_| {
                q.draw_into(&mut rng, &mut z);
                z[0] * z[0] - m2
            })
            .collect();
        let k = mc_kurtosis(&centred);
        let analytic = gaussian_score_kurtosis_analytic(&q)[1];
        assert!((k / analytic - 1.0).abs() < 0.05, "{k} vs {analytic}");
    }

    #[test]
    fn log_std_score_kurtosis_is_fifteen_for_any_mean() {
        for (mean, idx) in [(0.0, 0u64), (2.0, 1)] {
            let q = gauss(&[mean], &[0.4]);
            let mut rng = split_stream(6, "ls-kurtosis", idx);
            let mut z = [0.0];
            let mut s = [0.0; 2];
            let scores: Vec<f64> = (0..1_000_000)
                .map(|_| {
                    q.draw_into(&mut rng, &mut z);
                    q.score_into(&z, &mut s).unwrap();
                    s[1]
                })
                .collect();
            let k = mc_kurtosis(&scores);
            assert!((k / 15.0 - 1.0).abs() < 0.05, "mean {mean}: {k}");
            assert_eq!(gaussian_score_kurtosis_exact(&q)[1], 15.0);
        }
    }
}
