//! Divergence estimates: log-variance, moment and χ² (variance) losses, and the
//! KL divergence in closed form or by importance sampling.

use crate::error::{check_len, Error, Result};
use crate::estimators::{build_batch, SampleBatch};
use crate::families::{DiagGaussianParams, VariationalFamily};
use crate::rng::RngStream;
use crate::stats::{logsumexp, mean, mean_standard_error, sample_variance};
use crate::targets::{GaussianTarget, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossTag {
    LogVariance,
    Moment,
    ChiSquaredVariance,
    KlClosedForm,
    KlImportanceSampled,
}

/// Tail diagnostics of the density ratios `w = p(z|x) / q(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioDiagnostics {
    /// Largest ratio seen.
    pub max_ratio: f64,
    /// `max w^2 / sum w^2`, the share of the second moment held by one draw.
    pub max_share: f64,
    /// `max_share < CHI2_MAX_SHARE`. Meaningful for large batches only.
    pub converged: bool,
}

/// Threshold on [`RatioDiagnostics::max_share`].
pub const CHI2_MAX_SHARE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct LossEstimate {
    pub value: f64,
    pub samples: usize,
    pub tag: LossTag,
    pub diagnostics: Option<RatioDiagnostics>,
}

/// `½ Var_S(f)` with the `1/(S-1)` convention.
pub fn log_variance_loss(batch: &SampleBatch) -> Result<LossEstimate> {
    if batch.len() < 2 {
        return Err(Error::InvalidArgument(
            "the empirical variance needs at least 2 samples".into(),
        ));
    }
    Ok(LossEstimate {
        value: 0.5 * sample_variance(batch.f_values()),
        samples: batch.len(),
        tag: LossTag::LogVariance,
        diagnostics: None,
    })
}

/// `½ mean((f + log p(x))^2)`, i.e. against the normalised posterior when
/// `log_evidence` is given, else against `log p(x, z)` itself.
pub fn moment_loss(batch: &SampleBatch, log_evidence: Option<f64>) -> LossEstimate {
    let c = log_evidence.unwrap_or(0.0);
    let value = 0.5 * batch.f_values().iter().map(|f| (f + c).powi(2)).sum::<f64>() / batch.len() as f64;
    LossEstimate {
        value,
        samples: batch.len(),
        tag: LossTag::Moment,
        diagnostics: None,
    }
}

/// `½ Var_S(p(z|x) / q(z))` under `z ~ q`; needs a target with known evidence.
pub fn chi2_variance_loss<F, T>(q: &F, target: &T, rng: &mut RngStream, s: usize) -> Result<LossEstimate>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    let log_evidence = target
        .log_evidence()
        .ok_or_else(|| Error::Unsupported("the χ² loss needs a normalised posterior".into()))?;
    if s < 2 {
        return Err(Error::InvalidArgument(
            "the empirical variance needs at least 2 samples".into(),
        ));
    }
    let batch = build_batch(q, target, rng, s)?;
    let w: Vec<f64> = batch.f_values().iter().map(|f| (-f - log_evidence).exp()).collect();
    let max_ratio = w.iter().copied().fold(0.0, f64::max);
    let sum_sq: f64 = w.iter().map(|v| v * v).sum();
    let max_share = if sum_sq > 0.0 {
        max_ratio * max_ratio / sum_sq
    } else {
        0.0
    };
    Ok(LossEstimate {
        value: 0.5 * sample_variance(&w),
        samples: s,
        tag: LossTag::ChiSquaredVariance,
        diagnostics: Some(RatioDiagnostics {
            max_ratio,
            max_share,
            converged: max_share < CHI2_MAX_SHARE,
        }),
    })
}

/// Population `½ (E_q[(p/q)^2] - 1)` for diagonal Gaussians; `None` when infinite,
/// which happens as soon as `2/σ̃² - 1/σ² <= 0` in some coordinate.
pub fn chi2_gaussian_closed_form(q: &DiagGaussianParams, target: &GaussianTarget) -> Result<Option<f64>> {
    check_len(q.dim(), target.dim())?;
    let mut log_m2 = 0.0;
    for k in 0..q.dim() {
        let (mu, s2) = (q.mean()[k], q.var(k));
        let (mt, t2) = (target.post_mean()[k], target.post_var()[k]);
        let a = 2.0 / t2 - 1.0 / s2;
        if a <= 0.0 {
            return Ok(None);
        }
        let b = 2.0 * mt / t2 - mu / s2;
        let c = 2.0 * mt * mt / t2 - mu * mu / s2;
        log_m2 += 0.5 * s2.ln() - t2.ln() - 0.5 * a.ln() + 0.5 * (b * b / a - c);
    }
    Ok(Some(0.5 * (log_m2.exp() - 1.0)))
}

/// `KL(q || p)` for diagonal Gaussians.
pub fn kl_gaussian_closed_form(q: &DiagGaussianParams, target: &GaussianTarget) -> Result<f64> {
    check_len(q.dim(), target.dim())?;
    Ok((0..q.dim())
        .map(|k| {
            let (s2, t2) = (q.var(k), target.post_var()[k]);
            let dm = q.mean()[k] - target.post_mean()[k];
            0.5 * (t2 / s2).ln() + (s2 + dm * dm) / (2.0 * t2) - 0.5
        })
        .sum())
}

/// Exact gradient of [`kl_gaussian_closed_form`] in the `(mean, log_std)` layout.
pub fn kl_gaussian_gradient(q: &DiagGaussianParams, target: &GaussianTarget) -> Result<Vec<f64>> {
    check_len(q.dim(), target.dim())?;
    let d = q.dim();
    let mut g = vec![0.0; 2 * d];
    for k in 0..d {
        let t2 = target.post_var()[k];
        g[k] = (q.mean()[k] - target.post_mean()[k]) / t2;
        g[d + k] = q.var(k) / t2 - 1.0;
    }
    Ok(g)
}

pub const DEFAULT_N_IS: usize = 10_000;
pub const DEFAULT_N_ELBO: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlImportanceEstimate {
    pub kl: f64,
    pub kl_se: f64,
    pub log_evidence: f64,
    pub log_evidence_se: f64,
    pub elbo: f64,
    pub elbo_se: f64,
}

impl KlImportanceEstimate {
    pub fn as_loss(&self, samples: usize) -> LossEstimate {
        LossEstimate {
            value: self.kl,
            samples,
            tag: LossTag::KlImportanceSampled,
            diagnostics: None,
        }
    }
}

/// `KL = log p̂(x) - ELBÔ`, with `log p̂(x)` from `n_is` importance draws from `q`
/// and the ELBO from `n_elbo` further draws.
pub fn kl_via_importance_sampling<F, T>(
    q: &F,
    target: &T,
    rng: &mut RngStream,
    n_is: usize,
    n_elbo: usize,
) -> Result<KlImportanceEstimate>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    if n_is < 2 || n_elbo < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 importance and 2 ELBO samples".into(),
        ));
    }
    check_len(q.dim(), target.dim())?;
    let d = q.dim();
    let mut z = vec![0.0; d];
    let mut log_w = Vec::with_capacity(n_is);
    for _ in 0..n_is {
        q.draw_into(rng, &mut z);
        log_w.push(target.log_joint(&z)? - q.log_density(&z)?);
    }
    let lse = logsumexp(&log_w);
    if lse == f64::NEG_INFINITY {
        return Err(Error::NonFinite("all importance weights are zero".into()));
    }
    if !lse.is_finite() {
        return Err(Error::NonFinite("importance weights overflow".into()));
    }
    let log_evidence = lse - (n_is as f64).ln();
    // delta method: se(log Z) = sd(w / mean w) / sqrt(n)
    let normalised: Vec<f64> = log_w.iter().map(|l| (l - log_evidence).exp()).collect();
    let log_evidence_se = mean_standard_error(&normalised);

    let mut f = Vec::with_capacity(n_elbo);
    for _ in 0..n_elbo {
        q.draw_into(rng, &mut z);
        f.push(q.log_density(&z)? - target.log_joint(&z)?);
    }
    let elbo = -mean(&f);
    let elbo_se = mean_standard_error(&f);
    Ok(KlImportanceEstimate {
        kl: log_evidence - elbo,
        kl_se: (log_evidence_se.powi(2) + elbo_se.powi(2)).sqrt(),
        log_evidence,
        log_evidence_se,
        elbo,
        elbo_se,
    })
}
