//! Diagnostics: the control-variate correction `delta`, the bound on its
//! relative size, replicate-based estimator variances and the variance
//! comparison condition between Reinforce and VarGrad.

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::estimators::{build_batch, EstimatorKind, GradientEstimate};
use crate::families::{
    enumerate_support, gaussian_score_kurtosis_exact, DiagGaussianParams, MeanFieldBernoulliParams, VariationalFamily,
};
use crate::gaussian_oracles::{delta_cv_analytic, sup_ratio_closed_form, CoordinateConvention};
use crate::losses::kl_gaussian_closed_form;
use crate::rng::RngStream;
use crate::stats::{
    jackknife_of_means, mean, mean_standard_error, sample_variance, variance_difference_jackknife_se,
    variance_jackknife_se,
};
use crate::targets::{DiscreteToyModel, GaussianTarget, Target};

/// Monte Carlo estimate of `delta_i = Cov(f, s_i^2) / Var(s_i)` and of
/// `delta_i / E[f]`; `E[f]` is the expected VarGrad coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaReport {
    /// `None` where the score coordinate has zero sample variance.
    pub delta_cv: Vec<Option<f64>>,
    pub delta_cv_se: Vec<f64>,
    pub a_vargrad_expectation: f64,
    pub a_vargrad_se: f64,
    /// `None` where `delta` is undefined or `E[f]` is zero.
    pub ratio: Vec<Option<f64>>,
    pub ratio_se: Vec<f64>,
    pub n_samples: usize,
}

/// Default draw count for [`delta_cv_mc`].
pub const DEFAULT_DELTA_SAMPLES: usize = 2000;

pub fn delta_cv_mc<F, T>(q: &F, target: &T, rng: &mut RngStream, n: usize) -> Result<DeltaReport>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 draws".into()));
    }
    let batch = build_batch(q, target, rng, n)?;
    let f = batch.f_values();
    let a = mean(f);
    let a_se = mean_standard_error(f);
    let p = batch.num_params();

    let mut delta_cv = Vec::with_capacity(p);
    let mut delta_cv_se = Vec::with_capacity(p);
    let mut ratio = Vec::with_capacity(p);
    let mut ratio_se = Vec::with_capacity(p);
    let mut rows = Vec::with_capacity(4 * n);
    for i in 0..p {
        rows.clear();
        for (r, fv) in f.iter().enumerate() {
            let s = batch.score(r)[i];
            rows.extend_from_slice(&[*fv, s, s * s, fv * s * s]);
        }
        // moments: [E f, E s, E s^2, E f s^2]; the n/(n-1) factors cancel in the ratio
        let delta = |m: &[f64]| {
            let var = m[2] - m[1] * m[1];
            if var > 1e-10 * m[2] {
                (m[3] - m[0] * m[2]) / var
            } else {
                f64::NAN
            }
        };
        let (d, d_se) = jackknife_of_means(&rows, 4, delta);
        if d.is_finite() {
            delta_cv.push(Some(d));
            delta_cv_se.push(d_se);
            let (r, r_se) = jackknife_of_means(&rows, 4, |m| delta(m) / m[0]);
            if r.is_finite() {
                ratio.push(Some(r));
                ratio_se.push(r_se);
            } else {
                ratio.push(None);
                ratio_se.push(f64::NAN);
            }
        } else {
            delta_cv.push(None);
            delta_cv_se.push(f64::NAN);
            ratio.push(None);
            ratio_se.push(f64::NAN);
        }
    }
    Ok(DeltaReport {
        delta_cv,
        delta_cv_se,
        a_vargrad_expectation: a,
        a_vargrad_se: a_se,
        ratio,
        ratio_se,
        n_samples: n,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundStatus {
    Finite,
    /// `KL = 0` while `log p(x) != 0`.
    Infinite,
    /// `KL = log p(x)`: the denominator vanishes.
    Undefined,
}

/// Upper bound `2 sqrt(C Kurt_i) / |sqrt(KL) - log p(x) / sqrt(KL)|` on `|delta_i / E[f]|`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub bound_rhs: Vec<f64>,
    pub kl_value: f64,
    pub log_evidence: f64,
    pub c: f64,
    pub kurtosis: Vec<f64>,
    pub status: BoundStatus,
}

/// Bound for diagonal Gaussians. `c` bounds `sup_z q(z) / p(z|x)`; when omitted it is
/// computed in closed form, which requires `sigma2_k < sigma2_tilde_k` for every `k`.
pub fn prop2_bound(q: &DiagGaussianParams, target: &GaussianTarget, c: Option<f64>) -> Result<BoundReport> {
    check_len(q.dim(), target.dim())?;
    let c = match c {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(v) => {
            return Err(Error::InvalidArgument(format!(
                "C must be positive and finite, got {v}"
            )))
        }
        None => sup_ratio_closed_form(q, target)?.ok_or_else(|| {
            Error::InvalidArgument(
                "sup q/p is infinite unless sigma2 < sigma2_tilde in every coordinate; supply C".into(),
            )
        })?,
    };
    let kl = kl_gaussian_closed_form(q, target)?;
    let log_evidence = target.log_evidence().unwrap_or(0.0);
    let kurtosis = gaussian_score_kurtosis_exact(q);
    let (status, bound_rhs) = if kl == log_evidence {
        (BoundStatus::Undefined, vec![f64::NAN; kurtosis.len()])
    } else if kl == 0.0 {
        (BoundStatus::Infinite, vec![f64::INFINITY; kurtosis.len()])
    } else {
        let denom = (kl.sqrt() - log_evidence / kl.sqrt()).abs();
        (
            BoundStatus::Finite,
            kurtosis.iter().map(|k| 2.0 * (c * k).sqrt() / denom).collect(),
        )
    };
    Ok(BoundReport {
        bound_rhs,
        kl_value: kl,
        log_evidence,
        c,
        kurtosis,
        status,
    })
}

/// Per-coordinate summary of `R` replicate estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceReport {
    pub label: String,
    pub variance: Vec<f64>,
    pub variance_se: Vec<f64>,
    pub mean: Vec<f64>,
    pub mean_se: Vec<f64>,
    pub replicates: usize,
    pub samples: usize,
}

/// Replicate estimates of several estimators on common random numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateSet {
    pub labels: Vec<String>,
    /// `values[k]` is the row-major `R x P` matrix for estimator `k`.
    pub values: Vec<Vec<f64>>,
    pub replicates: usize,
    pub params: usize,
    pub samples: usize,
}

impl ReplicateSet {
    pub fn column(&self, k: usize, i: usize) -> Vec<f64> {
        self.values[k].iter().skip(i).step_by(self.params).copied().collect()
    }

    pub fn report(&self, k: usize) -> VarianceReport {
        let mut out = VarianceReport {
            label: self.labels[k].clone(),
            variance: Vec::with_capacity(self.params),
            variance_se: Vec::with_capacity(self.params),
            mean: Vec::with_capacity(self.params),
            mean_se: Vec::with_capacity(self.params),
            replicates: self.replicates,
            samples: self.samples,
        };
        for i in 0..self.params {
            let col = self.column(k, i);
            out.variance.push(sample_variance(&col));
            out.variance_se.push(variance_jackknife_se(&col));
            out.mean.push(mean(&col));
            out.mean_se.push(mean_standard_error(&col));
        }
        out
    }

    /// `Var(a) - Var(b)` on coordinate `i` with its paired jackknife standard error.
    pub fn variance_difference(&self, a: usize, b: usize, i: usize) -> (f64, f64) {
        let (x, y) = (self.column(a, i), self.column(b, i));
        (
            sample_variance(&x) - sample_variance(&y),
            variance_difference_jackknife_se(&x, &y),
        )
    }
}

/// Run `r` replicates; replicate `j` draws its batch of `s` samples from
/// `rng.substream(j)` and every estimator in `kinds` is evaluated on it.
/// Replicates run in parallel and are collected in index order.
pub fn replicate_estimators<F, T>(
    kinds: &[EstimatorKind],
    q: &F,
    target: &T,
    rng: &RngStream,
    s: usize,
    r: usize,
) -> Result<ReplicateSet>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    if r < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    let p = q.num_params();
    let per_rep: Vec<Vec<GradientEstimate>> = (0..r as u64)
        .into_par_iter()
        .map(|j| {
            let mut stream = rng.substream(j);
            let batch = build_batch(q, target, &mut stream, s)?;
            kinds.iter().map(|k| k.estimate(&batch, q, target, &stream)).collect()
        })
        .collect::<Result<_>>()?;
    let mut values = vec![Vec::with_capacity(r * p); kinds.len()];
    for rep in &per_rep {
        for (v, est) in values.iter_mut().zip(rep) {
            v.extend_from_slice(&est.grad);
        }
    }
    Ok(ReplicateSet {
        labels: kinds.iter().map(|k| k.label().to_string()).collect(),
        values,
        replicates: r,
        params: p,
        samples: s,
    })
}

pub fn estimator_variance<F, T>(
    kind: &EstimatorKind,
    q: &F,
    target: &T,
    rng: &RngStream,
    s: usize,
    r: usize,
) -> Result<VarianceReport>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    Ok(replicate_estimators(std::slice::from_ref(kind), q, target, rng, s, r)?.report(0))
}

/// Exact `delta_i` per parameter and `E_q[f]`.
pub trait PopulationMoments<F> {
    fn population_delta(&self, q: &F) -> Result<(Vec<Option<f64>>, f64)>;
}

impl PopulationMoments<DiagGaussianParams> for GaussianTarget {
    fn population_delta(&self, q: &DiagGaussianParams) -> Result<(Vec<Option<f64>>, f64)> {
        let d = q.dim();
        let mut delta = Vec::with_capacity(2 * d);
        for conv in [CoordinateConvention::Mean, CoordinateConvention::LogStd] {
            for k in 0..d {
                delta.push(Some(delta_cv_analytic(q, self, conv, k)?));
            }
        }
        let ef = kl_gaussian_closed_form(q, self)? - self.log_evidence().unwrap_or(0.0);
        Ok((delta, ef))
    }
}

impl PopulationMoments<MeanFieldBernoulliParams> for DiscreteToyModel {
    fn population_delta(&self, q: &MeanFieldBernoulliParams) -> Result<(Vec<Option<f64>>, f64)> {
        check_len(self.dim(), q.dim())?;
        let p = q.num_params();
        let (mut ef, mut es, mut es2, mut efs2) = (0.0, vec![0.0; p], vec![0.0; p], vec![0.0; p]);
        let mut score = vec![0.0; p];
        for (z, prob) in enumerate_support(q)? {
            let f = q.log_density(&z)? - self.log_joint(&z)?;
            q.score_into(&z, &mut score)?;
            ef += prob * f;
            for i in 0..p {
                es[i] += prob * score[i];
                es2[i] += prob * score[i] * score[i];
                efs2[i] += prob * f * score[i] * score[i];
            }
        }
        let delta = (0..p)
            .map(|i| {
                let var = es2[i] - es[i] * es[i];
                (var > 0.0).then(|| (efs2[i] - ef * es2[i]) / var)
            })
            .collect();
        Ok((delta, ef))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop3Coordinate {
    /// `delta_i / ELBO` with `ELBO = -E[f]`.
    pub condition_value: Option<f64>,
    pub condition_holds: Option<bool>,
    pub var_reinforce: f64,
    pub var_vargrad: f64,
    pub diff: f64,
    pub diff_se: f64,
}

impl Prop3Coordinate {
    /// Sign of the measured `Var(Reinforce) - Var(VarGrad)`, if it is more than
    /// `z` standard errors away from zero.
    pub fn measured_winner(&self, z: f64) -> Option<&'static str> {
        if self.diff > z * self.diff_se {
            Some("vargrad")
        } else if self.diff < -z * self.diff_se {
            Some("reinforce")
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prop3Report {
    pub elbo: f64,
    pub samples: usize,
    pub replicates: usize,
    pub coordinates: Vec<Prop3Coordinate>,
}

/// Evaluate `delta_i / ELBO < ½` from population values and measure the
/// Reinforce and VarGrad variances at sample size `s`.
pub fn prop3_check<F, T>(q: &F, target: &T, s: usize, r: usize, rng: &RngStream) -> Result<Prop3Report>
where
    F: VariationalFamily,
    T: Target + PopulationMoments<F>,
{
    let (delta, ef) = target.population_delta(q)?;
    let elbo = -ef;
    let reps = replicate_estimators(
        &[EstimatorKind::Reinforce, EstimatorKind::VarGrad],
        q,
        target,
        rng,
        s,
        r,
    )?;
    let coordinates = delta
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let condition_value = d.and_then(|d| (elbo != 0.0).then(|| d / elbo));
            let (diff, diff_se) = reps.variance_difference(0, 1, i);
            Prop3Coordinate {
                condition_value,
                condition_holds: condition_value.map(|v| v < 0.5),
                var_reinforce: sample_variance(&reps.column(0, i)),
                var_vargrad: sample_variance(&reps.column(1, i)),
                diff,
                diff_se,
            }
        })
        .collect();
    Ok(Prop3Report {
        elbo,
        samples: s,
        replicates: r,
        coordinates,
    })
}

/// `E[s_i^4] / E[s_i^2]^2` from `n` draws; `None` when the second moment is zero.
pub fn kurtosis_mc<F: VariationalFamily>(q: &F, rng: &mut RngStream, n: usize) -> Result<Vec<Option<f64>>> {
    if n < 4 {
        return Err(Error::InvalidArgument("need at least 4 draws".into()));
    }
    let p = q.num_params();
    let (mut m2, mut m4) = (vec![0.0; p], vec![0.0; p]);
    let mut z = vec![0.0; q.dim()];
    let mut s = vec![0.0; p];
    for _ in 0..n {
        q.draw_into(rng, &mut z);
        q.score_into(&z, &mut s)?;
        for i in 0..p {
            let v = s[i] * s[i];
            m2[i] += v;
            m4[i] += v * v;
        }
    }
    Ok(m2
        .iter()
        .zip(&m4)
        .map(|(a, b)| (*a > 0.0).then(|| (b / n as f64) / (a / n as f64).powi(2)))
        .collect())
}
