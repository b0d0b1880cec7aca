//! Closed-form ground truth for Gaussian `q` and Gaussian posterior.
//!
//! Formulas are in variance coordinates: for one dimension, `q = N(mu, sigma2)`
//! and `p(z|x) = N(mu_tilde, sigma2_tilde)`, with `dmu = mu - mu_tilde` and
//! `dsigma2 = sigma2 - sigma2_tilde`.
//!
//! Score variances used below, with `e = (z - mu) / sigma ~ N(0, 1)`:
//!
//! | coordinate | score | variance |
//! |---|---|---|
//! | mean | `e / sigma` | `1 / sigma2` |
//! | `sigma2` | `(e^2 - 1) / (2 sigma2)` | `1 / (2 sigma2^2)` |
//! | `log sigma2` | `(e^2 - 1) / 2` | `1/2` |
//! | `log sigma` | `e^2 - 1` | `2` |

use crate::error::{check_len, Error, Result};
use crate::families::{DiagGaussianParams, VariationalFamily};
use crate::losses::kl_gaussian_closed_form;
use crate::targets::{GaussianTarget, Target};

/// A one-dimensional Gaussian pair and a sample size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian1DSetting {
    pub mu: f64,
    pub mu_tilde: f64,
    pub sigma2: f64,
    pub sigma2_tilde: f64,
    pub s: usize,
    pub log_evidence: f64,
}

impl Gaussian1DSetting {
    pub fn new(mu: f64, mu_tilde: f64, sigma2: f64, sigma2_tilde: f64, s: usize) -> Result<Self> {
        let out = Self {
            mu,
            mu_tilde,
            sigma2,
            sigma2_tilde,
            s,
            log_evidence: 0.0,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn with_log_evidence(self, log_evidence: f64) -> Self {
        Self { log_evidence, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0 && self.sigma2_tilde > 0.0) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        if self.s < 2 {
            return Err(Error::InvalidArgument("S must be at least 2".into()));
        }
        if ![
            self.mu,
            self.mu_tilde,
            self.sigma2,
            self.sigma2_tilde,
            self.log_evidence,
        ]
        .iter()
        .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("setting".into()));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<DiagGaussianParams> {
        DiagGaussianParams::from_mean_var(vec![self.mu], &[self.sigma2])
    }

    pub fn target(&self) -> Result<GaussianTarget> {
        GaussianTarget::new(vec![self.mu_tilde], vec![self.sigma2_tilde], self.log_evidence)
    }
}

/// `Var(Reinforce_mu) - Var(VarGrad_mu)` for the mean coordinate, exactly.
///
/// With `c = ½ ln(sigma2_tilde / sigma2) - log_evidence` the constant part of `f`:
///
/// ```text
/// [dmu^4 + 2 dmu^2 ((3S-7)/(S-1) sigma2 - 3 sigma2_tilde) + (5S-7)/(S-1) dsigma2^2] / (4 S sigma2 sigma2_tilde^2)
///   + c (c sigma2_tilde + dmu^2 + 3 dsigma2) / (S sigma2 sigma2_tilde)
/// ```
///
/// VarGrad ignores `c`; Reinforce does not, hence the second term.
pub fn delta_var_analytic(setting: &Gaussian1DSetting) -> Result<f64> {
    setting.validate()?;
    let Gaussian1DSetting {
        mu,
        mu_tilde,
        sigma2,
        sigma2_tilde,
        s,
        log_evidence,
    } = *setting;
    let s = s as f64;
    let dmu2 = (mu - mu_tilde).powi(2);
    let ds2 = sigma2 - sigma2_tilde;
    let main = dmu2 * dmu2
        + 2.0 * dmu2 * ((3.0 * s - 7.0) / (s - 1.0) * sigma2 - 3.0 * sigma2_tilde)
        + (5.0 * s - 7.0) / (s - 1.0) * ds2 * ds2;
    let c = 0.5 * (sigma2_tilde / sigma2).ln() - log_evidence;
    let constant = c * (c * sigma2_tilde + dmu2 + 3.0 * ds2);
    Ok(main / (4.0 * s * sigma2 * sigma2_tilde * sigma2_tilde) + constant / (s * sigma2 * sigma2_tilde))
}

/// Leading large-`S` numerator `dmu^4 + 6 dmu^2 dsigma2 + 5 dsigma2^2`; positive
/// means VarGrad has the lower variance (when the constant part of `f` vanishes).
/// It is negative exactly for `dsigma2` strictly between `-dmu^2` and `-dmu^2/5`.
pub fn delta_var_large_s(dmu: f64, dsigma2: f64) -> f64 {
    let d2 = dmu * dmu;
    d2 * d2 + 6.0 * d2 * dsigma2 + 5.0 * dsigma2 * dsigma2
}

/// Parameter convention for a scale coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoordinateConvention {
    Mean,
    Sigma2,
    LogSigma2,
    LogStd,
}

impl CoordinateConvention {
    pub const ALL: [CoordinateConvention; 4] = [
        CoordinateConvention::Mean,
        CoordinateConvention::Sigma2,
        CoordinateConvention::LogSigma2,
        CoordinateConvention::LogStd,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CoordinateConvention::Mean => "mean",
            CoordinateConvention::Sigma2 => "sigma2",
            CoordinateConvention::LogSigma2 => "log_sigma2",
            CoordinateConvention::LogStd => "log_std",
        }
    }

    /// The score of dimension `k` under this convention at `z_k`.
    pub fn score(&self, q: &DiagGaussianParams, k: usize, z: f64) -> f64 {
        let s2 = q.var(k);
        let e2 = (z - q.mean()[k]).powi(2) / s2;
        match self {
            CoordinateConvention::Mean => (z - q.mean()[k]) / s2,
            CoordinateConvention::Sigma2 => (e2 - 1.0) / (2.0 * s2),
            CoordinateConvention::LogSigma2 => 0.5 * (e2 - 1.0),
            CoordinateConvention::LogStd => e2 - 1.0,
        }
    }
}

fn pair(q: &DiagGaussianParams, target: &GaussianTarget, k: usize) -> Result<(f64, f64)> {
    check_len(q.dim(), target.dim())?;
    if k >= q.dim() {
        return Err(Error::InvalidArgument(format!("coordinate {k} out of range")));
    }
    Ok((q.var(k), target.post_var()[k]))
}

/// `Var_q(score)` of dimension `k` under `convention`.
pub fn score_variance(q: &DiagGaussianParams, k: usize, convention: CoordinateConvention) -> f64 {
    let s2 = q.var(k);
    match convention {
        CoordinateConvention::Mean => 1.0 / s2,
        CoordinateConvention::Sigma2 => 0.5 / (s2 * s2),
        CoordinateConvention::LogSigma2 => 0.5,
        CoordinateConvention::LogStd => 2.0,
    }
}

/// `Cov_q(f, score_k^2)` for diagonal Gaussians.
pub fn cov_f_score2_analytic(
    q: &DiagGaussianParams,
    target: &GaussianTarget,
    convention: CoordinateConvention,
    k: usize,
) -> Result<f64> {
    let (s2, t2) = pair(q, target, k)?;
    Ok(match convention {
        CoordinateConvention::Mean => 1.0 / t2 - 1.0 / s2,
        CoordinateConvention::Sigma2 => (1.0 / s2) * (1.0 / t2 - 1.0 / s2),
        CoordinateConvention::LogSigma2 => s2 / t2 - 1.0,
        CoordinateConvention::LogStd => 4.0 * (s2 / t2 - 1.0),
    })
}

/// Control-variate correction `Cov(f, score^2) / Var(score)`.
pub fn delta_cv_analytic(
    q: &DiagGaussianParams,
    target: &GaussianTarget,
    convention: CoordinateConvention,
    k: usize,
) -> Result<f64> {
    Ok(cov_f_score2_analytic(q, target, convention, k)? / score_variance(q, k, convention))
}

/// Optimal coefficients `a*_i = E[f] + delta_i` in the `(mean, log_std)` layout,
/// where `E[f] = KL - log p(x)`.
pub fn optimal_a_analytic(q: &DiagGaussianParams, target: &GaussianTarget) -> Result<Vec<f64>> {
    check_len(q.dim(), target.dim())?;
    let ef = kl_gaussian_closed_form(q, target)? - target_log_evidence(target);
    let d = q.dim();
    let mut out = vec![0.0; 2 * d];
    for k in 0..d {
        out[k] = ef + delta_cv_analytic(q, target, CoordinateConvention::Mean, k)?;
        out[d + k] = ef + delta_cv_analytic(q, target, CoordinateConvention::LogStd, k)?;
    }
    Ok(out)
}

fn target_log_evidence(target: &GaussianTarget) -> f64 {
    target.log_evidence().unwrap_or(0.0)
}

/// `sup_z q(z) / p(z|x)`, finite iff `sigma2_k < sigma2_tilde_k` for every `k`:
/// `prod_k (sigma_tilde/sigma) exp(dmu^2 / (2 (sigma2_tilde - sigma2)))`.
pub fn sup_ratio_closed_form(q: &DiagGaussianParams, target: &GaussianTarget) -> Result<Option<f64>> {
    check_len(q.dim(), target.dim())?;
    let mut log_c = 0.0;
    for k in 0..q.dim() {
        let (s2, t2) = (q.var(k), target.post_var()[k]);
        if s2 >= t2 {
            return Ok(None);
        }
        let dm = q.mean()[k] - target.post_mean()[k];
        log_c += 0.5 * (t2 / s2).ln() + dm * dm / (2.0 * (t2 - s2));
    }
    Ok(Some(log_c.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_var_examples() {
        let zero = Gaussian1DSetting::new(1.0, 2.0, 1.0, 1.0, 9).unwrap();
        assert!(delta_var_analytic(&zero).unwrap().abs() < 1e-15);
        for s in [2, 5, 100] {
            let same = Gaussian1DSetting::new(0.3, 0.3, 2.0, 2.0, s).unwrap();
            assert!(delta_var_analytic(&same).unwrap().abs() < 1e-15);
        }
        let big = Gaussian1DSetting::new(1.0, 2.0, 1.0, 1.0, 10_000_000).unwrap();
        let scaled = 4.0 * 1e7 * delta_var_analytic(&big).unwrap();
        assert!((scaled - 1.0).abs() < 1e-5);
        assert!(Gaussian1DSetting::new(0.0, 0.0, 1.0, 1.0, 1).is_err());
        assert!(Gaussian1DSetting::new(0.0, 0.0, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn delta_var_reference_values() {
        // exact symbolic values of Var(Reinforce) - Var(VarGrad)
        let cases = [
            ((1.0, 2.0, 1.0, 1.0, 3), -0.25),
            ((0.0, 1.0, 0.5, 1.0, 5), -0.208_769_416_664_174_4),
            ((3.0, 1.0, 3.0, 1.0, 4), 0.595_167_427_516_327_5),
            ((0.0, 0.0, 2.0, 1.0, 6), 0.019_199_373_553_302_687),
            ((1.0, -1.0, 1.5, 0.5, 2), -4.129_516_260_157_874_5),
            ((0.0, 1.0, 0.5, 1.0, 1000), -0.000_483_599_335_573_12),
        ];
        for ((mu, mt, s2, t2, s), expected) in cases {
            let v = delta_var_analytic(&Gaussian1DSetting::new(mu, mt, s2, t2, s).unwrap()).unwrap();
            assert!(
                (v - expected).abs() < 1e-12 * expected.abs().max(1.0),
                "{mu} {mt} {s2} {t2} {s}: {v}"
            );
        }
    }

    #[test]
    fn large_s_examples() {
        assert_eq!(delta_var_large_s(1.0, -1.0), 0.0);
        assert!(delta_var_large_s(1.0, -0.2).abs() < 1e-15);
        assert_eq!(delta_var_large_s(1.0, -0.5), -0.75);
        assert_eq!(delta_var_large_s(2.0, 0.0), 16.0);
    }

    fn gq(mu: f64, s2: f64) -> DiagGaussianParams {
        DiagGaussianParams::from_mean_var(vec![mu], &[s2]).unwrap()
    }

    fn gt(mu: f64, s2: f64) -> GaussianTarget {
        GaussianTarget::new(vec![mu], vec![s2], 0.0).unwrap()
    }

    #[test]
    fn covariance_examples_and_chain_rule() {
        let (q, t) = (gq(3.0, 3.0), gt(1.0, 1.0));
        assert!((cov_f_score2_analytic(&q, &t, CoordinateConvention::Mean, 0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let same = gt(3.0, 3.0);
        for c in CoordinateConvention::ALL {
            assert!(cov_f_score2_analytic(&q, &same, c, 0).unwrap().abs() < 1e-14);
        }
        for (s2, t2) in [(3.0, 1.0), (0.4, 2.5), (1.0, 1.7)] {
            let (q, t) = (gq(0.0, s2), gt(1.0, t2));
            let a = cov_f_score2_analytic(&q, &t, CoordinateConvention::Sigma2, 0).unwrap();
            let b = cov_f_score2_analytic(&q, &t, CoordinateConvention::LogSigma2, 0).unwrap();
            let c = cov_f_score2_analytic(&q, &t, CoordinateConvention::LogStd, 0).unwrap();
            assert!((a - b / (s2 * s2)).abs() < 1e-14);
            assert!((c - 4.0 * b).abs() < 1e-14);
        }
    }

    #[test]
    fn optimal_a_examples() {
        let a = optimal_a_analytic(&gq(3.0, 3.0), &gt(1.0, 1.0)).unwrap();
        let kl = 3.0 - 0.5 * 3f64.ln();
        assert!((a[0] - (kl + 2.0)).abs() < 1e-12);
        assert!((a[0] - 4.450_693).abs() < 1e-6);
        let at_post = optimal_a_analytic(&gq(1.0, 2.0), &gt(1.0, 2.0)).unwrap();
        assert!(at_post.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn sup_ratio_matches_grid_maximum() {
        let (q, t) = (gq(0.5, 0.6), gt(-0.3, 1.4));
        let c = sup_ratio_closed_form(&q, &t).unwrap().unwrap();
        let grid_max = (0..200_001)
            .map(|i| -10.0 + i as f64 * 1e-4)
            .map(|z| (q.log_density(&[z]).unwrap() - t.log_joint(&[z]).unwrap()).exp())
            .fold(0.0, f64::max);
        assert!((grid_max / c - 1.0).abs() < 1e-7, "{grid_max} vs {c}");
        assert_eq!(sup_ratio_closed_form(&gq(0.0, 2.0), &gt(0.0, 1.0)).unwrap(), None);
    }
}
