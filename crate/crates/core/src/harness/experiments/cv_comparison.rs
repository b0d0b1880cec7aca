use super::{estimator_kinds, join, new_table, param_name};
use crate::analysis::replicate_estimators;
use crate::families::DiagGaussianParams;
use crate::gaussian_oracles::optimal_a_analytic;
use crate::harness::config::ExperimentConfig;
use crate::harness::table::{Cell, CsvTable};
use crate::harness::HarnessResult;
use crate::rng::split_stream;
use crate::targets::GaussianTarget;

pub const CV_COMPARISON_COLUMNS: &[&str] = &[
    "dim",
    "samples",
    "coordinate",
    "estimator",
    "mean",
    "mean_se",
    "variance",
    "variance_se",
];

/// Estimator variances on the replicated Gaussian pair in `[gauss]` over the
/// dimension and sample-size grids. `cv-sampled` estimates its coefficient
/// from `S` independent draws.
pub fn run_cv_comparison(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let mut table = new_table(config, CV_COMPARISON_COLUMNS);
    let g = &config.gauss;
    table.meta("replicates", config.replicates);
    table.meta("estimators", join(&config.estimators));
    table.meta(
        "gauss",
        format!(
            "mu={} sigma2={} mu_tilde={} sigma2_tilde={} log_evidence={}",
            g.mu, g.sigma2, g.mu_tilde, g.sigma2_tilde, g.log_evidence
        ),
    );
    for &d in &config.dims {
        let q = DiagGaussianParams::from_mean_var(vec![g.mu; d], &vec![g.sigma2; d])?;
        let t = GaussianTarget::replicated(g.mu_tilde, g.sigma2_tilde, d, g.log_evidence)?;
        let a_star = optimal_a_analytic(&q, &t)?;
        for &s in &config.samples {
            let rng = split_stream(config.seed, &format!("cv-comparison/d{d}"), s as u64);
            let kinds = estimator_kinds(
                &config.estimators,
                &q,
                &t,
                s,
                config.train.cv_oracle_samples,
                Some(a_star.clone()),
                &rng,
            )?;
            let just_kinds: Vec<_> = kinds.iter().map(|(_, k)| k.clone()).collect();
            let reps = replicate_estimators(&just_kinds, &q, &t, &rng, s, config.replicates)?;
            for (k, (name, _)) in kinds.iter().enumerate() {
                let report = reps.report(k);
                for i in 0..2 * d {
                    table.push(vec![
                        d.into(),
                        s.into(),
                        param_name(&q, i).into(),
                        name.as_str().into(),
                        report.mean[i].into(),
                        Cell::Real(report.mean_se[i]),
                        report.variance[i].into(),
                        Cell::Real(report.variance_se[i]),
                    ]);
                }
            }
        }
    }
    Ok(table)
}
