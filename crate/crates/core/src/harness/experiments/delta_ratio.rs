use super::{new_table, param_name};
use crate::analysis::{delta_cv_mc, prop2_bound, BoundStatus, PopulationMoments};
use crate::families::DiagGaussianParams;
use crate::harness::config::ExperimentConfig;
use crate::harness::table::{Cell, CsvTable};
use crate::harness::HarnessResult;
use crate::losses::kl_gaussian_closed_form;
use crate::rng::split_stream;
use crate::targets::GaussianTarget;

pub const DELTA_RATIO_COLUMNS: &[&str] = &[
    "dim",
    "coordinate",
    "delta",
    "delta_se",
    "ratio",
    "ratio_se",
    "ratio_valid",
    "ratio_analytic",
    "bound_rhs",
    "bound_valid",
    "kl",
];

/// `|delta_i / E[a]|` against dimension for the replicated Gaussian pair in
/// `[gauss]`. The bound column is empty when `sup q/p` is infinite.
pub fn run_delta_ratio(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let mut table = new_table(config, DELTA_RATIO_COLUMNS);
    let g = &config.gauss;
    table.meta("delta_samples", config.delta_samples);
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
        let kl = kl_gaussian_closed_form(&q, &t)?;
        let mut rng = split_stream(config.seed, "delta-ratio", d as u64);
        let report = delta_cv_mc(&q, &t, &mut rng, config.delta_samples)?;
        let (delta_pop, ef) = t.population_delta(&q)?;
        let bound = match (g.sigma2 < g.sigma2_tilde)
            .then(|| prop2_bound(&q, &t, None))
            .transpose()?
        {
            Some(b) if b.status == BoundStatus::Finite => Some(b.bound_rhs),
            _ => None,
        };
        for i in 0..2 * d {
            let valid = report.ratio[i].is_some() && report.ratio_se[i].is_finite();
            let analytic = delta_pop[i].filter(|_| ef != 0.0).map(|v| v / ef);
            let b = bound.as_ref().map(|b| b[i]);
            table.push(vec![
                d.into(),
                param_name(&q, i).into(),
                Cell::opt(report.delta_cv[i]),
                Cell::opt(report.delta_cv[i].map(|_| report.delta_cv_se[i])),
                Cell::opt(report.ratio[i].filter(|_| valid)),
                Cell::opt(valid.then_some(report.ratio_se[i])),
                Cell::flag(valid),
                Cell::opt(analytic),
                Cell::opt(b),
                Cell::flag(b.is_some()),
                kl.into(),
            ]);
        }
    }
    Ok(table)
}
