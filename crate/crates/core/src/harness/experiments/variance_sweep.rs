use super::new_table;
use crate::analysis::replicate_estimators;
use crate::estimators::EstimatorKind;
use crate::gaussian_oracles::delta_var_analytic;
use crate::harness::config::ExperimentConfig;
use crate::harness::table::{Cell, CsvTable};
use crate::harness::HarnessResult;
use crate::rng::split_stream;

pub const VARIANCE_SWEEP_COLUMNS: &[&str] = &[
    "mu",
    "mu_tilde",
    "sigma2",
    "sigma2_tilde",
    "S",
    "var_reinforce",
    "var_vargrad",
    "diff",
    "diff_se",
    "analytic",
];

/// Mean-coordinate variance of Reinforce and VarGrad on common random numbers,
/// one row per grid point.
pub fn run_variance_sweep(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let mut table = new_table(config, VARIANCE_SWEEP_COLUMNS);
    table.meta("replicates", config.replicates);
    table.meta("coordinate", "mean");
    let kinds = [EstimatorKind::Reinforce, EstimatorKind::VarGrad];
    for (i, g) in config.sweep.iter().enumerate() {
        let (q, t) = (g.family()?, g.target()?);
        let rng = split_stream(config.seed, "variance-sweep", i as u64);
        let reps = replicate_estimators(&kinds, &q, &t, &rng, g.s, config.replicates)?;
        let (vr, vv) = (reps.report(0).variance[0], reps.report(1).variance[0]);
        let (diff, diff_se) = reps.variance_difference(0, 1, 0);
        table.push(vec![
            g.mu.into(),
            g.mu_tilde.into(),
            g.sigma2.into(),
            g.sigma2_tilde.into(),
            g.s.into(),
            vr.into(),
            vv.into(),
            diff.into(),
            Cell::Real(diff_se),
            delta_var_analytic(g)?.into(),
        ]);
    }
    Ok(table)
}
