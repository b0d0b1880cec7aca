use rand::Rng;

use super::{estimator_kinds, join, new_table, param_name, z_score};
use crate::analysis::replicate_estimators;
use crate::families::MeanFieldBernoulliParams;
use crate::harness::config::ExperimentConfig;
use crate::harness::table::{Cell, CsvTable};
use crate::harness::HarnessResult;
use crate::rng::split_stream;
use crate::targets::{exact_kl_and_gradient, DiscreteToyModel};

pub const UNBIASEDNESS_COLUMNS: &[&str] = &[
    "dim",
    "samples",
    "coordinate",
    "estimator",
    "exact",
    "mean",
    "se",
    "z",
    "pass",
];

/// A row passes when the replicate mean is within this many standard errors.
pub const PASS_Z: f64 = 4.0;

/// Replicate means of each estimator against the enumerated KL gradient.
/// Without `toy.posterior` the log-joint table is random; without `toy.q` the
/// variational logits are drawn uniformly from `[-1.5, 1.5]`.
pub fn run_unbiasedness(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let mut table = new_table(config, UNBIASEDNESS_COLUMNS);
    table.meta("replicates", config.replicates);
    table.meta("estimators", join(&config.estimators));
    for &d in &config.dims {
        let model = match &config.toy.posterior {
            Some(p) => DiscreteToyModel::from_mean_field_posterior(p, config.toy.log_evidence)?,
            None => DiscreteToyModel::random(
                &mut split_stream(config.seed, "toy-model", d as u64),
                d,
                config.toy.scale,
            )?,
        };
        let q = match &config.toy.q {
            Some(p) => MeanFieldBernoulliParams::from_probs(p)?,
            None => {
                let mut rng = split_stream(config.seed, "toy-q", d as u64);
                MeanFieldBernoulliParams::new((0..d).map(|_| rng.random_range(-1.5..=1.5)).collect())?
            }
        };
        let (_, exact) = exact_kl_and_gradient(&model, &q)?;
        for &s in &config.samples {
            let rng = split_stream(config.seed, &format!("unbiasedness/d{d}"), s as u64);
            let kinds = estimator_kinds(
                &config.estimators,
                &q,
                &model,
                s,
                config.train.cv_oracle_samples,
                None,
                &rng,
            )?;
            let just_kinds: Vec<_> = kinds.iter().map(|(_, k)| k.clone()).collect();
            let reps = replicate_estimators(&just_kinds, &q, &model, &rng, s, config.replicates)?;
            for (k, (name, _)) in kinds.iter().enumerate() {
                let report = reps.report(k);
                for i in 0..d {
                    let z = z_score(report.mean[i], exact[i], report.mean_se[i]);
                    table.push(vec![
                        d.into(),
                        s.into(),
                        param_name(&q, i).into(),
                        name.as_str().into(),
                        exact[i].into(),
                        report.mean[i].into(),
                        Cell::Real(report.mean_se[i]),
                        z.into(),
                        Cell::flag(z.abs() < PASS_Z),
                    ]);
                }
            }
        }
    }
    Ok(table)
}
