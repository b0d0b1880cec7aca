use super::{new_table, oracle_coefficient, param_name};
use crate::analysis::{delta_cv_mc, replicate_estimators};
use crate::estimators::{build_batch, vargrad, EstimatorKind};
use crate::families::{DiagGaussianParams, VariationalFamily};
use crate::harness::config::{ExperimentConfig, OptimKind};
use crate::harness::table::{Cell, CsvTable};
use crate::harness::HarnessResult;
use crate::losses::kl_via_importance_sampling;
use crate::optim::{Adam, Sgd};
use crate::rng::split_stream;
use crate::targets::{synth_logreg_dataset, LogRegModel};

pub const TRAIN_LOGREG_COLUMNS: &[&str] = &[
    "dim",
    "step",
    "coordinate",
    "elbo",
    "elbo_se",
    "kl_is",
    "kl_is_se",
    "log_evidence_is",
    "e_a",
    "e_a_se",
    "bound_denominator",
    "delta",
    "delta_se",
    "ratio",
    "ratio_se",
    "ratio_valid",
    "var_reinforce",
    "var_reinforce_se",
    "var_vargrad",
    "var_vargrad_se",
    "var_cv_sampled",
    "var_cv_sampled_se",
    "var_cv_oracle",
    "var_cv_oracle_se",
    "diff",
    "diff_se",
];

enum Optimizer {
    Sgd(Sgd),
    Adam(Adam),
}

impl Optimizer {
    fn step(&mut self, p: &mut [f64], g: &[f64]) -> crate::Result<()> {
        match self {
            Optimizer::Sgd(o) => o.step(p, g),
            Optimizer::Adam(o) => o.step(p, g),
        }
    }
}

/// Train a diagonal-Gaussian posterior for Bayesian logistic regression with
/// VarGrad and log diagnostics every `train.log_every` steps (and at the last
/// step). One row per logged step and parameter; step-level columns repeat.
pub fn run_train_logreg(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let mut table = new_table(config, TRAIN_LOGREG_COLUMNS);
    let tc = &config.train;
    let s_var = config.samples[0];
    table.meta("log_every", tc.log_every);
    table.meta("steps", tc.steps);
    table.meta("data_points", tc.data_points);
    table.meta("train_samples", tc.samples);
    table.meta("variance_samples", s_var);
    table.meta("replicates", config.replicates);
    table.meta(
        "optimizer",
        match config.optim.kind {
            OptimKind::Sgd => format!("sgd lr={}", config.optim.learning_rate),
            OptimKind::Adam => format!(
                "adam lr={} beta1={} beta2={} eps={}",
                config.optim.learning_rate, config.optim.beta1, config.optim.beta2, config.optim.eps
            ),
        },
    );

    for &d in &config.dims {
        let data = synth_logreg_dataset(&mut split_stream(config.seed, "data", d as u64), tc.data_points, d)?;
        let model = LogRegModel::new(data.x().to_vec(), data.y().to_vec(), d, tc.prior_w_var, tc.prior_b_var)?;
        let mut q = DiagGaussianParams::new(vec![0.0; d + 1], vec![tc.init_log_std; d + 1])?;
        let mut params = q.params_vector();
        let mut opt = match config.optim.kind {
            OptimKind::Sgd => Optimizer::Sgd(Sgd::new(config.optim.learning_rate)?),
            OptimKind::Adam => Optimizer::Adam(Adam::with_hyperparams(
                config.optim.learning_rate,
                config.optim.beta1,
                config.optim.beta2,
                config.optim.eps,
                params.len(),
            )?),
        };
        let train_rng = split_stream(config.seed, "train", d as u64);
        let log_rng = split_stream(config.seed, "log", d as u64);

        for step in 0..=tc.steps {
            if step % tc.log_every == 0 || step == tc.steps {
                let rng = log_rng.substream(step as u64);
                log_step(&mut table, config, d, step, &q, &model, &rng, s_var)?;
            }
            if step == tc.steps {
                break;
            }
            let batch = build_batch(&q, &model, &mut train_rng.substream(step as u64), tc.samples)?;
            let g = vargrad(&batch)?;
            opt.step(&mut params, &g.grad)?;
            q = q.with_params(&params)?;
        }
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn log_step(
    table: &mut CsvTable,
    config: &ExperimentConfig,
    d: usize,
    step: usize,
    q: &DiagGaussianParams,
    model: &LogRegModel,
    rng: &crate::rng::RngStream,
    s_var: usize,
) -> HarnessResult<()> {
    let tc = &config.train;
    let kl = kl_via_importance_sampling(q, model, &mut rng.child("is", 0), tc.is_samples, tc.elbo_samples)?;
    let delta = delta_cv_mc(q, model, &mut rng.child("delta", 0), tc.delta_samples)?;
    let denom = (kl.kl > 0.0).then(|| (kl.kl.sqrt() - kl.log_evidence / kl.kl.sqrt()).abs());
    let oracle = oracle_coefficient(q, model, &mut rng.child("cv-oracle", 0), tc.cv_oracle_samples)?;
    let kinds = [
        EstimatorKind::Reinforce,
        EstimatorKind::VarGrad,
        EstimatorKind::SampledCv { extra: tc.cv_extra },
        EstimatorKind::ControlVariate(oracle),
    ];
    let reps = replicate_estimators(&kinds, q, model, &rng.child("variance", 0), s_var, config.replicates)?;
    let reports: Vec<_> = (0..kinds.len()).map(|k| reps.report(k)).collect();
    for i in 0..q.num_params() {
        let valid = delta.ratio[i].is_some() && delta.ratio_se[i].is_finite();
        let (diff, diff_se) = reps.variance_difference(0, 1, i);
        let mut row: Vec<Cell> = vec![
            d.into(),
            step.into(),
            param_name(q, i).into(),
            kl.elbo.into(),
            Cell::Real(kl.elbo_se),
            kl.kl.into(),
            Cell::Real(kl.kl_se),
            kl.log_evidence.into(),
            delta.a_vargrad_expectation.into(),
            Cell::Real(delta.a_vargrad_se),
            Cell::opt(denom),
            Cell::opt(delta.delta_cv[i]),
            Cell::opt(delta.delta_cv[i].map(|_| delta.delta_cv_se[i])),
            Cell::opt(delta.ratio[i].filter(|_| valid)),
            Cell::opt(valid.then_some(delta.ratio_se[i])),
            Cell::flag(valid),
        ];
        for r in &reports {
            row.push(r.variance[i].into());
            row.push(Cell::Real(r.variance_se[i]));
        }
        row.push(diff.into());
        row.push(Cell::Real(diff_se));
        table.push(row);
    }
    Ok(())
}
