//! One driver per subcommand. Each returns the complete table for its schema.

mod cv_comparison;
mod delta_ratio;
mod gaussian_oracles;
mod train_logreg;
mod unbiasedness;
mod variance_sweep;

pub use cv_comparison::{run_cv_comparison, CV_COMPARISON_COLUMNS};
pub use delta_ratio::{run_delta_ratio, DELTA_RATIO_COLUMNS};
pub use gaussian_oracles::{run_gaussian_oracles, GAUSSIAN_ORACLES_COLUMNS};
pub use train_logreg::{run_train_logreg, TRAIN_LOGREG_COLUMNS};
pub use unbiasedness::{run_unbiasedness, UNBIASEDNESS_COLUMNS};
pub use variance_sweep::{run_variance_sweep, VARIANCE_SWEEP_COLUMNS};

use super::config::{ExperimentConfig, ExperimentKind};
use super::table::CsvTable;
use super::HarnessResult;
use crate::estimators::{build_batch, cv_coefficient_from_batch, EstimatorKind};
use crate::families::VariationalFamily;
use crate::rng::RngStream;
use crate::targets::Target;

pub fn dispatch(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    match config.experiment {
        ExperimentKind::TrainLogreg => run_train_logreg(config),
        ExperimentKind::VarianceSweep => run_variance_sweep(config),
        ExperimentKind::DeltaRatio => run_delta_ratio(config),
        ExperimentKind::GaussianOracles => run_gaussian_oracles(config),
        ExperimentKind::Unbiasedness => run_unbiasedness(config),
        ExperimentKind::CvComparison => run_cv_comparison(config),
    }
}

fn new_table(config: &ExperimentConfig, columns: &[&str]) -> CsvTable {
    let mut t = CsvTable::new(columns);
    t.meta("experiment", config.experiment);
    t.meta("seed", config.seed);
    t
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parameter names in the `(mean, log_std)` or logit layout.
fn param_name<F: VariationalFamily>(q: &F, i: usize) -> String {
    use crate::families::FamilyTag;
    let d = q.dim();
    match q.tag() {
        FamilyTag::DiagGaussian if i < d => format!("mean[{i}]"),
        FamilyTag::DiagGaussian => format!("log_std[{}]", i - d),
        _ => format!("logit[{i}]"),
    }
}

/// Coefficients `E[f s^2] / E[s^2]` from `n` fresh draws; undefined coordinates use 0.
fn oracle_coefficient<F, T>(q: &F, target: &T, rng: &mut RngStream, n: usize) -> crate::Result<Vec<f64>>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    let batch = build_batch(q, target, rng, n)?;
    Ok(cv_coefficient_from_batch(&batch)
        .into_iter()
        .map(|a| a.unwrap_or(0.0))
        .collect())
}

/// `(mean - exact) / se`. Differences at the rounding floor count as zero, so a
/// degenerate setting with `f` constant up to rounding does not report noise.
fn z_score(mean: f64, exact: f64, se: f64) -> f64 {
    let diff = mean - exact;
    if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Estimator list for the experiments that accept one. `analytic` supplies
/// the closed-form optimal coefficients when the target admits them.
fn estimator_kinds<F, T>(
    names: &[String],
    q: &F,
    target: &T,
    samples: usize,
    oracle_samples: usize,
    analytic: Option<Vec<f64>>,
    rng: &RngStream,
) -> crate::Result<Vec<(String, EstimatorKind)>>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    names
        .iter()
        .map(|name| {
            let kind = match name.as_str() {
                "reinforce" => EstimatorKind::Reinforce,
                "vargrad" => EstimatorKind::VarGrad,
                "cv-mean" => EstimatorKind::MeanBaseline,
                "cv-sampled" => EstimatorKind::SampledCv { extra: samples.max(2) },
                "cv-analytic" => EstimatorKind::ControlVariate(
                    analytic
                        .clone()
                        .ok_or_else(|| crate::Error::Unsupported("cv-analytic needs a Gaussian target".into()))?,
                ),
                "cv-oracle" => EstimatorKind::ControlVariate(oracle_coefficient(
                    q,
                    target,
                    &mut rng.child("cv-oracle", 0),
                    oracle_samples,
                )?),
                other => return Err(crate::Error::InvalidArgument(format!("unknown estimator {other}"))),
            };
            Ok((name.clone(), kind))
        })
        .collect()
}
