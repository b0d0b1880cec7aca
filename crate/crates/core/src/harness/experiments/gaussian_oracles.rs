use super::{new_table, z_score};
use crate::families::VariationalFamily;
use crate::gaussian_oracles::{cov_f_score2_analytic, delta_cv_analytic, score_variance, CoordinateConvention};
use crate::harness::config::ExperimentConfig;
use crate::harness::table::{Cell, CsvTable};
use crate::harness::HarnessResult;
use crate::losses::kl_gaussian_closed_form;
use crate::rng::split_stream;
use crate::stats::jackknife_of_means;
use crate::targets::{GaussianTarget, Target};

pub const GAUSSIAN_ORACLES_COLUMNS: &[&str] = &[
    "setting",
    "mu",
    "mu_tilde",
    "sigma2",
    "sigma2_tilde",
    "quantity",
    "coordinate",
    "analytic",
    "mc",
    "mc_se",
    "z",
];

/// Monte Carlo checks of the one-dimensional closed forms under every
/// coordinate convention. `f` uses `log p(x) = gauss.log_evidence`.
pub fn run_gaussian_oracles(config: &ExperimentConfig) -> HarnessResult<CsvTable> {
    let mut table = new_table(config, GAUSSIAN_ORACLES_COLUMNS);
    let n = config.samples[0].max(2);
    let le = config.gauss.log_evidence;
    table.meta("samples", n);
    table.meta("log_evidence", le);
    for (i, &[mu, mt, s2, t2]) in config.oracle_settings.iter().enumerate() {
        let q = crate::families::DiagGaussianParams::from_mean_var(vec![mu], &[s2])?;
        let t = GaussianTarget::new(vec![mt], vec![t2], le)?;
        let ef = kl_gaussian_closed_form(&q, &t)? - le;

        let mut rng = split_stream(config.seed, "gaussian-oracles", i as u64);
        let mut zs = vec![0.0; n];
        let mut fs = vec![0.0; n];
        for (z, f) in zs.iter_mut().zip(fs.iter_mut()) {
            let mut buf = [0.0];
            q.draw_into(&mut rng, &mut buf);
            *z = buf[0];
            *f = q.log_density(&buf)? - t.log_joint(&buf)?;
        }

        let mut rows = Vec::with_capacity(5 * n);
        for conv in CoordinateConvention::ALL {
            rows.clear();
            for (z, f) in zs.iter().zip(&fs) {
                let s = conv.score(&q, 0, *z);
                let s2 = s * s;
                rows.extend_from_slice(&[*f, s, s2, f * s2, s2 * s2]);
            }
            // column means: [f, s, s^2, f s^2, s^4]
            let stats: [(&str, f64, fn(&[f64]) -> f64); 5] = [
                ("cov_f_score2", cov_f_score2_analytic(&q, &t, conv, 0)?, |m| {
                    m[3] - m[0] * m[2]
                }),
                ("score_variance", score_variance(&q, 0, conv), |m| m[2] - m[1] * m[1]),
                (
                    "kurtosis",
                    if conv == CoordinateConvention::Mean { 3.0 } else { 15.0 },
                    |m| m[4] / (m[2] * m[2]),
                ),
                ("delta", delta_cv_analytic(&q, &t, conv, 0)?, |m| {
                    (m[3] - m[0] * m[2]) / (m[2] - m[1] * m[1])
                }),
                ("optimal_a", ef + delta_cv_analytic(&q, &t, conv, 0)?, |m| m[3] / m[2]),
            ];
            for (name, analytic, g) in stats {
                let (mc, se) = jackknife_of_means(&rows, 5, g);
                table.push(vec![
                    i.into(),
                    mu.into(),
                    mt.into(),
                    s2.into(),
                    t2.into(),
                    name.into(),
                    conv.label().into(),
                    analytic.into(),
                    mc.into(),
                    Cell::Real(se),
                    z_score(mc, analytic, se).into(),
                ]);
            }
        }
    }
    Ok(table)
}
