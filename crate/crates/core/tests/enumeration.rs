//! Exact expectations over `{0,1}^D` and over all sample tuples.

use vargrad_lab::estimators::{cv_estimator, reinforce, vargrad, SampleBatch};
use vargrad_lab::families::{enumerate_support, MeanFieldBernoulliParams, VariationalFamily};
use vargrad_lab::rng::split_stream;
use vargrad_lab::targets::{exact_kl_and_gradient, DiscreteToyModel};

/// Average an estimator over every `S`-tuple of states, weighted by `q`.
fn tuple_expectation<E>(q: &MeanFieldBernoulliParams, t: &DiscreteToyModel, s: usize, est: E) -> Vec<f64>
where
    E: Fn(&SampleBatch) -> Vec<f64>,
{
    let support = enumerate_support(q).unwrap();
    let n = support.len();
    let d = q.dim();
    let mut out = vec![0.0; q.num_params()];
    for idx in 0..n.pow(s as u32) {
        let mut rem = idx;
        let mut z = Vec::with_capacity(s * d);
        let mut p = 1.0;
        for _ in 0..s {
            let (state, prob) = &support[rem % n];
            rem /= n;
            z.extend_from_slice(state);
            p *= prob;
        }
        let b = SampleBatch::from_draws(q, t, z, 0).unwrap();
        for (o, g) in out.iter_mut().zip(est(&b)) {
            *o += p * g;
        }
    }
    out
}

#[test]
fn vargrad_is_exactly_unbiased() {
    for (d, s) in [(1, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
        let mut rng = split_stream(40, "enum", (10 * d + s) as u64);
        let t = DiscreteToyModel::random(&mut rng, d, 1.3).unwrap();
        let q = MeanFieldBernoulliParams::new((0..d).map(|k| 0.4 - 0.5 * k as f64).collect()).unwrap();
        let (_, exact) = exact_kl_and_gradient(&t, &q).unwrap();
        let vg = tuple_expectation(&q, &t, s, |b| vargrad(b).unwrap().grad);
        let r = tuple_expectation(&q, &t, s, |b| reinforce(b).unwrap().grad);
        for i in 0..d {
            assert!((vg[i] - exact[i]).abs() < 1e-12, "vargrad D={d} S={s}");
            assert!((r[i] - exact[i]).abs() < 1e-12, "reinforce D={d} S={s}");
        }
        // same-batch a = f_bar is biased by exactly (S-1)/S
        let cv = tuple_expectation(&q, &t, s, |b| cv_estimator(b, &vec![b.f_bar(); d]).unwrap().grad);
        let factor = (s - 1) as f64 / s as f64;
        for i in 0..d {
            assert!((cv[i] - factor * exact[i]).abs() < 1e-12, "cv D={d} S={s}");
        }
    }
}

#[test]
fn single_coordinate_reference() {
    let t = DiscreteToyModel::from_mean_field_posterior(&[0.8], 0.0).unwrap();
    let q = MeanFieldBernoulliParams::from_probs(&[0.5]).unwrap();
    let (_, g) = exact_kl_and_gradient(&t, &q).unwrap();
    assert!((g[0] + 0.346_57).abs() < 1e-5, "{}", g[0]);
    let vg = tuple_expectation(&q, &t, 2, |b| vargrad(b).unwrap().grad);
    assert!((vg[0] - g[0]).abs() < 1e-12);
}
