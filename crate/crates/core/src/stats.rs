//! Small numerical and statistical helpers shared across modules.

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(sum_i e^{x_i})`. Returns `-inf` for an empty slice or when every entry is `-inf`.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased (`1/(n-1)`) sample variance, two-pass.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Unbiased (`1/(n-1)`) sample covariance, two-pass.
pub fn sample_covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the mean, `sd / sqrt(n)`. This is also the delete-one
/// jackknife standard error of the mean.
pub fn mean_standard_error(xs: &[f64]) -> f64 {
    (sample_variance(xs) / xs.len() as f64).sqrt()
}

/// Delete-one jackknife standard error of the unbiased sample variance.
///
/// With `d_i = x_i - mean`, the leave-one-out variances are
/// `(Q - d_i^2 n/(n-1)) / (n-2)`, so the jackknife reduces to the spread of `d_i^2`.
pub fn variance_jackknife_se(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    squared_deviation_jackknife(&sq)
}

/// Jackknife standard error of `var(x) - var(y)` for paired replicates.
pub fn variance_difference_jackknife_se(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mx, my) = (mean(xs), mean(ys));
    let u: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (x - mx) - (y - my) * (y - my))
        .collect();
    squared_deviation_jackknife(&u)
}

fn squared_deviation_jackknife(u: &[f64]) -> f64 {
    let n = u.len() as f64;
    if u.len() < 3 {
        return f64::NAN;
    }
    let ubar = mean(u);
    let spread: f64 = u.iter().map(|v| (v - ubar) * (v - ubar)).sum();
    n / ((n - 1.0) * (n - 2.0)) * ((n - 1.0) / n * spread).sqrt()
}

/// Delete-one jackknife for a smooth function of column means.
///
/// `rows` is a row-major `n x k` matrix of per-draw values; `g` maps a vector of
/// `k` means to the statistic. Returns `(g(full means), jackknife se)`. If `g`
/// returns a non-finite value on any leave-one-out subsample the standard error
/// is reported as NaN.
pub fn jackknife_of_means<G>(rows: &[f64], k: usize, g: G) -> (f64, f64)
where
    G: Fn(&[f64]) -> f64,
{
    let n = rows.len() / k;
    assert!(n >= 2 && rows.len() == n * k);
    let mut totals = vec![0.0; k];
    for row in rows.chunks_exact(k) {
        for (t, v) in totals.iter_mut().zip(row) {
            *t += v;
        }
    }
    let full: Vec<f64> = totals.iter().map(|t| t / n as f64).collect();
    let estimate = g(&full);

    let mut loo = vec![0.0; k];
    let mut values = Vec::with_capacity(n);
    for row in rows.chunks_exact(k) {
        for ((l, t), v) in loo.iter_mut().zip(&totals).zip(row) {
            *l = (t - v) / (n - 1) as f64;
        }
        values.push(g(&loo));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return (estimate, f64::NAN);
    }
    let vbar = mean(&values);
    let spread: f64 = values.iter().map(|v| (v - vbar) * (v - vbar)).sum();
    let nf = n as f64;
    (estimate, ((nf - 1.0) / nf * spread).sqrt())
}
