//! Score-function gradient estimators of `grad_phi KL(q_phi || p(z|x))`.
//!
//! All estimators work from a [`SampleBatch`]: `S` draws `z_s ~ q`, the values
//! `f_s = log q(z_s) - log p(x, z_s)` and the scores `grad_phi log q(z_s)`.
//! Draws never carry parameter dependence, so every gradient below treats them
//! as constants.

use crate::error::{check_len, Error, Result};
use crate::families::VariationalFamily;
use crate::rng::RngStream;
use crate::stats::{mean, sample_covariance, sample_variance};
use crate::targets::Target;

/// `S` draws with their `f` values and score rows, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    s: usize,
    d: usize,
    p: usize,
    z: Vec<f64>,
    f: Vec<f64>,
    scores: Vec<f64>,
    f_bar: f64,
    seed: u64,
}

/// Draw `s` samples from `q` and evaluate `f` and the scores.
pub fn build_batch<F, T>(q: &F, target: &T, rng: &mut RngStream, s: usize) -> Result<SampleBatch>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    if s == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    check_len(q.dim(), target.dim())?;
    let d = q.dim();
    let mut z = vec![0.0; s * d];
    for row in z.chunks_exact_mut(d) {
        q.draw_into(rng, row);
    }
    SampleBatch::from_draws(q, target, z, rng.id())
}

impl SampleBatch {
    /// Batch from given draws (row-major `S x D`), e.g. an enumerated tuple of states.
    pub fn from_draws<F, T>(q: &F, target: &T, z: Vec<f64>, seed: u64) -> Result<Self>
    where
        F: VariationalFamily,
        T: Target + ?Sized,
    {
        let (d, p) = (q.dim(), q.num_params());
        check_len(d, target.dim())?;
        if z.is_empty() || !z.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(
                "draws must form a non-empty S x D matrix".into(),
            ));
        }
        let s = z.len() / d;
        let mut f = Vec::with_capacity(s);
        let mut scores = vec![0.0; s * p];
        for (row, out) in z.chunks_exact(d).zip(scores.chunks_exact_mut(p)) {
            f.push(q.log_density(row)? - target.log_joint(row)?);
            q.score_into(row, out)?;
        }
        let f_bar = mean(&f);
        Ok(Self {
            s,
            d,
            p,
            z,
            f,
            scores,
            f_bar,
            seed,
        })
    }

    /// The same batch with every `f_s` shifted by `c` (as if `log p(x)` moved by `-c`).
    pub fn shifted(&self, c: f64) -> Self {
        let f: Vec<f64> = self.f.iter().map(|v| v + c).collect();
        Self {
            f_bar: mean(&f),
            f,
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.s
    }

    pub fn is_empty(&self) -> bool {
        self.s == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_params(&self) -> usize {
        self.p
    }

    pub fn z(&self, s: usize) -> &[f64] {
        &self.z[s * self.d..(s + 1) * self.d]
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f
    }

    pub fn score(&self, s: usize) -> &[f64] {
        &self.scores[s * self.p..(s + 1) * self.p]
    }

    /// Row-major `S x P` score matrix.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn f_bar(&self) -> f64 {
        self.f_bar
    }

    /// Identifier of the stream the draws came from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `-f_bar`, the Monte Carlo ELBO estimate.
    pub fn elbo_estimate(&self) -> f64 {
        -self.f_bar
    }

    /// `(1/S) sum_s score_s`.
    pub fn mean_score(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for row in self.scores.chunks_exact(self.p) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.s as f64);
        out
    }

    /// `sum_s w_s score_s`.
    fn weighted_score_sum(&self, weights: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (row, w) in self.scores.chunks_exact(self.p).zip(weights) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EstimatorTag {
    Reinforce,
    Cv,
    VarGrad,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientEstimate {
    pub grad: Vec<f64>,
    pub tag: EstimatorTag,
    pub samples: usize,
    pub seed: u64,
}

fn finish(batch: &SampleBatch, grad: Vec<f64>, tag: EstimatorTag) -> Result<GradientEstimate> {
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("{tag:?} gradient has a non-finite entry")));
    }
    Ok(GradientEstimate {
        grad,
        tag,
        samples: batch.s,
        seed: batch.seed,
    })
}

/// `(1/S) sum_s f_s score_s`.
pub fn reinforce(batch: &SampleBatch) -> Result<GradientEstimate> {
    let mut g = batch.weighted_score_sum(batch.f.iter().copied());
    g.iter_mut().for_each(|v| *v /= batch.s as f64);
    finish(batch, g, EstimatorTag::Reinforce)
}

/// Reinforce with the control variate `a ⊙ mean(score)` subtracted.
pub fn cv_estimator(batch: &SampleBatch, a: &[f64]) -> Result<GradientEstimate> {
    check_len(batch.p, a.len())?;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("control variate coefficient".into()));
    }
    let mut g = batch.weighted_score_sum(batch.f.iter().copied());
    let ms = batch.mean_score();
    for ((gi, ai), mi) in g.iter_mut().zip(a).zip(&ms) {
        *gi = *gi / batch.s as f64 - ai * mi;
    }
    finish(batch, g, EstimatorTag::Cv)
}

/// The leave-one-out estimator `(1/(S-1)) [sum_s f_s score_s - f_bar sum_s score_s]`.
pub fn vargrad(batch: &SampleBatch) -> Result<GradientEstimate> {
    if batch.s < 2 {
        return Err(Error::InvalidArgument("VarGrad needs at least 2 samples".into()));
    }
    let fs = batch.weighted_score_sum(batch.f.iter().copied());
    let ss = batch.weighted_score_sum(std::iter::repeat(1.0));
    let k = 1.0 / (batch.s - 1) as f64;
    let g = fs.iter().zip(&ss).map(|(a, b)| k * (a - batch.f_bar * b)).collect();
    finish(batch, g, EstimatorTag::VarGrad)
}

/// Forward-mode value with a dense gradient.
#[derive(Clone, Debug)]
struct Dual {
    v: f64,
    g: Vec<f64>,
}

impl Dual {
    fn constant(v: f64, p: usize) -> Self {
        Self { v, g: vec![0.0; p] }
    }

    fn add(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v + o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a + b).collect(),
        }
    }

    fn sub(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v - o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a - b).collect(),
        }
    }

    fn mul(&self, o: &Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            g: self.g.iter().zip(&o.g).map(|(a, b)| a * o.v + self.v * b).collect(),
        }
    }

    fn scale(&self, c: f64) -> Dual {
        Dual {
            v: self.v * c,
            g: self.g.iter().map(|a| a * c).collect(),
        }
    }
}

/// Gradient of the log-variance loss `½ Var_S(f)` with the draws held fixed,
/// obtained by forward-mode differentiation with `d f_s / d phi = score_s`.
pub fn vargrad_via_loss(batch: &SampleBatch) -> Result<GradientEstimate> {
    if batch.s < 2 {
        return Err(Error::InvalidArgument(
            "the empirical variance needs at least 2 samples".into(),
        ));
    }
    let p = batch.p;
    let fs: Vec<Dual> = (0..batch.s)
        .map(|s| Dual {
            v: batch.f[s],
            g: batch.score(s).to_vec(),
        })
        .collect();
    let total = fs.iter().fold(Dual::constant(0.0, p), |acc, f| acc.add(f));
    let fbar = total.scale(1.0 / batch.s as f64);
    let ss = fs.iter().fold(Dual::constant(0.0, p), |acc, f| {
        let dev = f.sub(&fbar);
        acc.add(&dev.mul(&dev))
    });
    let loss = ss.scale(0.5 / (batch.s - 1) as f64);
    finish(batch, loss.g, EstimatorTag::VarGrad)
}

/// Relative variance below which a score coordinate counts as degenerate.
const DEGENERATE_SCORE_VARIANCE: f64 = 1e-10;

/// Plug-in `Cov(f score_i, score_i) / Var(score_i)` per coordinate on this batch;
/// `None` where the score coordinate has (numerically) zero variance.
pub fn cv_coefficient_from_batch(batch: &SampleBatch) -> Vec<Option<f64>> {
    (0..batch.p)
        .map(|i| {
            let s: Vec<f64> = (0..batch.s).map(|r| batch.score(r)[i]).collect();
            let fs: Vec<f64> = s.iter().zip(&batch.f).map(|(a, f)| a * f).collect();
            let var = sample_variance(&s);
            let m2 = s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
            if !(var > DEGENERATE_SCORE_VARIANCE * m2) {
                return None;
            }
            let a = sample_covariance(&fs, &s) / var;
            a.is_finite().then_some(a)
        })
        .collect()
}

/// Sampled estimate of the optimal control-variate coefficient from an
/// independent batch of `s_extra` draws. Biased (ratio of estimates).
pub fn sampled_cv_coefficient<F, T>(q: &F, target: &T, rng: &mut RngStream, s_extra: usize) -> Result<Vec<Option<f64>>>
where
    F: VariationalFamily,
    T: Target + ?Sized,
{
    if s_extra < 2 {
        return Err(Error::InvalidArgument("need at least 2 extra samples".into()));
    }
    Ok(cv_coefficient_from_batch(&build_batch(q, target, rng, s_extra)?))
}

/// Estimator selection used by the variance studies.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimatorKind {
    Reinforce,
    VarGrad,
    /// Control variate with a fixed coefficient vector.
    ControlVariate(Vec<f64>),
    /// Control variate with `a = f_bar` on the same batch.
    MeanBaseline,
    /// Control variate with a coefficient estimated from `extra` independent draws.
    /// Coordinates whose coefficient is undefined use `a_i = 0`.
    SampledCv {
        extra: usize,
    },
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Reinforce => "reinforce",
            EstimatorKind::VarGrad => "vargrad",
            EstimatorKind::ControlVariate(_) => "cv",
            EstimatorKind::MeanBaseline => "cv-mean",
            EstimatorKind::SampledCv { .. } => "cv-sampled",
        }
    }

    /// Evaluate on `batch`. `aux` seeds any extra draws, so estimators sharing a
    /// batch stay on common random numbers.
    pub fn estimate<F, T>(&self, batch: &SampleBatch, q: &F, target: &T, aux: &RngStream) -> Result<GradientEstimate>
    where
        F: VariationalFamily,
        T: Target + ?Sized,
    {
        match self {
            EstimatorKind::Reinforce => reinforce(batch),
            EstimatorKind::VarGrad => vargrad(batch),
            EstimatorKind::ControlVariate(a) => cv_estimator(batch, a),
            EstimatorKind::MeanBaseline => cv_estimator(batch, &vec![batch.f_bar; batch.p]),
            EstimatorKind::SampledCv { extra } => {
                let mut rng = aux.child("sampled-cv", 0);
                let a: Vec<f64> = sampled_cv_coefficient(q, target, &mut rng, *extra)?
                    .into_iter()
                    .map(|v| v.unwrap_or(0.0))
                    .collect();
                cv_estimator(batch, &a)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{DiagGaussianParams, MeanFieldBernoulliParams};
    use crate::rng::split_stream;
    use crate::targets::{DiscreteToyModel, GaussianTarget};

    fn gauss_setup() -> (DiagGaussianParams, GaussianTarget) {
        (
            DiagGaussianParams::from_mean_var(vec![3.0], &[3.0]).unwrap(),
            GaussianTarget::new(vec![1.0], vec![1.0], 0.0).unwrap(),
        )
    }

    #[test]
    fn batch_at_posterior_has_zero_f() {
        let q = DiagGaussianParams::from_mean_var(vec![0.5, -1.0], &[2.0, 0.5]).unwrap();
        let t = GaussianTarget::new(vec![0.5, -1.0], vec![2.0, 0.5], 0.0).unwrap();
        let b = build_batch(&q, &t, &mut split_stream(1, "b", 0), 50).unwrap();
        assert!(b.f_values().iter().all(|f| f.abs() < 1e-10));
        assert!(b.elbo_estimate().abs() < 1e-10);
        let g = vargrad(&b).unwrap();
        assert!(g.grad.iter().all(|v| v.abs() < 1e-10));

        let shifted = build_batch(&q, &t.with_log_evidence(2.5), &mut split_stream(1, "b", 0), 50).unwrap();
        for (a, c) in b.f_values().iter().zip(shifted.f_values()) {
            assert!((c - (a - 2.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_is_reproducible() {
        let (q, t) = gauss_setup();
        let a = build_batch(&q, &t, &mut split_stream(3, "b", 0), 4).unwrap();
        let b = build_batch(&q, &t, &mut split_stream(3, "b", 0), 4).unwrap();
        assert_eq!(a.f_bar().to_bits(), b.f_bar().to_bits());
        assert!((a.f_bar() - mean(a.f_values())).abs() < 1e-12);
        assert!(build_batch(&q, &t, &mut split_stream(3, "b", 0), 0).is_err());
    }

    #[test]
    fn elbo_matches_closed_form_kl() {
        let (q, t) = gauss_setup();
        let b = build_batch(&q, &t, &mut split_stream(4, "elbo", 0), 1_000_000).unwrap();
        let kl = 3.5 - 0.5 - 0.5 * 3f64.ln();
        let se = crate::stats::mean_standard_error(b.f_values());
        assert!(
            (b.elbo_estimate() + kl).abs() < 3.0 * se,
            "{} vs {}",
            b.elbo_estimate(),
            -kl
        );
        assert!(b.elbo_estimate() < 0.0);
    }

    #[test]
    fn estimator_algebra() {
        let (q, t) = gauss_setup();
        let b = build_batch(&q, &t, &mut split_stream(5, "alg", 0), 7).unwrap();

        let r = reinforce(&b).unwrap();
        let cv0 = cv_estimator(&b, &[0.0, 0.0]).unwrap();
        assert_eq!(r.grad, cv0.grad);

        let s_over = (b.len() - 1) as f64 / b.len() as f64;
        let cv = cv_estimator(&b, &[b.f_bar(), b.f_bar()]).unwrap();
        let vg = vargrad(&b).unwrap();
        for (c, v) in cv.grad.iter().zip(&vg.grad) {
            assert!((c / s_over - v).abs() <= 1e-12 * v.abs().max(1.0));
        }

        let loo: Vec<f64> = (0..2)
            .map(|i| {
                (0..b.len())
                    .map(|s| (b.f_values()[s] - b.f_bar()) * b.score(s)[i])
                    .sum::<f64>()
                    / 6.0
            })
            .collect();
        for (a, c) in loo.iter().zip(&vg.grad) {
            assert!((a - c).abs() < 1e-12 * c.abs().max(1.0));
        }

        let vialoss = vargrad_via_loss(&b).unwrap();
        for (a, c) in vialoss.grad.iter().zip(&vg.grad) {
            assert!((a - c).abs() / (1.0 + c.abs()) < 1e-12);
        }

        assert!(cv_estimator(&b, &[0.0]).is_err());
    }

    #[test]
    fn single_sample_cases() {
        let (q, t) = gauss_setup();
        let b = build_batch(&q, &t, &mut split_stream(6, "one", 0), 1).unwrap();
        let r = reinforce(&b).unwrap();
        for (g, s) in r.grad.iter().zip(b.score(0)) {
            assert_eq!(*g, b.f_values()[0] * s);
        }
        assert!(matches!(vargrad(&b), Err(Error::InvalidArgument(_))));
        assert!(vargrad_via_loss(&b).is_err());
    }

    #[test]
    fn two_sample_hand_expansion() {
        let (q, t) = gauss_setup();
        let b = build_batch(&q, &t, &mut split_stream(7, "two", 0), 2).unwrap();
        let (f1, f2) = (b.f_values()[0], b.f_values()[1]);
        let g = vargrad_via_loss(&b).unwrap();
        for i in 0..2 {
            let expect = (f1 - f2) / 2.0 * (b.score(0)[i] - b.score(1)[i]);
            assert!((g.grad[i] - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn translation_behaviour() {
        let (q, t) = gauss_setup();
        let b = build_batch(&q, &t, &mut split_stream(8, "shift", 0), 10).unwrap();
        let c = 3.7;
        let sb = b.shifted(c);
        let (v0, v1) = (vargrad(&b).unwrap(), vargrad(&sb).unwrap());
        for (a, z) in v0.grad.iter().zip(&v1.grad) {
            assert!((a - z).abs() < 1e-10);
        }
        let (r0, r1) = (reinforce(&b).unwrap(), reinforce(&sb).unwrap());
        let ms = b.mean_score();
        for i in 0..2 {
            assert!((r1.grad[i] - r0.grad[i] - c * ms[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_f_coefficient_is_the_constant() {
        // Posterior-matching q shifted by log evidence: f = -c for every draw
        let q = DiagGaussianParams::from_mean_var(vec![0.0], &[1.0]).unwrap();
        let t = GaussianTarget::new(vec![0.0], vec![1.0], -1.75).unwrap();
        let a = sampled_cv_coefficient(&q, &t, &mut split_stream(9, "cv", 0), 10).unwrap();
        for v in a {
            assert!((v.unwrap() - 1.75).abs() < 1e-10);
        }
        assert!(sampled_cv_coefficient(&q, &t, &mut split_stream(9, "cv", 0), 1).is_err());
    }

    #[test]
    fn saturated_bernoulli_coefficient_is_flagged() {
        let q = MeanFieldBernoulliParams::new(vec![f64::INFINITY, 0.0]).unwrap();
        let t = DiscreteToyModel::from_mean_field_posterior(&[0.6, 0.4], 0.0).unwrap();
        let a = sampled_cv_coefficient(&q, &t, &mut split_stream(10, "cv", 0), 50).unwrap();
        assert!(a[0].is_none());
        assert!(a[1].is_some());
    }

    #[test]
    fn sampled_cv_falls_back_to_zero_for_flagged_coordinates() {
        let q = MeanFieldBernoulliParams::new(vec![f64::INFINITY]).unwrap();
        let t = DiscreteToyModel::from_mean_field_posterior(&[0.6], 0.0).unwrap();
        let b = build_batch(&q, &t, &mut split_stream(11, "b", 0), 4).unwrap();
        let aux = split_stream(11, "aux", 0);
        let g = EstimatorKind::SampledCv { extra: 2 }
            .estimate(&b, &q, &t, &aux)
            .unwrap();
        assert_eq!(g.grad, reinforce(&b).unwrap().grad);
    }
}
