//! Models exposing `log p(x, z)`.
//!
//! * [`GaussianTarget`]: diagonal Gaussian posterior with a declared evidence.
//! * [`LogRegModel`]: Bayesian logistic regression with latent `(w, b)`.
//! * [`DiscreteToyModel`]: a full table over `{0,1}^D`, small enough to enumerate.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::families::{binary_value, enumerate_support, MeanFieldBernoulliParams, VariationalFamily};
use crate::stats::{logsumexp, softplus};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Largest latent dimension accepted by [`DiscreteToyModel`].
pub const MAX_TOY_DIM: usize = 12;

pub trait Target: Send + Sync {
    fn dim(&self) -> usize;

    fn log_joint(&self, z: &[f64]) -> Result<f64>;

    /// `log p(x)` when it is known exactly.
    fn log_evidence(&self) -> Option<f64> {
        None
    }
}

/// `p(x, z) = exp(log_evidence) * N(z; post_mean, diag(post_var))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianTarget {
    post_mean: Vec<f64>,
    post_var: Vec<f64>,
    log_evidence: f64,
}

impl GaussianTarget {
    pub fn new(post_mean: Vec<f64>, post_var: Vec<f64>, log_evidence: f64) -> Result<Self> {
        check_len(post_mean.len(), post_var.len())?;
        if post_mean.is_empty() {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if post_var.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "posterior variances must be positive and finite".into(),
            ));
        }
        if post_mean.iter().any(|m| !m.is_finite()) || !log_evidence.is_finite() {
            return Err(Error::NonFinite("target parameters must be finite".into()));
        }
        Ok(Self {
            post_mean,
            post_var,
            log_evidence,
        })
    }

    /// `D` independent copies of the same one-dimensional target.
    pub fn replicated(mean: f64, var: f64, dim: usize, log_evidence: f64) -> Result<Self> {
        Self::new(vec![mean; dim], vec![var; dim], log_evidence)
    }

    pub fn post_mean(&self) -> &[f64] {
        &self.post_mean
    }

    pub fn post_var(&self) -> &[f64] {
        &self.post_var
    }

    pub fn with_log_evidence(&self, log_evidence: f64) -> Self {
        Self {
            log_evidence,
            ..self.clone()
        }
    }
}

impl Target for GaussianTarget {
    fn dim(&self) -> usize {
        self.post_mean.len()
    }

    fn log_joint(&self, z: &[f64]) -> Result<f64> {
        check_len(self.dim(), z.len())?;
        let mut acc = self.log_evidence;
        for ((zk, m), v) in z.iter().zip(&self.post_mean).zip(&self.post_var) {
            acc -= 0.5 * ((zk - m).powi(2) / v + LN_2PI + v.ln());
        }
        Ok(acc)
    }

    fn log_evidence(&self) -> Option<f64> {
        Some(self.log_evidence)
    }
}

/// Bayesian logistic regression. The latent vector is `[w_0 .. w_{D-1}, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRegModel {
    x: Vec<f64>,
    y: Vec<u8>,
    n: usize,
    d: usize,
    prior_w_var: f64,
    prior_b_var: f64,
    generating: Option<(Vec<f64>, f64)>,
}

pub const DEFAULT_PRIOR_W_VAR: f64 = 25.0;
pub const DEFAULT_PRIOR_B_VAR: f64 = 1.0;

impl LogRegModel {
    /// `x` is row-major `N x D`.
    pub fn new(x: Vec<f64>, y: Vec<u8>, d: usize, prior_w_var: f64, prior_b_var: f64) -> Result<Self> {
        if d == 0 || y.is_empty() {
            return Err(Error::InvalidArgument("need N >= 1 and D >= 1".into()));
        }
        check_len(y.len() * d, x.len())?;
        if x.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "design matrix entries must lie in [-1, 1]".into(),
            ));
        }
        if y.iter().any(|v| *v > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        if !(prior_w_var > 0.0) || !(prior_b_var > 0.0) {
            return Err(Error::InvalidArgument("prior variances must be positive".into()));
        }
        let n = y.len();
        Ok(Self {
            x,
            y,
            n,
            d,
            prior_w_var,
            prior_b_var,
            generating: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of covariates (the latent dimension is `D + 1`).
    pub fn covariates(&self) -> usize {
        self.d
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn prior_w_var(&self) -> f64 {
        self.prior_w_var
    }

    pub fn prior_b_var(&self) -> f64 {
        self.prior_b_var
    }

    /// Weights and bias the data were generated from, if synthetic.
    pub fn generating_params(&self) -> Option<(&[f64], f64)> {
        self.generating.as_ref().map(|(w, b)| (w.as_slice(), *b))
    }

    /// Write the dataset as CSV with columns `x0 .. x{D-1}, y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header: Vec<String> = (0..self.d).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        w.write_record(&header).map_err(io_err)?;
        for (row, label) in self.x.chunks_exact(self.d).zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            rec.push(label.to_string());
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// Read a dataset written by [`LogRegModel::write_csv`].
    pub fn read_csv<R: Read>(input: R, prior_w_var: f64, prior_b_var: f64) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let d = r.headers().map_err(io_err)?.len().saturating_sub(1);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec.map_err(io_err)?;
            for j in 0..d {
                x.push(parse_f64(&rec[j])?);
            }
            y.push(
                rec[d]
                    .trim()
                    .parse::<u8>()
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?,
            );
        }
        Self::new(x, y, d, prior_w_var, prior_b_var)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::InvalidArgument(format!("{s:?}: {e}")))
}

impl Target for LogRegModel {
    fn dim(&self) -> usize {
        self.d + 1
    }

    fn log_joint(&self, z: &[f64]) -> Result<f64> {
        check_len(self.d + 1, z.len())?;
        let (w, b) = (&z[..self.d], z[self.d]);
        let mut acc = 0.0;
        for (row, label) in self.x.chunks_exact(self.d).zip(&self.y) {
            let eta: f64 = row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
            // log sigmoid(eta) = -softplus(-eta), log(1 - sigmoid(eta)) = -softplus(eta)
            acc -= if *label == 1 { softplus(-eta) } else { softplus(eta) };
        }
        let ww: f64 = w.iter().map(|v| v * v).sum();
        acc -= 0.5 * (ww / self.prior_w_var + self.d as f64 * (LN_2PI + self.prior_w_var.ln()));
        acc -= 0.5 * (b * b / self.prior_b_var + LN_2PI + self.prior_b_var.ln());
        Ok(acc)
    }
}

/// Synthetic dataset: `X ~ U[-1,1]^{N x D}`, `w ~ N(0, 25 I)`, `b ~ N(0, 1)`,
/// `y ~ Bernoulli(sigmoid(X w + b))`. The inference prior mirrors the generator.
pub fn synth_logreg_dataset<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<LogRegModel> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("need N >= 1 and D >= 1".into()));
    }
    let w: Vec<f64> = (0..d)
        .map(|_| DEFAULT_PRIOR_W_VAR.sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let b = DEFAULT_PRIOR_B_VAR.sqrt() * rng.sample::<f64, _>(StandardNormal);
    synth_with_weights(rng, n, w, b)
}

/// As [`synth_logreg_dataset`] but with the generating weights supplied.
pub fn synth_logreg_dataset_with_weights<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    w: Vec<f64>,
    b: f64,
) -> Result<LogRegModel> {
    if n == 0 || w.is_empty() {
        return Err(Error::InvalidArgument("need N >= 1 and D >= 1".into()));
    }
    synth_with_weights(rng, n, w, b)
}

fn synth_with_weights<R: Rng + ?Sized>(rng: &mut R, n: usize, w: Vec<f64>, b: f64) -> Result<LogRegModel> {
    let d = w.len();
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let eta: f64 = row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b;
        let u: f64 = rng.random();
        y.push(u8::from(u < crate::stats::sigmoid(eta)));
        x.extend(row);
    }
    let mut model = LogRegModel::new(x, y, d, DEFAULT_PRIOR_W_VAR, DEFAULT_PRIOR_B_VAR)?;
    model.generating = Some((w, b));
    Ok(model)
}

/// `log p(x, z)` tabulated over `{0,1}^D`; entry `b` is the state with `z_k = (b >> k) & 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteToyModel {
    d: usize,
    table: Vec<f64>,
    log_evidence: f64,
}

impl DiscreteToyModel {
    pub fn new(d: usize, table: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if d > MAX_TOY_DIM {
            return Err(Error::TooLarge {
                dim: d,
                limit: MAX_TOY_DIM,
            });
        }
        check_len(1 << d, table.len())?;
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("log joint table entries must be finite".into()));
        }
        let log_evidence = logsumexp(&table);
        Ok(Self { d, table, log_evidence })
    }

    /// Model whose posterior is the product of Bernoulli(`probs_k`) with evidence `exp(log_evidence)`.
    pub fn from_mean_field_posterior(probs: &[f64], log_evidence: f64) -> Result<Self> {
        let d = probs.len();
        if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::InvalidArgument(
                "posterior probabilities must lie in (0, 1)".into(),
            ));
        }
        if d > MAX_TOY_DIM {
            return Err(Error::TooLarge {
                dim: d,
                limit: MAX_TOY_DIM,
            });
        }
        let table = (0..1usize << d)
            .map(|b| {
                log_evidence
                    + (0..d)
                        .map(|k| {
                            if (b >> k) & 1 == 1 {
                                probs[k].ln()
                            } else {
                                (1.0 - probs[k]).ln()
                            }
                        })
                        .sum::<f64>()
            })
            .collect();
        Self::new(d, table)
    }

    /// A correlated model with `N(0, scale^2)` table entries.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, scale: f64) -> Result<Self> {
        if d > MAX_TOY_DIM {
            return Err(Error::TooLarge {
                dim: d,
                limit: MAX_TOY_DIM,
            });
        }
        let table = (0..1usize << d)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self::new(d, table)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn index_of(&self, z: &[f64]) -> Result<usize> {
        check_len(self.d, z.len())?;
        let mut idx = 0;
        for (k, zk) in z.iter().enumerate() {
            if binary_value(*zk)? {
                idx |= 1 << k;
            }
        }
        Ok(idx)
    }

    /// `log p(z | x)` for state index `b`.
    pub fn log_posterior_at(&self, b: usize) -> f64 {
        self.table[b] - self.log_evidence
    }
}

impl Target for DiscreteToyModel {
    fn dim(&self) -> usize {
        self.d
    }

    fn log_joint(&self, z: &[f64]) -> Result<f64> {
        Ok(self.table[self.index_of(z)?])
    }

    fn log_evidence(&self) -> Option<f64> {
        Some(self.log_evidence)
    }
}

/// `KL(q || p(z|x))` and its exact gradient in the logits, by enumeration.
pub fn exact_kl_and_gradient(model: &DiscreteToyModel, q: &MeanFieldBernoulliParams) -> Result<(f64, Vec<f64>)> {
    check_len(model.dim(), q.dim())?;
    let mut kl = 0.0;
    let mut grad = vec![0.0; q.num_params()];
    let mut score = vec![0.0; q.num_params()];
    for (b, (z, prob)) in enumerate_support(q)?.into_iter().enumerate() {
        // d/dphi sum_z q (log q - log p) = sum_z q f score, since E[score] = 0
        let f = q.log_density(&z)? - model.log_posterior_at(b);
        kl += prob * f;
        q.score_into(&z, &mut score)?;
        for (g, s) in grad.iter_mut().zip(&score) {
            *g += prob * f * s;
        }
    }
    Ok((kl, grad))
}
