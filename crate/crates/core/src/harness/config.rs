//! Experiment configuration.
//!
//! A config is a TOML file whose keys are read as flat dotted names, so
//! `optim.learning_rate = 0.001` and `[optim]\nlearning_rate = 0.001` are the
//! same key. Parsing is strict: unknown keys are rejected with a suggestion,
//! and every error carries the offending line when it can be located.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::gaussian_oracles::Gaussian1DSetting;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>, line: Option<usize>) -> ConfigError {
    ConfigError {
        message: message.into(),
        line,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    TrainLogreg,
    VarianceSweep,
    DeltaRatio,
    GaussianOracles,
    Unbiasedness,
    CvComparison,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::TrainLogreg,
        ExperimentKind::VarianceSweep,
        ExperimentKind::DeltaRatio,
        ExperimentKind::GaussianOracles,
        ExperimentKind::Unbiasedness,
        ExperimentKind::CvComparison,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::TrainLogreg => "train-logreg",
            ExperimentKind::VarianceSweep => "variance-sweep",
            ExperimentKind::DeltaRatio => "delta-ratio",
            ExperimentKind::GaussianOracles => "gaussian-oracles",
            ExperimentKind::Unbiasedness => "unbiasedness",
            ExperimentKind::CvComparison => "cv-comparison",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.iter().find(|k| k.name() == s).copied().ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimKind {
    Sgd,
    Adam,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimConfig {
    pub kind: OptimKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub steps: usize,
    pub log_every: usize,
    pub data_points: usize,
    /// Draws per training gradient.
    pub samples: usize,
    pub is_samples: usize,
    pub elbo_samples: usize,
    pub delta_samples: usize,
    pub cv_extra: usize,
    pub cv_oracle_samples: usize,
    pub init_log_std: f64,
    pub prior_w_var: f64,
    pub prior_b_var: f64,
}

/// One-dimensional Gaussian pair replicated across dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussConfig {
    pub mu: f64,
    pub sigma2: f64,
    pub mu_tilde: f64,
    pub sigma2_tilde: f64,
    pub log_evidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyConfig {
    /// Mean-field posterior probabilities; a random table is used when absent.
    pub posterior: Option<Vec<f64>>,
    /// Variational probabilities; random logits when absent.
    pub q: Option<Vec<f64>>,
    pub scale: f64,
    pub log_evidence: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub dims: Vec<usize>,
    pub samples: Vec<usize>,
    pub replicates: usize,
    pub estimators: Vec<String>,
    pub optim: OptimConfig,
    pub train: TrainConfig,
    pub gauss: GaussConfig,
    pub sweep: Vec<Gaussian1DSetting>,
    /// `[mu, mu_tilde, sigma2, sigma2_tilde]` rows.
    pub oracle_settings: Vec<[f64; 4]>,
    pub delta_samples: usize,
    pub toy: ToyConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Str,
    Int,
    Real,
    IntList,
    StrList,
    RealList,
    RealRows,
}

/// Every accepted key with its type and a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "experiment name (required)"),
    ("seed", "root seed (required)"),
    ("output", "CSV output path; stdout when absent and no --out"),
    ("workers", "worker threads for replicate loops"),
    ("dims", "dimension or list of dimensions"),
    (
        "samples",
        "samples per estimate, or list (S grid); draws for gaussian-oracles",
    ),
    ("replicates", "independent replicates per variance estimate"),
    ("estimators", "estimator names"),
    ("optim.kind", "\"sgd\" or \"adam\""),
    ("optim.learning_rate", "step size"),
    ("optim.beta1", "Adam first-moment decay"),
    ("optim.beta2", "Adam second-moment decay"),
    ("optim.eps", "Adam epsilon"),
    ("train.steps", "optimisation steps"),
    ("train.log_every", "logging cadence in steps"),
    ("train.data_points", "synthetic dataset size N"),
    ("train.samples", "draws per training gradient"),
    ("train.is_samples", "importance samples for log p(x)"),
    ("train.elbo_samples", "draws for the ELBO in the KL estimate"),
    ("train.delta_samples", "draws for delta and E[a]"),
    ("train.cv_extra", "extra draws for the sampled control variate"),
    ("train.cv_oracle_samples", "draws for the oracle control variate"),
    ("train.init_log_std", "initial log standard deviation"),
    ("train.prior_w_var", "prior variance of the weights"),
    ("train.prior_b_var", "prior variance of the bias"),
    ("gauss.mu", "variational mean per dimension"),
    ("gauss.sigma2", "variational variance per dimension"),
    ("gauss.mu_tilde", "posterior mean per dimension"),
    ("gauss.sigma2_tilde", "posterior variance per dimension"),
    ("gauss.log_evidence", "log p(x) of the Gaussian target"),
    ("sweep.grid", "rows [mu, mu_tilde, sigma2, sigma2_tilde, S]"),
    ("oracles.settings", "rows [mu, mu_tilde, sigma2, sigma2_tilde]"),
    ("delta.samples", "draws for delta in delta-ratio"),
    ("toy.posterior", "mean-field posterior probabilities"),
    ("toy.q", "variational probabilities"),
    ("toy.scale", "std of random log-joint table entries"),
    ("toy.log_evidence", "log p(x) for a mean-field toy posterior"),
];

fn kind_of(key: &str) -> Kind {
    match key {
        "experiment" | "output" | "optim.kind" => Kind::Str,
        "estimators" => Kind::StrList,
        "dims" | "samples" => Kind::IntList,
        "toy.posterior" | "toy.q" => Kind::RealList,
        "sweep.grid" | "oracles.settings" => Kind::RealRows,
        k if k.starts_with("optim.")
            || k.starts_with("gauss.")
            || k == "train.init_log_std"
            || k == "train.prior_w_var"
            || k == "train.prior_b_var"
            || k == "toy.scale"
            || k == "toy.log_evidence" =>
        {
            Kind::Real
        }
        _ => Kind::Int,
    }
}

pub const ESTIMATOR_NAMES: &[&str] = &[
    "reinforce",
    "vargrad",
    "cv-mean",
    "cv-analytic",
    "cv-sampled",
    "cv-oracle",
];

fn suggest(key: &str) -> Option<&'static str> {
    let last = key.rsplit('.').next().unwrap_or(key);
    KEYS.iter()
        .map(|(k, _)| {
            let tail = k.rsplit('.').next().unwrap_or(k);
            let d = strsim::levenshtein(key, k).min(strsim::levenshtein(last, tail));
            (d, *k)
        })
        .filter(|(d, k)| *d <= (k.rsplit('.').next().unwrap_or(k).len() / 3).max(2))
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k)
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Best-effort line of the definition of a flattened key.
fn find_line(src: &str, key: &str) -> Option<usize> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut section: Vec<String> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').trim();
            section = name
                .split('.')
                .map(|s| s.trim().trim_matches('"').to_string())
                .collect();
            continue;
        }
        let Some((lhs, _)) = line.split_once('=') else { continue };
        let mut full = section.clone();
        full.extend(lhs.split('.').map(|s| s.trim().trim_matches('"').to_string()));
        if full.len() == parts.len() && full.iter().zip(&parts).all(|(a, b)| a == b) {
            return Some(i + 1);
        }
    }
    None
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out),
            other => out.push((key, other.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Parsed {
    Str(String),
    Int(i64),
    Real(f64),
    IntList(Vec<i64>),
    StrList(Vec<String>),
    RealList(Vec<f64>),
    RealRows(Vec<Vec<f64>>),
}

fn as_real(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn convert(key: &str, v: &toml::Value) -> Result<Parsed, String> {
    let want = kind_of(key);
    let bad = |what: &str| format!("key {key:?} must be {what}");
    Ok(match want {
        Kind::Str => Parsed::Str(v.as_str().ok_or_else(|| bad("a string"))?.to_string()),
        Kind::Int => Parsed::Int(v.as_integer().ok_or_else(|| bad("an integer"))?),
        Kind::Real => Parsed::Real(as_real(v).ok_or_else(|| bad("a number"))?),
        Kind::IntList => match v {
            toml::Value::Integer(i) => Parsed::IntList(vec![*i]),
            toml::Value::Array(a) => Parsed::IntList(
                a.iter()
                    .map(|x| x.as_integer())
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("an integer or a list of integers"))?,
            ),
            _ => return Err(bad("an integer or a list of integers")),
        },
        Kind::StrList => match v {
            toml::Value::Array(a) => Parsed::StrList(
                a.iter()
                    .map(|x| x.as_str().map(str::to_string))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("a list of strings"))?,
            ),
            _ => return Err(bad("a list of strings")),
        },
        Kind::RealList => match v {
            toml::Value::Array(a) => Parsed::RealList(
                a.iter()
                    .map(as_real)
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("a list of numbers"))?,
            ),
            _ => return Err(bad("a list of numbers")),
        },
        Kind::RealRows => match v {
            toml::Value::Array(rows) => Parsed::RealRows(
                rows.iter()
                    .map(|r| {
                        r.as_array()
                            .and_then(|r| r.iter().map(as_real).collect::<Option<Vec<f64>>>())
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("a list of numeric rows"))?,
            ),
            _ => return Err(bad("a list of numeric rows")),
        },
    })
}

struct Entries<'a> {
    src: &'a str,
    values: Vec<(String, Parsed)>,
}

impl Entries<'_> {
    fn get(&self, key: &str) -> Option<&Parsed> {
        self.values.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> ConfigError {
        err(message, find_line(self.src, key))
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            Some(Parsed::Int(i)) if *i >= 1 => Ok(*i as usize),
            Some(_) => Err(self.fail(key, format!("key {key:?} must be a positive integer"))),
            None => Ok(default),
        }
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            Some(Parsed::Real(v)) if v.is_finite() => Ok(*v),
            Some(_) => Err(self.fail(key, format!("key {key:?} must be a finite number"))),
            None => Ok(default),
        }
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.real(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.fail(key, format!("key {key:?} must be positive")))
        }
    }

    fn counts(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        match self.get(key) {
            Some(Parsed::IntList(v)) if !v.is_empty() && v.iter().all(|i| *i >= 1) => {
                Ok(v.iter().map(|i| *i as usize).collect())
            }
            Some(_) => Err(self.fail(key, format!("key {key:?} must hold positive integers"))),
            None => Ok(default.to_vec()),
        }
    }

    fn reals(&self, key: &str) -> Option<&Vec<f64>> {
        match self.get(key) {
            Some(Parsed::RealList(v)) => Some(v),
            _ => None,
        }
    }

    fn rows(&self, key: &str) -> Option<&Vec<Vec<f64>>> {
        match self.get(key) {
            Some(Parsed::RealRows(v)) => Some(v),
            _ => None,
        }
    }
}

/// Default variance-sweep grid: 12 points with both signs of the difference,
/// including the S = 9 zero crossing and a point inside the interval where
/// Reinforce has the lower variance at large S.
pub fn default_sweep_grid() -> Vec<Gaussian1DSetting> {
    [
        (1.0, 2.0, 1.0, 1.0, 9),
        (1.0, 2.0, 1.0, 1.0, 3),
        (1.0, 2.0, 1.0, 1.0, 100),
        (0.0, 1.0, 0.5, 1.0, 5),
        (0.0, 1.0, 0.5, 1.0, 100),
        (0.0, 1.0, 0.5, 1.0, 1000),
        (3.0, 1.0, 3.0, 1.0, 4),
        (3.0, 1.0, 3.0, 1.0, 16),
        (0.0, 0.0, 2.0, 1.0, 6),
        (1.0, -1.0, 1.5, 0.5, 2),
        (0.5, 0.0, 1.0, 2.0, 10),
        (2.0, 0.0, 0.6, 0.4, 8),
    ]
    .iter()
    .map(|&(mu, mt, s2, t2, s)| Gaussian1DSetting::new(mu, mt, s2, t2, s).expect("valid default grid"))
    .collect()
}

pub fn default_oracle_settings() -> Vec<[f64; 4]> {
    vec![
        [3.0, 1.0, 3.0, 1.0],
        [0.0, 1.0, 0.5, 1.0],
        [1.0, 2.0, 1.0, 1.0],
        [-1.0, 0.5, 2.0, 0.7],
        [0.3, -0.2, 0.4, 1.5],
        [2.0, 2.0, 1.2, 1.2],
    ]
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let src = std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display()), None))?;
    parse_config_str(&src)
}

pub fn parse_config_str(src: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = src.parse().map_err(|e: toml::de::Error| {
        err(
            e.message().trim().to_string(),
            e.span().map(|s| line_of_offset(src, s.start)),
        )
    })?;
    let mut flat = Vec::new();
    flatten("", &table, &mut flat);

    let mut values = Vec::with_capacity(flat.len());
    for (key, value) in &flat {
        if !KEYS.iter().any(|(k, _)| k == key) {
            let hint = suggest(key)
                .map(|s| format!("; did you mean {s:?}?"))
                .unwrap_or_default();
            return Err(err(format!("unknown key {key:?}{hint}"), find_line(src, key)));
        }
        let parsed = convert(key, value).map_err(|m| err(m, find_line(src, key)))?;
        values.push((key.clone(), parsed));
    }
    let e = Entries { src, values };

    let experiment = match e.get("experiment") {
        Some(Parsed::Str(s)) => s.parse::<ExperimentKind>().map_err(|m| e.fail("experiment", m))?,
        _ => return Err(err("missing required key \"experiment\"", None)),
    };
    let seed = match e.get("seed") {
        Some(Parsed::Int(i)) if *i >= 0 => *i as u64,
        Some(_) => return Err(e.fail("seed", "key \"seed\" must be a non-negative integer")),
        None => return Err(err("missing required key \"seed\"", None)),
    };

    use ExperimentKind::*;
    let (dims, samples, replicates): (&[usize], &[usize], usize) = match experiment {
        TrainLogreg => (&[20, 50], &[4], 1000),
        VarianceSweep => (&[1], &[4], 100_000),
        DeltaRatio => (&[1, 3, 10, 30, 100], &[4], 1000),
        GaussianOracles => (&[1], &[1_000_000], 1),
        Unbiasedness => (&[1, 2, 4], &[4], 100_000),
        CvComparison => (&[3, 30], &[2, 4, 8, 16, 32], 10_000),
    };
    let default_estimators: &[&str] = match experiment {
        Unbiasedness => &["reinforce", "cv-mean", "vargrad"],
        _ => &["reinforce", "vargrad", "cv-analytic", "cv-sampled"],
    };
    let estimators = match e.get("estimators") {
        Some(Parsed::StrList(v)) => {
            for name in v {
                if !ESTIMATOR_NAMES.contains(&name.as_str()) {
                    return Err(e.fail(
                        "estimators",
                        format!(
                            "unknown estimator {name:?}; expected one of {}",
                            ESTIMATOR_NAMES.join(", ")
                        ),
                    ));
                }
            }
            if v.is_empty() {
                return Err(e.fail("estimators", "estimator list is empty"));
            }
            if !matches!(experiment, Unbiasedness | CvComparison) {
                return Err(e.fail("estimators", format!("{experiment} uses a fixed estimator set")));
            }
            if experiment == Unbiasedness && v.iter().any(|n| n == "cv-analytic") {
                return Err(e.fail("estimators", "cv-analytic needs a Gaussian target"));
            }
            v.clone()
        }
        _ => default_estimators.iter().map(|s| s.to_string()).collect(),
    };

    let optim_kind = match e.get("optim.kind") {
        Some(Parsed::Str(s)) if s == "sgd" => OptimKind::Sgd,
        Some(Parsed::Str(s)) if s == "adam" => OptimKind::Adam,
        Some(_) => return Err(e.fail("optim.kind", "optim.kind must be \"sgd\" or \"adam\"")),
        None => OptimKind::Sgd,
    };
    let optim = OptimConfig {
        kind: optim_kind,
        learning_rate: e.positive("optim.learning_rate", 0.001)?,
        beta1: e.real("optim.beta1", crate::optim::Adam::DEFAULT_BETA1)?,
        beta2: e.real("optim.beta2", crate::optim::Adam::DEFAULT_BETA2)?,
        eps: e.positive("optim.eps", crate::optim::Adam::DEFAULT_EPS)?,
    };
    let train = TrainConfig {
        steps: e.count("train.steps", 1000)?,
        log_every: e.count("train.log_every", 10)?,
        data_points: e.count("train.data_points", 100)?,
        samples: e.count("train.samples", 4)?,
        is_samples: e.count("train.is_samples", crate::losses::DEFAULT_N_IS)?,
        elbo_samples: e.count("train.elbo_samples", crate::losses::DEFAULT_N_ELBO)?,
        delta_samples: e.count("train.delta_samples", crate::analysis::DEFAULT_DELTA_SAMPLES)?,
        cv_extra: e.count("train.cv_extra", 2)?,
        cv_oracle_samples: e.count("train.cv_oracle_samples", 1000)?,
        init_log_std: e.real("train.init_log_std", 0.0)?,
        prior_w_var: e.positive("train.prior_w_var", crate::targets::DEFAULT_PRIOR_W_VAR)?,
        prior_b_var: e.positive("train.prior_b_var", crate::targets::DEFAULT_PRIOR_B_VAR)?,
    };
    let gauss = GaussConfig {
        mu: e.real("gauss.mu", 3.0)?,
        sigma2: e.positive("gauss.sigma2", 3.0)?,
        mu_tilde: e.real("gauss.mu_tilde", 1.0)?,
        sigma2_tilde: e.positive("gauss.sigma2_tilde", 1.0)?,
        log_evidence: e.real("gauss.log_evidence", 0.0)?,
    };

    let sweep = match e.rows("sweep.grid") {
        Some(rows) => rows
            .iter()
            .map(|r| {
                if r.len() != 5 || r[4] < 2.0 || r[4].fract() != 0.0 {
                    return Err(e.fail(
                        "sweep.grid",
                        "each sweep.grid row is [mu, mu_tilde, sigma2, sigma2_tilde, S] with integer S >= 2",
                    ));
                }
                Gaussian1DSetting::new(r[0], r[1], r[2], r[3], r[4] as usize)
                    .map_err(|m| e.fail("sweep.grid", m.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => default_sweep_grid(),
    };
    let oracle_settings = match e.rows("oracles.settings") {
        Some(rows) => rows
            .iter()
            .map(|r| {
                if r.len() != 4 || !(r[2] > 0.0 && r[3] > 0.0) {
                    return Err(e.fail(
                        "oracles.settings",
                        "each row is [mu, mu_tilde, sigma2, sigma2_tilde] with positive variances",
                    ));
                }
                Ok([r[0], r[1], r[2], r[3]])
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => default_oracle_settings(),
    };

    let probs = |key: &str| -> Result<Option<Vec<f64>>, ConfigError> {
        match e.reals(key) {
            Some(v) if !v.is_empty() && v.iter().all(|p| *p > 0.0 && *p < 1.0) => Ok(Some(v.clone())),
            Some(_) => Err(e.fail(
                key,
                format!("{key} must be a non-empty list of probabilities in (0, 1)"),
            )),
            None => Ok(None),
        }
    };
    let toy = ToyConfig {
        posterior: probs("toy.posterior")?,
        q: probs("toy.q")?,
        scale: e.positive("toy.scale", 1.0)?,
        log_evidence: e.real("toy.log_evidence", 0.0)?,
    };
    if let (Some(p), Some(q)) = (&toy.posterior, &toy.q) {
        if p.len() != q.len() {
            return Err(e.fail("toy.q", "toy.q and toy.posterior must have the same length"));
        }
    }

    let mut dims = e.counts("dims", dims)?;
    if experiment == Unbiasedness {
        if let Some(p) = toy.posterior.as_ref().or(toy.q.as_ref()) {
            if e.get("dims").is_none() {
                dims = vec![p.len()];
            } else if dims.iter().any(|d| *d != p.len()) {
                return Err(e.fail("dims", "dims must match the length of toy.posterior / toy.q"));
            }
        }
        if dims.iter().any(|d| *d > crate::targets::MAX_TOY_DIM) {
            return Err(e.fail(
                "dims",
                format!("toy models support at most {} dimensions", crate::targets::MAX_TOY_DIM),
            ));
        }
    }
    let samples = e.counts("samples", samples)?;
    let needs_two =
        matches!(experiment, Unbiasedness | CvComparison | TrainLogreg) && estimators.iter().any(|n| n == "vargrad");
    if needs_two && samples.iter().any(|s| *s < 2) {
        return Err(e.fail("samples", "VarGrad needs at least 2 samples"));
    }
    let replicates = e.count("replicates", replicates)?;
    if replicates < 2 && experiment != GaussianOracles {
        return Err(e.fail("replicates", "need at least 2 replicates"));
    }

    Ok(ExperimentConfig {
        experiment,
        seed,
        output: match e.get("output") {
            Some(Parsed::Str(s)) => Some(PathBuf::from(s)),
            _ => None,
        },
        workers: match e.get("workers") {
            Some(_) => Some(e.count("workers", 1)?),
            None => None,
        },
        dims,
        samples,
        replicates,
        estimators,
        optim,
        train,
        gauss,
        sweep,
        oracle_settings,
        delta_samples: e.count("delta.samples", crate::analysis::DEFAULT_DELTA_SAMPLES)?,
        toy,
    })
}
