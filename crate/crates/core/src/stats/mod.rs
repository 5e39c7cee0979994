//! Meta-evaluation statistics: per-system summaries, paired t-tests and
//! Pearson correlation with Fisher-transform confidence intervals.

mod special;

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use crate::scalar::Scalar;

pub use special::{ln_gamma, regularized_incomplete_beta, student_t_two_sided};

/// z value for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error("doc_id sets differ: only in first {only_first:?}, only in second {only_second:?}")]
    DocIdMismatch { only_first: Vec<String>, only_second: Vec<String> },
    #[error("duplicate doc_id '{0}'")]
    DuplicateDocId(String),
    #[error("non-finite score for doc_id '{0}'")]
    NonFinite(String),
    #[error("need at least {needed} paired values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(String),
}

impl StatsError {
    pub fn is_io(&self) -> bool {
        matches!(self, StatsError::Io { .. })
    }
}

/// Per-document scores of one (system, metric) pair, sorted by doc_id.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector<T> {
    pub system_id: String,
    pub metric_id: String,
    values: Vec<(String, T)>,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(
        system_id: impl Into<String>,
        metric_id: impl Into<String>,
        values: impl IntoIterator<Item = (String, T)>,
    ) -> Result<Self, StatsError> {
        let mut values: Vec<(String, T)> = values.into_iter().collect();
        values.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in values.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(StatsError::DuplicateDocId(pair[0].0.clone()));
            }
        }
        if let Some((id, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(StatsError::NonFinite(id.clone()));
        }
        Ok(Self { system_id: system_id.into(), metric_id: metric_id.into(), values })
    }

    /// Convenience constructor with doc_ids `0, 1, 2, …` (zero padded).
    pub fn from_scores(metric_id: impl Into<String>, scores: &[T]) -> Self {
        let width = scores.len().to_string().len();
        Self::new("", metric_id, scores.iter().enumerate().map(|(i, &v)| (format!("{i:0width$}"), v)))
            .expect("generated ids are unique")
    }

    pub fn values(&self) -> &[(String, T)] {
        &self.values
    }

    pub fn scores(&self) -> Vec<T> {
        self.values.iter().map(|(_, v)| *v).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn label(&self) -> String {
        match (self.system_id.is_empty(), self.metric_id.is_empty()) {
            (true, true) => "score vector".into(),
            (true, false) => self.metric_id.clone(),
            (false, true) => self.system_id.clone(),
            (false, false) => format!("{}/{}", self.system_id, self.metric_id),
        }
    }
}

/// Reads a `doc_id,score` CSV.
pub fn parse_score_csv<T: Scalar>(
    reader: impl Read,
    source: &str,
    system_id: &str,
    metric_id: &str,
) -> Result<ScoreVector<T>, StatsError> {
    let csv_err = |message: String| StatsError::Csv { path: source.to_string(), message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "doc_id" || &headers[1] != "score" {
        return Err(csv_err(format!(
            "expected header 'doc_id,score', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let score: f64 =
            record[1].parse().map_err(|_| csv_err(format!("line {line}: score '{}' is not a number", &record[1])))?;
        values.push((record[0].to_string(), T::from_f64_lossy(score)));
    }
    ScoreVector::new(system_id, metric_id, values)
}

pub fn read_score_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<ScoreVector<T>, StatsError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| StatsError::Io { path: path.to_path_buf(), source })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    parse_score_csv(file, &path.display().to_string(), stem, "")
}

fn aligned<'a, T: Scalar>(a: &'a ScoreVector<T>, b: &'a ScoreVector<T>) -> Result<Vec<(T, T)>, StatsError> {
    let ids_a: BTreeSet<&str> = a.values.iter().map(|(d, _)| d.as_str()).collect();
    let ids_b: BTreeSet<&str> = b.values.iter().map(|(d, _)| d.as_str()).collect();
    if ids_a != ids_b {
        return Err(StatsError::DocIdMismatch {
            only_first: ids_a.difference(&ids_b).map(|s| s.to_string()).collect(),
            only_second: ids_b.difference(&ids_a).map(|s| s.to_string()).collect(),
        });
    }
    // both sorted by doc_id with equal id sets
    Ok(a.values.iter().zip(&b.values).map(|((_, x), (_, y))| (*x, *y)).collect())
}

/// Mean and population variance.
pub fn mean_variance<T: Scalar>(values: &[T]) -> Option<(T, T)> {
    if values.is_empty() {
        return None;
    }
    let n = T::from_count(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let variance = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    Some((mean, variance))
}

/// Mean and population variance (denominator n) of a score vector.
pub fn summarize<T: Scalar>(scores: &ScoreVector<T>) -> Result<(T, T), StatsError> {
    mean_variance(&scores.scores()).ok_or(StatsError::TooFew { needed: 1, got: 0 })
}

/// Significance bands of the form used in system-comparison tables.
/// Thresholds are closed-open: `p < .05` is `Below05`, and `p = .05` falls
/// in `Above05`. The upper bands are `(.05, .1]`, `(.1, .5]` and `(.5, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignificanceBand {
    Below001,
    Below01,
    Below05,
    Above05,
    Above1,
    Above5,
}

impl SignificanceBand {
    pub fn from_p(p: f64) -> Self {
        if p < 0.001 {
            Self::Below001
        } else if p < 0.01 {
            Self::Below01
        } else if p < 0.05 {
            Self::Below05
        } else if p <= 0.1 {
            Self::Above05
        } else if p <= 0.5 {
            Self::Above1
        } else {
            Self::Above5
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Below001 => "< .001",
            Self::Below01 => "< .01",
            Self::Below05 => "< .05",
            Self::Above05 => "> .05",
            Self::Above1 => "> .1",
            Self::Above5 => "> .5",
        }
    }

    /// Dagger/asterisk marker.
    pub fn marker(self) -> &'static str {
        match self {
            Self::Below001 => "†††",
            Self::Below01 => "††",
            Self::Below05 => "†",
            Self::Above05 => "*",
            Self::Above1 => "**",
            Self::Above5 => "***",
        }
    }
}

impl fmt::Display for SignificanceBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedTResult<T> {
    pub t: T,
    pub n: usize,
    pub mean_difference: T,
    pub p_two_sided: T,
    pub band: SignificanceBand,
}

impl<T: Scalar> PairedTResult<T> {
    pub fn to_json(&self) -> Value {
        let t = self.t.as_f64();
        let t_value = if t.is_finite() {
            json!(t)
        } else if t > 0.0 {
            json!("+inf")
        } else {
            json!("-inf")
        };
        json!({
            "t": t_value,
            "p": self.p_two_sided.as_f64(),
            "band": self.band.label(),
            "marker": self.band.marker(),
            "n": self.n,
            "df": self.n - 1,
            "mean_difference": self.mean_difference.as_f64(),
            "test": "paired two-sided",
        })
    }
}

/// Paired Student t-test on `a - b`.
///
/// When every difference is equal the standard deviation is zero: all-zero
/// differences give `t = 0, p = 1`; otherwise `t = ±∞, p = 0`.
pub fn paired_t<T: Scalar>(a: &ScoreVector<T>, b: &ScoreVector<T>) -> Result<PairedTResult<T>, StatsError> {
    let pairs = aligned(a, b)?;
    let n = pairs.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let diffs: Vec<T> = pairs.iter().map(|&(x, y)| x - y).collect();
    let nf = T::from_count(n);
    let mean = diffs.iter().copied().sum::<T>() / nf;
    let ss: T = diffs.iter().map(|&d| (d - mean) * (d - mean)).sum();
    let (t, p) = if ss == T::zero() {
        if mean == T::zero() {
            (T::zero(), T::one())
        } else {
            (T::infinity().copysign(mean), T::zero())
        }
    } else {
        let sd = (ss / (nf - T::one())).sqrt();
        let t = mean / (sd / nf.sqrt());
        (t, student_t_two_sided(t, nf - T::one()))
    };
    Ok(PairedTResult { t, n, mean_difference: mean, p_two_sided: p, band: SignificanceBand::from_p(p.as_f64()) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult<T> {
    pub r: T,
    pub ci_low: T,
    pub ci_high: T,
    pub n: usize,
}

impl<T: Scalar> CorrelationResult<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "r": self.r.as_f64(),
            "ci_low": self.ci_low.as_f64(),
            "ci_high": self.ci_high.as_f64(),
            "n": self.n,
            "confidence": 0.95,
        })
    }
}

fn product_moment<T: Scalar>(pairs: &[(T, T)], x_label: &str, y_label: &str) -> Result<T, StatsError> {
    let n = T::from_count(pairs.len());
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return Err(StatsError::ZeroVariance(x_label.to_string()));
    }
    if syy == T::zero() {
        return Err(StatsError::ZeroVariance(y_label.to_string()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Pearson product-moment correlation without an interval; needs n ≥ 2.
pub fn pearson_r<T: Scalar>(x: &ScoreVector<T>, y: &ScoreVector<T>) -> Result<T, StatsError> {
    let pairs = aligned(x, y)?;
    if pairs.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: pairs.len() });
    }
    product_moment(&pairs, &x.label(), &y.label())
}

/// `tanh(atanh(r) ± z/√(n−3))`.
pub fn fisher_interval<T: Scalar>(r: T, n: usize) -> (T, T) {
    let z = r.atanh();
    let half = T::from_f64_lossy(Z_95) / T::from_count(n - 3).sqrt();
    ((z - half).tanh(), (z + half).tanh())
}

/// Pearson r with a 95% Fisher confidence interval; needs n ≥ 4.
pub fn pearson<T: Scalar>(x: &ScoreVector<T>, y: &ScoreVector<T>) -> Result<CorrelationResult<T>, StatsError> {
    let pairs = aligned(x, y)?;
    if pairs.len() < 4 {
        return Err(StatsError::TooFew { needed: 4, got: pairs.len() });
    }
    let r = product_moment(&pairs, &x.label(), &y.label())?;
    let (lo, hi) = fisher_interval(r, pairs.len());
    Ok(CorrelationResult { r, ci_low: lo.min(r), ci_high: hi.max(r), n: pairs.len() })
}

/// Symmetric matrix of pairwise Pearson r, with ones on the diagonal.
pub fn correlation_matrix<T: Scalar>(vectors: &[ScoreVector<T>]) -> Result<Vec<Vec<T>>, StatsError> {
    let k = vectors.len();
    let mut m = vec![vec![T::one(); k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let r = pearson_r(&vectors[i], &vectors[j])?;
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}
