//! Checkpoint extraction: count axes built from a reference, per-sentence
//! count matrices for any document over those axes, and weighting.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use indexmap::IndexSet;
use thiserror::Error;

use crate::corpus::{AnnotatedDocument, CoarseCategory, Token};
use crate::profile::LanguageProfile;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Entity,
    Tense,
    Pronoun,
    Ngram(usize),
    Ambiguity,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Entity => f.write_str("entity"),
            Family::Tense => f.write_str("tense"),
            Family::Pronoun => f.write_str("pronoun"),
            Family::Ngram(n) => write!(f, "{n}-gram"),
            Family::Ambiguity => f.write_str("ambiguity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Entity { category: CoarseCategory, tokens: Vec<String> },
    Tense(String),
    Pronoun { group: usize, forms: Vec<String> },
    Ngram(Vec<String>),
    Ambiguity(Vec<String>),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Entity { category, tokens } => write!(f, "{category}:{}", tokens.join(" ")),
            Label::Tense(tag) => f.write_str(tag),
            Label::Pronoun { forms, .. } => f.write_str(&forms.join("/")),
            Label::Ngram(tokens) | Label::Ambiguity(tokens) => f.write_str(&tokens.join(" ")),
        }
    }
}

/// Ordered, duplicate-free set of labels for one checkpoint family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountAxis {
    family: Family,
    labels: IndexSet<Label>,
}

impl CountAxis {
    pub fn new(family: Family, labels: impl IntoIterator<Item = Label>) -> Self {
        Self { family, labels: labels.into_iter().collect() }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn labels(&self) -> impl ExactSizeIterator<Item = &Label> {
        self.labels.iter()
    }

    pub fn label(&self, index: usize) -> Option<&Label> {
        self.labels.get_index(index)
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.labels.get_index_of(label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Row-major per-sentence matrix over a [`CountAxis`].
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<V> {
    axis: Arc<CountAxis>,
    rows: usize,
    data: Vec<V>,
}

/// Raw integer counts, one row per sentence.
pub type CheckpointCounts = Matrix<u32>;

/// Counts multiplied column-wise by their checkpoint weights.
pub type WeightedCounts<T> = Matrix<T>;

impl<V: Copy> Matrix<V> {
    pub fn from_rows(axis: Arc<CountAxis>, rows: Vec<Vec<V>>) -> Self {
        let cols = axis.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            assert_eq!(row.len(), cols, "row width must match the axis");
            data.extend_from_slice(row);
        }
        Self { axis, rows: rows.len(), data }
    }

    pub fn axis(&self) -> &Arc<CountAxis> {
        &self.axis
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.axis.len()
    }

    pub fn row(&self, r: usize) -> &[V] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn get(&self, r: usize, c: usize) -> V {
        self.data[r * self.cols() + c]
    }

    fn map<W>(&self, mut f: impl FnMut(usize, V) -> W) -> Matrix<W> {
        let cols = self.cols().max(1);
        Matrix {
            axis: Arc::clone(&self.axis),
            rows: self.rows,
            data: self.data.iter().enumerate().map(|(i, &v)| f(i % cols, v)).collect(),
        }
    }
}

impl CheckpointCounts {
    pub fn column_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.cols()];
        for r in 0..self.rows {
            for (t, &v) in totals.iter_mut().zip(self.row(r)) {
                *t += u64::from(v);
            }
        }
        totals
    }
}

impl<T: Scalar> WeightedCounts<T> {
    /// Sums each column over all sentences.
    pub fn column_totals(&self) -> Vec<T> {
        let mut totals = vec![T::zero(); self.cols()];
        for r in 0..self.rows {
            for (t, &v) in totals.iter_mut().zip(self.row(r)) {
                *t = *t + v;
            }
        }
        totals
    }
}

/// Builds every axis for a reference: entity, tense, pronoun, one n-gram
/// axis per configured order, and an ambiguity axis when the reference
/// carries ambiguity annotations.
pub fn build_axes(reference: &AnnotatedDocument, profile: &LanguageProfile) -> Vec<Arc<CountAxis>> {
    let mut axes = vec![
        entity_axis(reference),
        CountAxis::new(Family::Tense, profile.tense_tags.iter().cloned().map(Label::Tense)),
        CountAxis::new(
            Family::Pronoun,
            profile
                .pronoun_groups
                .iter()
                .enumerate()
                .map(|(group, forms)| Label::Pronoun { group, forms: forms.clone() }),
        ),
    ];
    axes.extend(profile.ngram_orders.iter().map(|&n| ngram_axis(reference, n)));
    if let Some(ambiguity) = &reference.ambiguity {
        axes.push(CountAxis::new(Family::Ambiguity, ambiguity.iter().map(|a| Label::Ambiguity(a.tokens()))));
    }
    axes.into_iter().map(Arc::new).collect()
}

fn entity_axis(reference: &AnnotatedDocument) -> CountAxis {
    CountAxis::new(
        Family::Entity,
        reference.mentions().map(|m| Label::Entity { category: m.coarse_category, tokens: m.tokens.clone() }),
    )
}

fn ngram_axis(reference: &AnnotatedDocument, n: usize) -> CountAxis {
    let labels = reference
        .sentences
        .iter()
        .flat_map(|sentence| sentence.windows(n).map(|w| Label::Ngram(w.iter().map(|t| t.surface.clone()).collect())));
    CountAxis::new(Family::Ngram(n), labels)
}

/// Counts every label of `axis` in each sentence of `doc`.
pub fn count_checkpoints(doc: &AnnotatedDocument, axis: &Arc<CountAxis>) -> CheckpointCounts {
    let cols = axis.len();
    let mut data = vec![0u32; doc.sentences.len() * cols];
    let rows = data.chunks_mut(cols.max(1)).zip(&doc.sentences);

    match axis.family() {
        Family::Entity | Family::Ambiguity => {
            let patterns: Vec<&[String]> = axis
                .labels()
                .map(|l| match l {
                    Label::Entity { tokens, .. } | Label::Ambiguity(tokens) => tokens.as_slice(),
                    other => unreachable!("{other:?} on a phrase axis"),
                })
                .collect();
            for (row, sentence) in rows {
                let surfaces = surfaces(sentence);
                for (cell, pattern) in row.iter_mut().zip(&patterns) {
                    *cell = count_phrase(&surfaces, pattern);
                }
            }
        }
        Family::Tense => {
            let tags: HashMap<&str, usize> = axis
                .labels()
                .enumerate()
                .map(|(i, l)| match l {
                    Label::Tense(tag) => (tag.as_str(), i),
                    other => unreachable!("{other:?} on the tense axis"),
                })
                .collect();
            for (row, sentence) in rows {
                for tok in sentence {
                    if let Some(&c) = tags.get(tok.pos.as_str()) {
                        row[c] += 1;
                    }
                }
            }
        }
        Family::Pronoun => {
            let forms: HashMap<&str, usize> = axis
                .labels()
                .enumerate()
                .flat_map(|(i, l)| match l {
                    Label::Pronoun { forms, .. } => forms.iter().map(move |f| (f.as_str(), i)),
                    other => unreachable!("{other:?} on the pronoun axis"),
                })
                .collect();
            for (row, sentence) in rows {
                for tok in sentence {
                    if let Some(&c) = forms.get(tok.surface.to_lowercase().as_str()) {
                        row[c] += 1;
                    }
                }
            }
        }
        Family::Ngram(n) => {
            let index: HashMap<Vec<&str>, usize> = axis
                .labels()
                .enumerate()
                .map(|(i, l)| match l {
                    Label::Ngram(tokens) => (tokens.iter().map(String::as_str).collect(), i),
                    other => unreachable!("{other:?} on an n-gram axis"),
                })
                .collect();
            for (row, sentence) in rows {
                let surfaces = surfaces(sentence);
                for window in surfaces.windows(n) {
                    if let Some(&c) = index.get(window) {
                        row[c] += 1;
                    }
                }
            }
        }
    }

    Matrix { axis: Arc::clone(axis), rows: doc.sentences.len(), data }
}

fn surfaces(sentence: &[Token]) -> Vec<&str> {
    sentence.iter().map(|t| t.surface.as_str()).collect()
}

/// Non-overlapping, left-to-right greedy occurrences of `pattern`.
fn count_phrase(tokens: &[&str], pattern: &[String]) -> u32 {
    if pattern.is_empty() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + pattern.len() <= tokens.len() {
        if tokens[i..i + pattern.len()].iter().zip(pattern).all(|(a, b)| *a == b) {
            count += 1;
            i += pattern.len();
        } else {
            i += 1;
        }
    }
    count
}

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("{family} axis has {labels} labels but the profile has {weights} weights")]
    LengthMismatch { family: Family, labels: usize, weights: usize },
}

/// Per-column weights for an axis.
pub fn axis_weights<T: Scalar>(axis: &CountAxis, profile: &LanguageProfile) -> Result<Vec<T>, WeightError> {
    let fixed = |weights: &[f64]| {
        if weights.len() != axis.len() {
            return Err(WeightError::LengthMismatch {
                family: axis.family(),
                labels: axis.len(),
                weights: weights.len(),
            });
        }
        Ok(weights.iter().map(|&w| T::from_f64_lossy(w)).collect())
    };
    match axis.family() {
        Family::Tense => fixed(&profile.tense_weights),
        Family::Pronoun => fixed(&profile.pronoun_weights),
        Family::Entity => Ok(axis
            .labels()
            .map(|l| match l {
                Label::Entity { category, .. } => T::from_f64_lossy(profile.entity_weighting.weight(*category)),
                _ => T::one(),
            })
            .collect()),
        Family::Ngram(_) | Family::Ambiguity => Ok(vec![T::one(); axis.len()]),
    }
}

pub fn apply_weights<T: Scalar>(
    counts: &CheckpointCounts,
    profile: &LanguageProfile,
) -> Result<WeightedCounts<T>, WeightError> {
    let weights = axis_weights::<T>(counts.axis(), profile)?;
    Ok(counts.map(|c, v| weights[c] * T::from_u32(v).expect("count converts to scalar")))
}

/// Writes a count matrix as tab-separated text: a comment line naming the
/// document/side/family, a header of labels, then one row per sentence.
pub fn write_counts_tsv(out: &mut dyn Write, doc_id: &str, side: &str, counts: &CheckpointCounts) -> io::Result<()> {
    writeln!(out, "# doc_id={doc_id}\tside={side}\tfamily={}", counts.axis().family())?;
    let header: Vec<String> = counts.axis().labels().map(|l| l.to_string().replace('\t', " ")).collect();
    writeln!(out, "{}", header.join("\t"))?;
    for r in 0..counts.rows() {
        let row: Vec<String> = counts.row(r).iter().map(u32::to_string).collect();
        writeln!(out, "{}", row.join("\t"))?;
    }
    Ok(())
}
