//! Recall- and distance-based document scores.
//!
//! Every family of checkpoints is scored independently against each
//! reference. Per-sentence count rows are concatenated column by column, so
//! only the document totals of each label enter the ratio; this also makes
//! the score independent of how candidate and reference are segmented.
//! For every component the best reference is chosen on its own (largest
//! recall, or smallest distance), and the chosen component values are then
//! combined into a document total.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::checkpoint::{apply_weights, build_axes, count_checkpoints, Family, WeightError, WeightedCounts};
use crate::corpus::AnnotatedDocument;
use crate::profile::{LanguageProfile, MeanKind};
use crate::scalar::Scalar;
use crate::stats;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("at least one reference is required")]
    NoReferences,
    #[error("candidate '{candidate}' paired with reference '{reference}'")]
    DocIdMismatch { candidate: String, reference: String },
    #[error("reference {reference} of document '{doc_id}' has no tokens")]
    ZeroLengthReference { doc_id: String, reference: usize },
    #[error(
        "variant {variant} needs ambiguity annotations, but no reference of document '{doc_id}' has an \"ambiguity\" field"
    )]
    MissingAmbiguity { doc_id: String, variant: Variant },
    #[error("candidate and reference counts are over different axes")]
    AxisMismatch,
    #[error("no defined component with positive weight")]
    NoDefinedComponents,
    #[error("reference length must be positive")]
    ZeroReferenceLength,
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("the candidate corpus is empty")]
    EmptyCorpus,
    #[error("reference file {reference}: missing doc_ids {missing:?}, extra doc_ids {extra:?}")]
    CorpusMismatch { reference: usize, missing: Vec<String>, extra: Vec<String> },
    #[error("document '{doc_id}': {source}")]
    InDocument {
        doc_id: String,
        #[source]
        source: Box<ScoreError>,
    },
}

/// One term of the combined score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Ngram(usize),
    Entity,
    Tense,
    Pronoun,
    Ambiguity,
}

impl Component {
    pub fn of(family: Family) -> Self {
        match family {
            Family::Entity => Component::Entity,
            Family::Tense => Component::Tense,
            Family::Pronoun => Component::Pronoun,
            Family::Ngram(n) => Component::Ngram(n),
            Family::Ambiguity => Component::Ambiguity,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Ngram(n) => write!(f, "{n}g"),
            Component::Entity => f.write_str("E"),
            Component::Tense => f.write_str("V"),
            Component::Pronoun => f.write_str("P"),
            Component::Ambiguity => f.write_str("A"),
        }
    }
}

impl FromStr for Component {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E" => Ok(Component::Entity),
            "V" => Ok(Component::Tense),
            "P" => Ok(Component::Pronoun),
            "A" => Ok(Component::Ambiguity),
            _ => s
                .strip_suffix('g')
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n > 0)
                .map(Component::Ngram)
                .ok_or_else(|| format!("unknown component '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Blond,
    DBlond,
    BlondD,
    DBlondD,
    BlondPlus,
    DBlondPlus,
    BlondDPlus,
    DBlondDPlus,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Blond,
        Variant::DBlond,
        Variant::BlondD,
        Variant::DBlondD,
        Variant::BlondPlus,
        Variant::DBlondPlus,
        Variant::BlondDPlus,
        Variant::DBlondDPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Blond => "blond",
            Variant::DBlond => "dblond",
            Variant::BlondD => "blond-d",
            Variant::DBlondD => "dblond-d",
            Variant::BlondPlus => "blond+",
            Variant::DBlondPlus => "dblond+",
            Variant::BlondDPlus => "blond-d+",
            Variant::DBlondDPlus => "dblond-d+",
        }
    }

    pub fn is_distance(self) -> bool {
        matches!(self, Variant::BlondD | Variant::DBlondD | Variant::BlondDPlus | Variant::DBlondDPlus)
    }

    /// Whether n-gram components (and, for recall, the long penalty) are included.
    pub fn uses_ngrams(self) -> bool {
        matches!(self, Variant::Blond | Variant::BlondD | Variant::BlondPlus | Variant::BlondDPlus)
    }

    pub fn uses_ambiguity(self) -> bool {
        matches!(self, Variant::BlondPlus | Variant::DBlondPlus | Variant::BlondDPlus | Variant::DBlondDPlus)
    }

    pub fn mode(self) -> SelectionMode {
        if self.is_distance() {
            SelectionMode::Distance
        } else {
            SelectionMode::Recall
        }
    }

    fn includes(self, component: Component) -> bool {
        match component {
            Component::Entity | Component::Tense | Component::Pronoun => true,
            Component::Ngram(_) => self.uses_ngrams(),
            Component::Ambiguity => self.uses_ambiguity(),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = match s.trim().to_lowercase().as_str() {
            "blond" | "bd" => Variant::Blond,
            "dblond" | "dbd" => Variant::DBlond,
            "blond-d" | "bd-d" => Variant::BlondD,
            "dblond-d" | "dbd-d" => Variant::DBlondD,
            "blond+" | "bd+" => Variant::BlondPlus,
            "dblond+" | "dbd+" => Variant::DBlondPlus,
            "blond-d+" | "bd-d+" => Variant::BlondDPlus,
            "dblond-d+" | "dbd-d+" => Variant::DBlondDPlus,
            other => return Err(format!("unknown variant '{other}'")),
        };
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Keep the largest value.
    Recall,
    /// Keep the smallest value.
    Distance,
}

/// A component value against one reference, with its denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured<T> {
    pub value: T,
    pub reference_mass: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentScore<T> {
    pub component: Component,
    /// Zero when undefined.
    pub value: T,
    pub chosen_reference: Option<usize>,
    pub defined: bool,
    /// Denominator of the chosen reference, used for smoothing.
    pub reference_mass: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport<T> {
    pub doc_id: String,
    pub variant: Variant,
    pub components: Vec<ComponentScore<T>>,
    pub length_penalty: T,
    /// Combined score ×100.
    pub total: T,
}

impl<T: Scalar> ScoreReport<T> {
    pub fn component(&self, component: Component) -> Option<&ComponentScore<T>> {
        self.components.iter().find(|c| c.component == component)
    }

    pub fn to_json(&self) -> Value {
        let mut components = Map::new();
        for c in &self.components {
            components.insert(
                c.component.to_string(),
                json!({
                    "value": c.defined.then(|| c.value.as_f64()),
                    "chosen_reference": c.chosen_reference,
                    "defined": c.defined,
                }),
            );
        }
        json!({
            "doc_id": self.doc_id,
            "variant": self.variant.name(),
            "total": self.total.as_f64(),
            "lp": self.length_penalty.as_f64(),
            "components": components,
        })
    }
}

fn same_axis<T>(a: &WeightedCounts<T>, b: &WeightedCounts<T>) -> bool
where
    T: Copy,
{
    Arc::ptr_eq(a.axis(), b.axis()) || a.axis() == b.axis()
}

/// Matched weighted mass over reference weighted mass. `None` when the
/// reference mass is zero.
pub fn recall_component<T: Scalar>(
    reference: &WeightedCounts<T>,
    candidate: &WeightedCounts<T>,
) -> Result<Option<Measured<T>>, ScoreError> {
    if !same_axis(reference, candidate) {
        return Err(ScoreError::AxisMismatch);
    }
    let r = reference.column_totals();
    let c = candidate.column_totals();
    let mass: T = r.iter().copied().sum();
    if mass <= T::zero() {
        return Ok(None);
    }
    let matched: T = r.iter().zip(&c).map(|(&a, &b)| a.min(b)).sum();
    Ok(Some(Measured { value: matched / mass, reference_mass: mass }))
}

/// `(Σ |x|^α)^(1/α)`.
pub fn alpha_norm<T: Scalar>(values: impl IntoIterator<Item = T>, alpha: T) -> T {
    let sum: T = values.into_iter().map(|x| x.abs().powf(alpha)).sum();
    sum.powf(alpha.recip())
}

/// α-norm of the count difference over the α-norm of the reference counts.
/// `None` when the reference norm is zero.
pub fn distance_component<T: Scalar>(
    reference: &WeightedCounts<T>,
    candidate: &WeightedCounts<T>,
    alpha: T,
) -> Result<Option<Measured<T>>, ScoreError> {
    if !same_axis(reference, candidate) {
        return Err(ScoreError::AxisMismatch);
    }
    let r = reference.column_totals();
    let c = candidate.column_totals();
    let mass = alpha_norm(r.iter().copied(), alpha);
    if mass <= T::zero() {
        return Ok(None);
    }
    let diff = alpha_norm(r.iter().zip(&c).map(|(&a, &b)| a - b), alpha);
    Ok(Some(Measured { value: diff / mass, reference_mass: mass }))
}

/// Picks the best defined value across references; ties go to the lowest index.
pub fn select_reference<T: Scalar>(
    component: Component,
    per_reference: &[Option<Measured<T>>],
    mode: SelectionMode,
) -> Result<ComponentScore<T>, ScoreError> {
    if per_reference.is_empty() {
        return Err(ScoreError::NoReferences);
    }
    let mut best: Option<(usize, Measured<T>)> = None;
    for (i, m) in per_reference.iter().enumerate() {
        let Some(m) = m else { continue };
        let better = match (&best, mode) {
            (None, _) => true,
            (Some((_, b)), SelectionMode::Recall) => m.value > b.value,
            (Some((_, b)), SelectionMode::Distance) => m.value < b.value,
        };
        if better {
            best = Some((i, *m));
        }
    }
    Ok(match best {
        Some((i, m)) => ComponentScore {
            component,
            value: m.value,
            chosen_reference: Some(i),
            defined: true,
            reference_mass: m.reference_mass,
        },
        None => ComponentScore {
            component,
            value: T::zero(),
            chosen_reference: None,
            defined: false,
            reference_mass: T::zero(),
        },
    })
}

/// `exp(1 - c/r)` for candidates at least as long as the reference, else 1.
pub fn length_penalty<T: Scalar>(candidate_len: usize, reference_len: usize) -> Result<T, ScoreError> {
    if reference_len == 0 {
        return Err(ScoreError::ZeroReferenceLength);
    }
    if candidate_len >= reference_len {
        let ratio = T::from_count(candidate_len) / T::from_count(reference_len);
        Ok((T::one() - ratio).exp())
    } else {
        Ok(T::one())
    }
}

/// How [`aggregate`] combines component values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combine<T> {
    pub mean: MeanKind,
    /// Additive smoothing applied to every value before a geometric mean;
    /// `None` disables smoothing.
    pub epsilon: Option<T>,
}

impl<T: Scalar> Combine<T> {
    pub fn for_mode(mode: SelectionMode, profile: &LanguageProfile) -> Self {
        match mode {
            SelectionMode::Recall => {
                Combine { mean: MeanKind::Geometric, epsilon: Some(T::from_f64_lossy(profile.smoothing_epsilon)) }
            }
            SelectionMode::Distance => Combine { mean: profile.distance_mean, epsilon: None },
        }
    }
}

/// Weighted mean over the defined components (weights renormalized over
/// them), multiplied by `penalty`, ×100.
pub fn aggregate<T: Scalar>(
    components: &[ComponentScore<T>],
    weight: impl Fn(Component) -> T,
    penalty: T,
    combine: Combine<T>,
) -> Result<T, ScoreError> {
    let mut total_weight = T::zero();
    let mut acc = T::zero();
    for c in components.iter().filter(|c| c.defined) {
        let w = weight(c.component);
        if w <= T::zero() {
            continue;
        }
        total_weight = total_weight + w;
        match combine.mean {
            MeanKind::Geometric => {
                let v = match combine.epsilon {
                    Some(eps) => (c.value * c.reference_mass + eps) / (c.reference_mass + eps),
                    None => c.value,
                };
                acc = acc + w * v.ln();
            }
            MeanKind::Arithmetic => acc = acc + w * c.value,
        }
    }
    if total_weight <= T::zero() {
        return Err(ScoreError::NoDefinedComponents);
    }
    let mean = match combine.mean {
        MeanKind::Geometric => (acc / total_weight).exp(),
        MeanKind::Arithmetic => acc / total_weight,
    };
    Ok(penalty * mean * T::hundred())
}

struct ComponentCounts<T> {
    component: Component,
    reference: WeightedCounts<T>,
    candidate: WeightedCounts<T>,
}

/// Counts for one candidate against all of its references, reusable across
/// variants.
pub struct PreparedDocument<'a, T> {
    candidate: &'a AnnotatedDocument,
    references: &'a [AnnotatedDocument],
    profile: &'a LanguageProfile,
    per_reference: Vec<Vec<ComponentCounts<T>>>,
}

pub fn prepare<'a, T: Scalar>(
    candidate: &'a AnnotatedDocument,
    references: &'a [AnnotatedDocument],
    profile: &'a LanguageProfile,
) -> Result<PreparedDocument<'a, T>, ScoreError> {
    if references.is_empty() {
        return Err(ScoreError::NoReferences);
    }
    let mut per_reference = Vec::with_capacity(references.len());
    for (i, reference) in references.iter().enumerate() {
        if reference.doc_id != candidate.doc_id {
            return Err(ScoreError::DocIdMismatch {
                candidate: candidate.doc_id.clone(),
                reference: reference.doc_id.clone(),
            });
        }
        if reference.token_count() == 0 {
            return Err(ScoreError::ZeroLengthReference { doc_id: reference.doc_id.clone(), reference: i });
        }
        let mut families = Vec::new();
        for axis in build_axes(reference, profile) {
            families.push(ComponentCounts {
                component: Component::of(axis.family()),
                reference: apply_weights(&count_checkpoints(reference, &axis), profile)?,
                candidate: apply_weights(&count_checkpoints(candidate, &axis), profile)?,
            });
        }
        per_reference.push(families);
    }
    Ok(PreparedDocument { candidate, references, profile, per_reference })
}

impl<T: Scalar> PreparedDocument<'_, T> {
    fn components(&self, variant: Variant) -> Vec<Component> {
        let mut set: Vec<Component> = vec![Component::Entity, Component::Tense, Component::Pronoun];
        if variant.uses_ngrams() {
            set.extend(self.profile.ngram_orders.iter().map(|&n| Component::Ngram(n)));
        }
        if variant.uses_ambiguity() {
            set.push(Component::Ambiguity);
        }
        set.sort();
        set
    }

    pub fn score(&self, variant: Variant) -> Result<ScoreReport<T>, ScoreError> {
        if variant.uses_ambiguity() && self.references.iter().all(|r| r.ambiguity.is_none()) {
            return Err(ScoreError::MissingAmbiguity { doc_id: self.candidate.doc_id.clone(), variant });
        }
        let mode = variant.mode();
        let alpha = T::from_f64_lossy(self.profile.alpha);
        let mut components = Vec::new();
        for component in self.components(variant) {
            debug_assert!(variant.includes(component));
            let mut values = Vec::with_capacity(self.per_reference.len());
            for families in &self.per_reference {
                let measured = match families.iter().find(|f| f.component == component) {
                    None => None,
                    Some(f) => match mode {
                        SelectionMode::Recall => recall_component(&f.reference, &f.candidate)?,
                        SelectionMode::Distance => distance_component(&f.reference, &f.candidate, alpha)?,
                    },
                };
                values.push(measured);
            }
            components.push(select_reference(component, &values, mode)?);
        }

        let penalty = if variant.uses_ngrams() && mode == SelectionMode::Recall {
            let chosen = self
                .profile
                .ngram_orders
                .iter()
                .copied()
                .min()
                .and_then(|n| components.iter().find(|c| c.component == Component::Ngram(n)))
                .and_then(|c| c.chosen_reference)
                .unwrap_or(0);
            length_penalty(self.candidate.token_count(), self.references[chosen].token_count())?
        } else {
            T::one()
        };

        let profile = self.profile;
        let total = aggregate(
            &components,
            |c| T::from_f64_lossy(profile.component_weight(c)),
            penalty,
            Combine::for_mode(mode, profile),
        )?;
        Ok(ScoreReport { doc_id: self.candidate.doc_id.clone(), variant, components, length_penalty: penalty, total })
    }
}

pub fn score_document<T: Scalar>(
    candidate: &AnnotatedDocument,
    references: &[AnnotatedDocument],
    profile: &LanguageProfile,
    variant: Variant,
) -> Result<ScoreReport<T>, ScoreError> {
    prepare(candidate, references, profile)?.score(variant)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSummary<T> {
    pub variant: Variant,
    pub mean: T,
    /// Population variance (denominator n).
    pub variance: T,
    pub n_docs: usize,
}

impl<T: Scalar> CorpusSummary<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "variant": self.variant.name(),
            "mean": self.mean.as_f64(),
            "variance": self.variance.as_f64(),
            "variance_denominator": "n",
            "n_docs": self.n_docs,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusScores<T> {
    /// Sorted by doc_id.
    pub reports: Vec<ScoreReport<T>>,
    pub summary: CorpusSummary<T>,
}

/// Pairs candidate documents with their references by doc_id. Every
/// reference corpus must cover exactly the candidate doc_ids.
pub fn pair_corpus<'a>(
    candidates: &'a [AnnotatedDocument],
    references: &'a [Vec<AnnotatedDocument>],
) -> Result<Vec<(&'a AnnotatedDocument, Vec<AnnotatedDocument>)>, ScoreError> {
    if candidates.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    if references.is_empty() {
        return Err(ScoreError::NoReferences);
    }
    let cand_ids: BTreeSet<&str> = candidates.iter().map(|d| d.doc_id.as_str()).collect();
    let mut lookups = Vec::with_capacity(references.len());
    for (i, corpus) in references.iter().enumerate() {
        let by_id: BTreeMap<&str, &AnnotatedDocument> = corpus.iter().map(|d| (d.doc_id.as_str(), d)).collect();
        let ref_ids: BTreeSet<&str> = by_id.keys().copied().collect();
        if ref_ids != cand_ids {
            return Err(ScoreError::CorpusMismatch {
                reference: i,
                missing: cand_ids.difference(&ref_ids).map(|s| s.to_string()).collect(),
                extra: ref_ids.difference(&cand_ids).map(|s| s.to_string()).collect(),
            });
        }
        lookups.push(by_id);
    }
    let mut sorted: Vec<&AnnotatedDocument> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(sorted
        .into_iter()
        .map(|cand| {
            let refs = lookups.iter().map(|m| m[cand.doc_id.as_str()].clone()).collect();
            (cand, refs)
        })
        .collect())
}

/// Scores a corpus under several variants at once, sharing the counting work.
pub fn score_corpus_variants<T: Scalar>(
    candidates: &[AnnotatedDocument],
    references: &[Vec<AnnotatedDocument>],
    profile: &LanguageProfile,
    variants: &[Variant],
) -> Result<Vec<CorpusScores<T>>, ScoreError> {
    let pairs = pair_corpus(candidates, references)?;
    let mut reports: Vec<Vec<ScoreReport<T>>> = vec![Vec::with_capacity(pairs.len()); variants.len()];
    for (cand, refs) in &pairs {
        let in_doc = |e: ScoreError| ScoreError::InDocument { doc_id: cand.doc_id.clone(), source: Box::new(e) };
        let prepared = prepare::<T>(cand, refs, profile).map_err(in_doc)?;
        for (slot, &variant) in reports.iter_mut().zip(variants) {
            slot.push(prepared.score(variant).map_err(in_doc)?);
        }
    }
    Ok(reports
        .into_iter()
        .zip(variants)
        .map(|(reports, &variant)| {
            let totals: Vec<T> = reports.iter().map(|r| r.total).collect();
            let (mean, variance) = stats::mean_variance(&totals).expect("corpus is non-empty");
            CorpusScores { summary: CorpusSummary { variant, mean, variance, n_docs: reports.len() }, reports }
        })
        .collect())
}

pub fn score_corpus<T: Scalar>(
    candidates: &[AnnotatedDocument],
    references: &[Vec<AnnotatedDocument>],
    profile: &LanguageProfile,
    variant: Variant,
) -> Result<CorpusScores<T>, ScoreError> {
    Ok(score_corpus_variants(candidates, references, profile, &[variant])?.remove(0))
}
