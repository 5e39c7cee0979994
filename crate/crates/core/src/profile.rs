//! Language profiles: the per-target-language tag sets, pronoun groups,
//! entity category map and every weight the metrics use.
//!
//! Profiles are TOML files. The English and German profiles ship with the
//! crate (see `profiles/`) and are available through
//! [`LanguageProfile::english`] and [`LanguageProfile::german`].

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CoarseCategory;
use crate::scoring::Component;

const ENGLISH: &str = include_str!("../profiles/en.toml");
const GERMAN: &str = include_str!("../profiles/de.toml");

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid profile syntax: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {labels} labels but {weights} weights")]
    LengthMismatch { field: &'static str, labels: usize, weights: usize },
    #[error("{field} contains a negative or non-finite weight")]
    InvalidWeight { field: String },
    #[error("{field} needs at least one positive weight")]
    NoPositiveWeight { field: &'static str },
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("smoothing_epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("unknown score component '{0}' in component_weights")]
    UnknownComponent(String),
    #[error("ngram_orders must be non-empty, distinct and positive")]
    BadNgramOrders,
    #[error("'{0}' appears more than once across {1}")]
    Duplicate(String, &'static str),
}

/// Where a fine NER tag lands after the coarse merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityClass {
    Person,
    NonPerson,
    Ignore,
}

impl EntityClass {
    pub fn coarse(self) -> Option<CoarseCategory> {
        match self {
            EntityClass::Person => Some(CoarseCategory::Person),
            EntityClass::NonPerson => Some(CoarseCategory::NonPerson),
            EntityClass::Ignore => None,
        }
    }
}

/// Rule for the entity weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntityWeighting {
    /// `"uniform"`: every entity label weighs 1.
    Rule(UniformRule),
    /// `{ PERSON = .., NON_PERSON = .. }`: one weight per coarse category.
    PerCategory {
        #[serde(rename = "PERSON")]
        person: f64,
        #[serde(rename = "NON_PERSON")]
        non_person: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniformRule {
    Uniform,
}

impl Default for EntityWeighting {
    fn default() -> Self {
        EntityWeighting::Rule(UniformRule::Uniform)
    }
}

impl EntityWeighting {
    pub fn weight(&self, category: CoarseCategory) -> f64 {
        match self {
            EntityWeighting::Rule(UniformRule::Uniform) => 1.0,
            EntityWeighting::PerCategory { person, non_person } => match category {
                CoarseCategory::Person => *person,
                CoarseCategory::NonPerson => *non_person,
            },
        }
    }
}

/// How component scores are combined into a document total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanKind {
    Geometric,
    Arithmetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageProfile {
    #[serde(default)]
    pub language: String,
    pub tense_tags: Vec<String>,
    pub tense_weights: Vec<f64>,
    pub pronoun_groups: Vec<Vec<String>>,
    pub pronoun_weights: Vec<f64>,
    #[serde(default)]
    pub entity_categories: BTreeMap<String, EntityClass>,
    #[serde(default)]
    pub entity_weighting: EntityWeighting,
    #[serde(default = "default_orders")]
    pub ngram_orders: Vec<usize>,
    #[serde(default)]
    pub component_weights: BTreeMap<String, f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epsilon")]
    pub smoothing_epsilon: f64,
    /// Mean used by the distance variants. Recall variants always use the
    /// weighted geometric mean.
    #[serde(default = "default_distance_mean")]
    pub distance_mean: MeanKind,
}

fn default_orders() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn default_alpha() -> f64 {
    2.0
}
fn default_epsilon() -> f64 {
    1e-9
}
fn default_distance_mean() -> MeanKind {
    MeanKind::Arithmetic
}

impl LanguageProfile {
    pub fn english() -> Self {
        Self::from_toml_str(ENGLISH).expect("shipped English profile is valid")
    }

    pub fn german() -> Self {
        Self::from_toml_str(GERMAN).expect("shipped German profile is valid")
    }

    /// Looks up a shipped profile by language code.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "en" | "english" => Some(Self::english()),
            "de" | "german" => Some(Self::german()),
            _ => None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ProfileError> {
        let mut profile: LanguageProfile = toml::from_str(text)?;
        profile.normalize();
        profile.validate()?;
        Ok(profile)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("profile serializes to TOML")
    }

    fn normalize(&mut self) {
        for group in &mut self.pronoun_groups {
            for form in group.iter_mut() {
                *form = form.trim().to_lowercase();
            }
        }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        check_axis("tense_weights", self.tense_tags.len(), &self.tense_weights)?;
        check_axis("pronoun_weights", self.pronoun_groups.len(), &self.pronoun_weights)?;

        let mut seen = HashSet::new();
        for tag in &self.tense_tags {
            if !seen.insert(tag.as_str()) {
                return Err(ProfileError::Duplicate(tag.clone(), "tense_tags"));
            }
        }
        let mut seen = HashSet::new();
        for form in self.pronoun_groups.iter().flatten() {
            if !seen.insert(form.as_str()) {
                return Err(ProfileError::Duplicate(form.clone(), "pronoun_groups"));
            }
        }

        if let EntityWeighting::PerCategory { person, non_person } = self.entity_weighting {
            if !(person.is_finite() && person >= 0.0 && non_person.is_finite() && non_person >= 0.0) {
                return Err(ProfileError::InvalidWeight { field: "entity_weighting".into() });
            }
        }

        let mut orders = HashSet::new();
        if self.ngram_orders.is_empty() || self.ngram_orders.iter().any(|&n| n == 0 || !orders.insert(n)) {
            return Err(ProfileError::BadNgramOrders);
        }

        for (name, &w) in &self.component_weights {
            if name.parse::<Component>().is_err() {
                return Err(ProfileError::UnknownComponent(name.clone()));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(ProfileError::InvalidWeight { field: format!("component_weights.{name}") });
            }
        }

        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ProfileError::NonPositiveAlpha(self.alpha));
        }
        if !(self.smoothing_epsilon.is_finite() && self.smoothing_epsilon > 0.0) {
            return Err(ProfileError::NonPositiveEpsilon(self.smoothing_epsilon));
        }
        Ok(())
    }

    /// Index of the pronoun group containing `surface`, compared case-insensitively.
    pub fn pronoun_group(&self, surface: &str) -> Option<usize> {
        let lowered = surface.to_lowercase();
        self.pronoun_groups.iter().position(|group| group.contains(&lowered))
    }

    /// Display id for a pronoun group, e.g. `he/him/his`.
    pub fn pronoun_group_name(&self, index: usize) -> String {
        self.pronoun_groups[index].join("/")
    }

    /// `None` means the tag is not in the map at all.
    pub fn entity_class(&self, fine_tag: &str) -> Option<EntityClass> {
        self.entity_categories.get(fine_tag).copied()
    }

    /// Aggregation weight for a component; components not listed weigh 1.
    pub fn component_weight(&self, component: Component) -> f64 {
        self.component_weights.get(&component.to_string()).copied().unwrap_or(1.0)
    }
}

fn check_axis(field: &'static str, labels: usize, weights: &[f64]) -> Result<(), ProfileError> {
    if labels != weights.len() {
        return Err(ProfileError::LengthMismatch { field, labels, weights: weights.len() });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(ProfileError::InvalidWeight { field: field.into() });
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(ProfileError::NoPositiveWeight { field });
    }
    Ok(())
}

pub fn load_profile(path: impl AsRef<Path>) -> Result<LanguageProfile, ProfileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProfileError::Io { path: path.to_path_buf(), source })?;
    LanguageProfile::from_toml_str(&text)
}
