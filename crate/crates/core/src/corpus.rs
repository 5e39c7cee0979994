//! Annotated documents and the JSON-lines interchange format.
//!
//! Each line of a corpus file is one document:
//!
//! ```json
//! {"doc_id": "d1",
//!  "sentences": [[{"t": "Qiao", "p": "NNP"}, {"t": "Lian", "p": "NNP"}, {"t": "left", "p": "VBD"}]],
//!  "entities": [{"s": 0, "b": 0, "e": 2, "tag": "PERSON"}],
//!  "ambiguity": [{"s": 0, "term": "left"}]}
//! ```
//!
//! Fine NER tags are mapped to coarse categories through the language
//! profile at load time. Mentions whose tag maps to `IGNORE` are dropped.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{EntityClass, LanguageProfile};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: document '{doc_id}': {problem}")]
    Invalid { line: usize, doc_id: String, problem: String },
    #[error("line {line}: duplicate doc_id '{doc_id}'")]
    DuplicateDocId { line: usize, doc_id: String },
    #[error("line {line}: document '{doc_id}': unknown NER tag '{tag}' (strict mode)")]
    UnknownTag { line: usize, doc_id: String, tag: String },
}

impl CorpusError {
    pub fn is_io(&self) -> bool {
        matches!(self, CorpusError::Io { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoarseCategory {
    Person,
    NonPerson,
}

impl fmt::Display for CoarseCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoarseCategory::Person => "PERSON",
            CoarseCategory::NonPerson => "NON_PERSON",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMention {
    pub start: usize,
    pub end: usize,
    /// Surfaces of the covered tokens.
    pub tokens: Vec<String>,
    pub coarse_category: CoarseCategory,
    pub fine_tag: String,
}

impl EntityMention {
    /// Mention text with tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguityAnnotation {
    pub sentence_index: usize,
    pub term: String,
}

impl AmbiguityAnnotation {
    pub fn tokens(&self) -> Vec<String> {
        self.term.split_whitespace().map(str::to_owned).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub sentences: Vec<Vec<Token>>,
    /// One list of mentions per sentence.
    pub entities: Vec<Vec<EntityMention>>,
    pub ambiguity: Option<Vec<AmbiguityAnnotation>>,
}

impl AnnotatedDocument {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn mentions(&self) -> impl Iterator<Item = &EntityMention> {
        self.entities.iter().flatten()
    }

    pub fn to_record(&self) -> DocumentRecord {
        DocumentRecord {
            doc_id: self.doc_id.clone(),
            sentences: self
                .sentences
                .iter()
                .map(|s| s.iter().map(|t| TokenRecord { t: t.surface.clone(), p: t.pos.clone() }).collect())
                .collect(),
            entities: self
                .entities
                .iter()
                .enumerate()
                .flat_map(|(s, mentions)| {
                    mentions.iter().map(move |m| EntityRecord { s, b: m.start, e: m.end, tag: m.fine_tag.clone() })
                })
                .collect(),
            ambiguity: self.ambiguity.as_ref().map(|list| {
                list.iter().map(|a| AmbiguityRecord { s: a.sentence_index, term: a.term.clone() }).collect()
            }),
        }
    }
}

#[derive(Debug, Default)]
pub struct LoadOptions {
    /// Fail on NER tags missing from the profile instead of ignoring them.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub t: String,
    #[serde(default)]
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub s: usize,
    pub b: usize,
    pub e: usize,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityRecord {
    pub s: usize,
    pub term: String,
}

/// One line of the interchange format, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub sentences: Vec<Vec<TokenRecord>>,
    #[serde(default)]
    pub entities: Vec<EntityRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambiguity: Option<Vec<AmbiguityRecord>>,
}

impl DocumentRecord {
    /// Validates the record and maps fine NER tags through `profile`.
    /// `line` is only used for diagnostics.
    pub fn into_document(
        self,
        profile: &LanguageProfile,
        options: &LoadOptions,
        line: usize,
    ) -> Result<AnnotatedDocument, CorpusError> {
        let doc_id = self.doc_id;
        let invalid = |problem: String| CorpusError::Invalid { line, doc_id: doc_id.clone(), problem };

        if self.sentences.is_empty() {
            return Err(invalid("document has no sentences".into()));
        }
        let mut sentences = Vec::with_capacity(self.sentences.len());
        for (si, sentence) in self.sentences.into_iter().enumerate() {
            if sentence.is_empty() {
                return Err(invalid(format!("sentence {si} has no tokens")));
            }
            let mut tokens = Vec::with_capacity(sentence.len());
            for (ti, tok) in sentence.into_iter().enumerate() {
                if tok.t.trim().is_empty() {
                    return Err(invalid(format!("sentence {si} token {ti} has an empty surface")));
                }
                tokens.push(Token { surface: tok.t, pos: tok.p });
            }
            sentences.push(tokens);
        }

        let mut entities: Vec<Vec<EntityMention>> = vec![Vec::new(); sentences.len()];
        for ent in self.entities {
            let Some(sentence) = sentences.get(ent.s) else {
                return Err(invalid(format!(
                    "entity refers to sentence {} but the document has {}",
                    ent.s,
                    sentences.len()
                )));
            };
            if !(ent.b < ent.e && ent.e <= sentence.len()) {
                return Err(invalid(format!(
                    "entity span [{}, {}) out of bounds in sentence {} of length {}",
                    ent.b,
                    ent.e,
                    ent.s,
                    sentence.len()
                )));
            }
            let coarse = match profile.entity_class(&ent.tag) {
                Some(class) => class.coarse(),
                None if options.strict => {
                    return Err(CorpusError::UnknownTag { line, doc_id: doc_id.clone(), tag: ent.tag })
                }
                None => {
                    log::warn!("line {line}: document '{doc_id}': unknown NER tag '{}' ignored", ent.tag);
                    EntityClass::Ignore.coarse()
                }
            };
            if let Some(coarse_category) = coarse {
                entities[ent.s].push(EntityMention {
                    start: ent.b,
                    end: ent.e,
                    tokens: sentence[ent.b..ent.e].iter().map(|t| t.surface.clone()).collect(),
                    coarse_category,
                    fine_tag: ent.tag,
                });
            }
        }

        let ambiguity = match self.ambiguity {
            None => None,
            Some(list) => {
                let mut out = Vec::with_capacity(list.len());
                for a in list {
                    if a.s >= sentences.len() {
                        return Err(invalid(format!(
                            "ambiguity annotation refers to sentence {} but the document has {}",
                            a.s,
                            sentences.len()
                        )));
                    }
                    if a.term.trim().is_empty() {
                        return Err(invalid(format!("empty ambiguity term in sentence {}", a.s)));
                    }
                    out.push(AmbiguityAnnotation { sentence_index: a.s, term: a.term });
                }
                Some(out)
            }
        };

        Ok(AnnotatedDocument { doc_id, sentences, entities, ambiguity })
    }
}

/// Reads a corpus from any line-oriented source. Blank lines are skipped.
pub fn parse_corpus(
    reader: impl BufRead,
    profile: &LanguageProfile,
    options: &LoadOptions,
) -> Result<Vec<AnnotatedDocument>, CorpusError> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Malformed { line: line_no, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DocumentRecord = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Malformed { line: line_no, message: e.to_string() })?;
        if !ids.insert(record.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId { line: line_no, doc_id: record.doc_id });
        }
        docs.push(record.into_document(profile, options, line_no)?);
    }
    Ok(docs)
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    profile: &LanguageProfile,
    options: &LoadOptions,
) -> Result<Vec<AnnotatedDocument>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_corpus(BufReader::new(file), profile, options)
}

pub fn write_corpus(docs: &[AnnotatedDocument], mut out: impl Write) -> io::Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut out, &doc.to_record())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
