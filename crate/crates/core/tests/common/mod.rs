//! Shared fixtures and random document generators for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use blond::corpus::{
    load_corpus, AmbiguityRecord, AnnotatedDocument, DocumentRecord, EntityRecord, LoadOptions, TokenRecord,
};
use blond::profile::LanguageProfile;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Loads a single-document fixture with the English profile.
pub fn fixture_doc(name: &str) -> AnnotatedDocument {
    let mut docs = load_corpus(fixture(name), &LanguageProfile::english(), &LoadOptions::default()).unwrap();
    assert_eq!(docs.len(), 1, "{name}");
    docs.remove(0)
}

pub const FILLER: &[(&str, &str)] = &[
    ("the", "DT"),
    ("house", "NN"),
    ("river", "NN"),
    ("letter", "NN"),
    ("quietly", "RB"),
    ("red", "JJ"),
    ("and", "CC"),
    ("walked", "VBD"),
    ("said", "VBD"),
    ("runs", "VBZ"),
    ("will", "MD"),
    ("go", "VB"),
    ("taken", "VBN"),
    ("going", "VBG"),
    ("see", "VBP"),
    ("he", "PRP"),
    ("she", "PRP"),
    ("him", "PRP"),
    ("her", "PRP$"),
    ("it", "PRP"),
    ("they", "PRP"),
    ("their", "PRP$"),
    (".", "."),
];

pub const PRONOUNS: &[&str] = &["he", "she", "it", "they", "his", "her", "them"];
pub const TENSED: &[(&str, &str)] = &[("walked", "VBD"), ("runs", "VBZ"), ("will", "MD"), ("see", "VBP")];

pub const ENTITIES: &[(&[&str], &str)] = &[
    (&["Qiao", "Lian"], "PERSON"),
    (&["Wang", "Wenhao"], "PERSON"),
    (&["Berlin"], "GPE"),
    (&["Acme", "Corp"], "ORG"),
    (&["Tom"], "PERSON"),
];

fn tok(t: &str, p: &str) -> TokenRecord {
    TokenRecord { t: t.into(), p: p.into() }
}

/// A random English-like document with 1–5 sentences of four to ten tokens.
/// The first sentence always opens with a pronoun, a tensed verb and an
/// entity, so every checkpoint family has reference mass. With `ambiguity`
/// one or two terms drawn from the document are annotated.
pub fn random_record(rng: &mut impl Rng, doc_id: &str, ambiguity: bool) -> DocumentRecord {
    let n_sent = rng.gen_range(1..=5);
    let mut sentences = Vec::with_capacity(n_sent);
    let mut entities = Vec::new();
    for s in 0..n_sent {
        let mut sent = Vec::new();
        if s == 0 {
            sent.push(tok(PRONOUNS.choose(rng).unwrap(), "PRP"));
            let (v, p) = TENSED.choose(rng).unwrap();
            sent.push(tok(v, p));
        }
        let target = rng.gen_range(4..=10usize);
        let mut with_entity = s == 0 || rng.gen_bool(0.5);
        while sent.len() < target {
            if with_entity && rng.gen_bool(0.3) {
                let (words, tag) = ENTITIES.choose(rng).unwrap();
                if sent.len() + words.len() <= 10 {
                    entities.push(EntityRecord { s, b: sent.len(), e: sent.len() + words.len(), tag: (*tag).into() });
                    sent.extend(words.iter().map(|w| tok(w, "NNP")));
                    with_entity = false;
                    continue;
                }
            }
            let (w, p) = FILLER.choose(rng).unwrap();
            sent.push(tok(w, p));
        }
        if with_entity {
            // guarantee the mention, replacing the tail if needed
            let (words, tag) = ENTITIES[rng.gen_range(0..ENTITIES.len())];
            let b = sent.len().min(10 - words.len());
            sent.truncate(b);
            entities.push(EntityRecord { s, b, e: b + words.len(), tag: tag.into() });
            sent.extend(words.iter().map(|w| tok(w, "NNP")));
        }
        sentences.push(sent);
    }
    let ambiguity = ambiguity.then(|| {
        (0..rng.gen_range(1..=2usize))
            .map(|_| {
                let s = rng.gen_range(0..sentences.len());
                let sent: &Vec<TokenRecord> = &sentences[s];
                let b = rng.gen_range(0..sent.len());
                let e = (b + rng.gen_range(1..=2)).min(sent.len());
                AmbiguityRecord { s, term: sent[b..e].iter().map(|t| t.t.as_str()).collect::<Vec<_>>().join(" ") }
            })
            .collect()
    });
    DocumentRecord { doc_id: doc_id.into(), sentences, entities, ambiguity }
}

pub fn realize(record: DocumentRecord) -> AnnotatedDocument {
    record.into_document(&LanguageProfile::english(), &LoadOptions::default(), 1).expect("generated record is valid")
}

pub fn random_doc(rng: &mut impl Rng, doc_id: &str, ambiguity: bool) -> AnnotatedDocument {
    realize(random_record(rng, doc_id, ambiguity))
}

/// Replaces roughly `rate` of the filler tokens with other filler tokens;
/// entity tokens are left alone.
pub fn perturb(rng: &mut impl Rng, doc: &AnnotatedDocument, rate: f64) -> AnnotatedDocument {
    let mut record = doc.to_record();
    let protected: Vec<(usize, usize, usize)> = record.entities.iter().map(|e| (e.s, e.b, e.e)).collect();
    for (s, sent) in record.sentences.iter_mut().enumerate() {
        for (i, t) in sent.iter_mut().enumerate() {
            let in_entity = protected.iter().any(|&(ps, b, e)| ps == s && (b..e).contains(&i));
            if !in_entity && rng.gen_bool(rate) {
                let (w, p) = FILLER.choose(rng).unwrap();
                *t = tok(w, p);
            }
        }
    }
    realize(record)
}
