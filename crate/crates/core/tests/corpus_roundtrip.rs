mod common;

use blond::checkpoint::{build_axes, count_checkpoints, Family};
use blond::corpus::{parse_corpus, write_corpus, CorpusError, LoadOptions};
use blond::profile::LanguageProfile;
use common::random_record;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn load(text: &str, strict: bool) -> Result<Vec<blond::corpus::AnnotatedDocument>, CorpusError> {
    parse_corpus(text.as_bytes(), &LanguageProfile::english(), &LoadOptions { strict })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_after_load_reproduces_input(seed in any::<u64>(), n in 1usize..6, amb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lines: Vec<String> = (0..n)
            .map(|i| serde_json::to_string(&random_record(&mut rng, &format!("doc-{i}"), amb)).unwrap())
            .collect();
        // Reformat with different key order and spacing; only content counts.
        let input: String = lines
            .iter()
            .map(|l| {
                let v: Value = serde_json::from_str(l).unwrap();
                format!("{}\n\n", serde_json::to_string_pretty(&v).unwrap().replace('\n', " "))
            })
            .collect();
        let docs = load(&input, true).unwrap();
        let mut out = Vec::new();
        write_corpus(&docs, &mut out).unwrap();
        let written: Vec<Value> = String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        let original: Vec<Value> = lines.iter().map(|l| serde_json::from_str(l).unwrap()).collect();
        prop_assert_eq!(written, original);
    }
}

#[test]
fn ignore_mapped_mentions_never_reach_counts() {
    let line = r#"{"doc_id":"x","sentences":[[{"t":"On","p":"IN"},{"t":"Monday","p":"NNP"},{"t":"Tom","p":"NNP"},{"t":"left","p":"VBD"},{"t":"Berlin","p":"NNP"}]],
        "entities":[{"s":0,"b":1,"e":2,"tag":"DATE"},{"s":0,"b":2,"e":3,"tag":"PERSON"},{"s":0,"b":4,"e":5,"tag":"GPE"}]}"#
        .replace('\n', "");
    let doc = load(&line, false).unwrap().remove(0);
    let kept: Vec<String> = doc.mentions().map(|m| m.text()).collect();
    assert_eq!(kept, ["Tom", "Berlin"]);

    let profile = LanguageProfile::english();
    let axes = build_axes(&doc, &profile);
    let entity = axes.iter().find(|a| a.family() == Family::Entity).unwrap();
    let labels: Vec<String> = entity.labels().map(|l| l.to_string()).collect();
    assert!(labels.iter().all(|l| !l.contains("Monday")), "{labels:?}");
    assert_eq!(labels.len(), 2);
    assert_eq!(count_checkpoints(&doc, entity).column_totals(), [1, 1]);
}

#[test]
fn unknown_tags_warn_by_default_and_fail_when_strict() {
    let line =
        r#"{"doc_id":"x","sentences":[[{"t":"Zorg","p":"NNP"}]],"entities":[{"s":0,"b":0,"e":1,"tag":"ALIEN"}]}"#;
    assert_eq!(load(line, false).unwrap()[0].mentions().count(), 0);
    assert!(matches!(load(line, true), Err(CorpusError::UnknownTag { .. })));
}

#[test]
fn corpus_errors_name_document_and_sentence() {
    let line = r#"{"doc_id":"bad-doc","sentences":[[{"t":"a","p":"DT"}],[{"t":"b","p":"NN"}]],"entities":[{"s":1,"b":0,"e":3,"tag":"PERSON"}]}"#;
    let msg = load(line, false).unwrap_err().to_string();
    assert!(msg.contains("bad-doc") && msg.contains("sentence 1"), "{msg}");

    let dup = format!(
        "{}\n{}\n",
        r#"{"doc_id":"a","sentences":[[{"t":"x","p":"NN"}]]}"#, r#"{"doc_id":"a","sentences":[[{"t":"y","p":"NN"}]]}"#
    );
    assert!(matches!(load(&dup, false), Err(CorpusError::DuplicateDocId { line: 2, .. })));
}
