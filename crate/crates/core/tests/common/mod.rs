#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use pagedex::location::RegionBox;
use pagedex::service::{Engine, ServiceConfig};
use pagedex::store::{
    AnnotationInput, DictionaryManifest, DigitizationInput, EntryFields, IndexKind, IndexState, Language, MarkerInput,
    MetaInput, PageSize, Store,
};

pub fn fixed_clock() -> pagedex::store::Clock {
    Arc::new(|| Utc.with_ymd_and_hms(2024, 1, 15, 10, 0, 0).unwrap())
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub const SPARSE_ANCHORS: &str = "apple\t1\nbanana\t4\ncherry\t7\ngrape\t10\nlemon\t13\nmango\t16\npeach\t19\n";
pub const FULL_ENTRIES: &str = "date\t12\nfig\t12\nkiwi\t14,15\n";

fn meta(contributor: &str) -> MetaInput {
    MetaInput {
        contributor: contributor.into(),
        extra: BTreeMap::new(),
    }
}

/// Two English dictionaries: `farhang` (sparse, page 9 missing, with a
/// marker, an annotation and a digitized entry for "date") and `lughat`
/// (fully indexed).
pub fn fixture_store() -> Store {
    let mut store = Store::in_memory().with_clock(fixed_clock());
    store
        .register_language(Language::new("en", "English"), None, None)
        .unwrap();

    let mut farhang = DictionaryManifest::new(
        "farhang",
        "Farhang",
        vec!["en".into()],
        20,
        "https://scans.example.org/farhang/{page:04}.jpg",
        PageSize {
            width: 1000,
            height: 1400,
        },
    );
    farhang.missing_pages = vec![9];
    store.register_dictionary(farhang, None).unwrap();
    store
        .ingest_index("farhang", SPARSE_ANCHORS, IndexKind::Sparse)
        .unwrap();
    store.advance_state("farhang", IndexState::SparseIndexed).unwrap();
    for (who, x, y) in [("ayesha", 100, 290), ("bilal", 140, 310)] {
        store
            .submit_marker(MarkerInput {
                dictionary_id: "farhang".into(),
                page: 8,
                word: "date".into(),
                x,
                y,
                contributor: who.into(),
            })
            .unwrap();
    }
    let mut note = meta("ayesha");
    note.extra.insert("source".into(), serde_json::json!("margin note"));
    store
        .attach_annotation(AnnotationInput {
            dictionary_id: "farhang".into(),
            page: 8,
            word: "date".into(),
            text: "Also spelled \"daet\" in older printings.".into(),
            meta: note,
        })
        .unwrap();
    let mut fields = EntryFields {
        definition: Some("The sweet fruit of the date palm.".into()),
        part_of_speech: Some("noun".into()),
        ..Default::default()
    };
    fields
        .extra
        .insert("image".into(), "https://media.example.org/date.png".into());
    store
        .store_digitization(DigitizationInput {
            dictionary_id: "farhang".into(),
            word: "date".into(),
            fields,
            boxes: vec![RegionBox {
                page: 8,
                top: 300,
                bottom: 420,
                left: 80,
                right: 480,
            }],
            meta: meta("bilal"),
        })
        .unwrap();

    let lughat = DictionaryManifest::new(
        "lughat",
        "Lughat",
        vec!["en".into()],
        30,
        "https://scans.example.org/lughat/{page}.png",
        PageSize {
            width: 900,
            height: 1300,
        },
    );
    store.register_dictionary(lughat, None).unwrap();
    store.ingest_index("lughat", FULL_ENTRIES, IndexKind::Full).unwrap();
    store.advance_state("lughat", IndexState::FullyIndexed).unwrap();
    store
}

pub fn fixture_engine() -> Engine {
    Engine::new(fixture_store(), &ServiceConfig::default())
}

/// Golden fixtures: (name, query).
pub const GOLDEN_QUERIES: [(&str, &str); 3] = [("yes_full", "kiwi"), ("maybe_sparse", "date"), ("no", "zucchini")];

pub fn schema() -> serde_json::Value {
    let text = std::fs::read_to_string(golden_dir().join("search_response.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}
