//! Exhaustive word to pages index, and the root-keyed index used by
//! dictionaries ordered by root letters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::collation::{CollationKey, Collator, RootPattern};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FullIndexError {
    #[error("page {page} is outside 1..={page_count}")]
    PageOutOfRange { page: u32, page_count: u32 },
    #[error("empty word")]
    EmptyWord,
    #[error("{word:?} does not derive from root {root}")]
    NotADerivative { word: String, root: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Canonical composition plus whitespace collapsed to single spaces.
pub fn normalize_word(word: &str) -> String {
    let composed: String = word.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Manual,
    #[serde(rename = "crowd")]
    CrowdPromoted,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::CrowdPromoted => "crowd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FullExists {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullLookup {
    pub pages: BTreeSet<u32>,
    pub exists: FullExists,
}

#[derive(Debug, Clone)]
pub struct FullIndex {
    pub dictionary_id: String,
    pub page_count: u32,
    pub rules_ref: String,
    collator: Arc<Collator>,
    postings: BTreeMap<CollationKey, BTreeMap<u32, Provenance>>,
}

impl PartialEq for FullIndex {
    fn eq(&self, other: &Self) -> bool {
        self.dictionary_id == other.dictionary_id
            && self.page_count == other.page_count
            && self.postings == other.postings
    }
}

impl FullIndex {
    pub fn empty(dictionary_id: impl Into<String>, page_count: u32, collator: Arc<Collator>) -> Self {
        FullIndex {
            dictionary_id: dictionary_id.into(),
            page_count,
            rules_ref: collator.language_code().to_string(),
            collator,
            postings: BTreeMap::new(),
        }
    }

    /// Builds from unordered `(word, page)` pairs; duplicates merge.
    pub fn build<S: AsRef<str>>(
        dictionary_id: impl Into<String>,
        pairs: impl IntoIterator<Item = (S, u32)>,
        page_count: u32,
        collator: Arc<Collator>,
    ) -> Result<Self, FullIndexError> {
        let mut index = FullIndex::empty(dictionary_id, page_count, collator);
        for (word, page) in pairs {
            index.insert(word.as_ref(), page, Provenance::Manual)?;
        }
        Ok(index)
    }

    fn insert(&mut self, word: &str, page: u32, provenance: Provenance) -> Result<bool, FullIndexError> {
        if page == 0 || page > self.page_count {
            return Err(FullIndexError::PageOutOfRange {
                page,
                page_count: self.page_count,
            });
        }
        let word = normalize_word(word);
        if word.is_empty() {
            return Err(FullIndexError::EmptyWord);
        }
        let pages = self.postings.entry(self.collator.key(&word)).or_default();
        match pages.get(&page) {
            Some(Provenance::Manual) => Ok(false),
            Some(existing) if *existing == provenance => Ok(false),
            _ => {
                pages.insert(page, provenance);
                Ok(true)
            }
        }
    }

    pub fn lookup(&self, word: &str) -> FullLookup {
        let key = self.collator.key(&normalize_word(word));
        match self.postings.get(&key) {
            Some(pages) => FullLookup {
                pages: pages.keys().copied().collect(),
                exists: FullExists::Yes,
            },
            None => FullLookup {
                pages: BTreeSet::new(),
                exists: FullExists::No,
            },
        }
    }

    pub fn contains(&self, word: &str, page: u32) -> bool {
        self.provenance(word, page).is_some()
    }

    pub fn provenance(&self, word: &str, page: u32) -> Option<Provenance> {
        let key = self.collator.key(&normalize_word(word));
        self.postings.get(&key).and_then(|p| p.get(&page)).copied()
    }

    /// New snapshot with `(word, page)` recorded as crowd-promoted. Manual
    /// entries keep their provenance.
    pub fn promote(&self, word: &str, page: u32) -> Result<FullIndex, FullIndexError> {
        let mut next = self.clone();
        next.insert(word, page, Provenance::CrowdPromoted)?;
        Ok(next)
    }

    /// Adds manual entries from another index into this one.
    pub fn merge_manual(&mut self, other: &FullIndex) -> Result<(), FullIndexError> {
        for (word, page, _) in other.iter() {
            self.insert(word, page, Provenance::Manual)?;
        }
        Ok(())
    }

    pub fn word_count(&self) -> usize {
        self.postings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.postings.is_empty()
    }

    /// Every `(word, page, provenance)` in collation order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32, Provenance)> + '_ {
        self.postings.iter().flat_map(|(key, pages)| {
            pages
                .iter()
                .map(move |(page, prov)| (key.source_word.as_str(), *page, *prov))
        })
    }

    pub fn collator(&self) -> &Arc<Collator> {
        &self.collator
    }

    /// `WORD<TAB>PAGE[,PAGE...]`, one word per line in collation order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (key, pages) in &self.postings {
            let list: Vec<String> = pages.keys().map(u32::to_string).collect();
            let _ = writeln!(out, "{}\t{}", key.source_word, list.join(","));
        }
        out
    }

    /// `WORD<TAB>PAGE<TAB>{manual|crowd}` sidecar.
    pub fn provenance_tsv(&self) -> String {
        let mut out = String::new();
        for (word, page, prov) in self.iter() {
            let _ = writeln!(out, "{}\t{}\t{}", word, page, prov.as_str());
        }
        out
    }

    /// Loads the TSV form plus an optional provenance sidecar; entries the
    /// sidecar does not mention are manual.
    pub fn from_tsv(
        dictionary_id: impl Into<String>,
        tsv: &str,
        provenance: Option<&str>,
        page_count: u32,
        collator: Arc<Collator>,
    ) -> Result<Self, FullIndexError> {
        let pairs = parse_tsv(tsv)?;
        let crowd: BTreeSet<(String, u32)> = match provenance {
            Some(text) => parse_provenance(text)?
                .into_iter()
                .filter(|(_, _, p)| *p == Provenance::CrowdPromoted)
                .map(|(w, p, _)| (normalize_word(&w), p))
                .collect(),
            None => BTreeSet::new(),
        };
        let mut index = FullIndex::empty(dictionary_id, page_count, collator);
        for (word, page) in pairs {
            let prov = if crowd.contains(&(normalize_word(&word), page)) {
                Provenance::CrowdPromoted
            } else {
                Provenance::Manual
            };
            index.insert(&word, page, prov)?;
        }
        Ok(index)
    }
}

fn skip_line(line: &str) -> bool {
    line.trim().is_empty() || line.starts_with('#')
}

/// Parses `WORD<TAB>PAGE[,PAGE...]` into flat pairs.
pub fn parse_tsv(text: &str) -> Result<Vec<(String, u32)>, FullIndexError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if skip_line(line) {
            continue;
        }
        let err = |message: &str| FullIndexError::Parse {
            line: idx + 1,
            message: message.to_string(),
        };
        let (word, pages) = line
            .split_once('\t')
            .ok_or_else(|| err("expected WORD<TAB>PAGE[,PAGE...]"))?;
        if word.trim().is_empty() {
            return Err(err("empty word"));
        }
        for page in pages.split(',') {
            let page: u32 = page.trim().parse().map_err(|_| err("page is not a positive integer"))?;
            pairs.push((word.to_string(), page));
        }
    }
    Ok(pairs)
}

pub fn parse_provenance(text: &str) -> Result<Vec<(String, u32, Provenance)>, FullIndexError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if skip_line(line) {
            continue;
        }
        let err = |message: &str| FullIndexError::Parse {
            line: idx + 1,
            message: message.to_string(),
        };
        let mut parts = line.split('\t');
        let (Some(word), Some(page), Some(prov), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(err("expected WORD<TAB>PAGE<TAB>{manual|crowd}"));
        };
        let page: u32 = page.trim().parse().map_err(|_| err("page is not a positive integer"))?;
        let prov = match prov.trim() {
            "manual" => Provenance::Manual,
            "crowd" => Provenance::CrowdPromoted,
            _ => return Err(err("provenance must be manual or crowd")),
        };
        out.push((word.to_string(), page, prov));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivative {
    pub word: String,
    pub pages: BTreeSet<u32>,
}

/// One hit of [`RootIndex::lookup`]. `derivative` is `None` when the word
/// was not found and the root is only a candidate cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootHit {
    pub root: RootPattern,
    pub derivative: Option<String>,
    pub pages: BTreeSet<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct RootIndex {
    roots: BTreeMap<RootPattern, Vec<Derivative>>,
}

impl RootIndex {
    pub fn new() -> Self {
        RootIndex::default()
    }

    /// Adds a derivative under `root`, keeping the cluster collation-sorted.
    pub fn insert(
        &mut self,
        root: &RootPattern,
        word: &str,
        pages: impl IntoIterator<Item = u32>,
        collator: &Collator,
    ) -> Result<(), FullIndexError> {
        let word = normalize_word(word);
        if word.is_empty() {
            return Err(FullIndexError::EmptyWord);
        }
        if !collator.matches_root(&word, root) {
            return Err(FullIndexError::NotADerivative {
                word,
                root: root.to_string(),
            });
        }
        let cluster = self.roots.entry(root.clone()).or_default();
        match cluster.binary_search_by(|d| collator.compare(&d.word, &word)) {
            Ok(pos) => cluster[pos].pages.extend(pages),
            Err(pos) => cluster.insert(
                pos,
                Derivative {
                    word,
                    pages: pages.into_iter().collect(),
                },
            ),
        }
        Ok(())
    }

    pub fn derivatives(&self, root: &RootPattern) -> &[Derivative] {
        self.roots.get(root).map_or(&[], Vec::as_slice)
    }

    pub fn roots(&self) -> impl Iterator<Item = &RootPattern> {
        self.roots.keys()
    }

    /// Exact derivative matches across all roots, or else the roots whose
    /// letters the word contains in order.
    pub fn lookup(&self, word: &str, collator: &Collator) -> Vec<RootHit> {
        let word = normalize_word(word);
        let exact: Vec<RootHit> = self
            .roots
            .iter()
            .filter_map(|(root, cluster)| {
                cluster
                    .binary_search_by(|d| collator.compare(&d.word, &word))
                    .ok()
                    .map(|pos| RootHit {
                        root: root.clone(),
                        derivative: Some(cluster[pos].word.clone()),
                        pages: cluster[pos].pages.clone(),
                    })
            })
            .collect();
        if !exact.is_empty() {
            return exact;
        }
        self.roots
            .keys()
            .filter(|root| collator.matches_root(&word, root))
            .map(|root| RootHit {
                root: root.clone(),
                derivative: None,
                pages: BTreeSet::new(),
            })
            .collect()
    }
}
