//! Registry of languages and dictionaries plus their index artifacts and
//! contribution logs, optionally persisted under a data directory:
//!
//! ```text
//! <data>/languages/<code>.toml, <code>.tailoring, <code>.words
//! <data>/<dictionary>/manifest.toml, tailoring.txt, sparse.tsv, sparse.pending.tsv,
//!                    full.tsv, full.provenance.tsv,
//!                    markers.log, annotations.log, feedback.log, digitized.log
//! ```
//!
//! Logs hold one JSON record per line and are replayed on open.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::collation::{builtin_rules, Collator, TailoringRuleSet};
use crate::error::{Error, Result};
use crate::feedback::{
    promotion_sweep, Candidates, FeedbackLedger, FeedbackPolicy, FeedbackRecord, Promotion, TallyStatus, Verdict,
    VoteTally,
};
use crate::full::{normalize_word, FullIndex, Provenance};
use crate::location::{
    aggregate_marker, estimate_layout, region_boxes, AggregationPolicy, Annotation, LayoutConfig, LocationMarker,
    MarkerProposal, Meta, PageLayout, ReadingDirection, RegionBox,
};
use crate::prefix::{parse_wordlist, PrefixTree};
use crate::sparse::{self, SparseEntry, SparseError, SparseExists, SparseIndex, SparseVariant};

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

const DEFAULT_PREFIX_DEPTH: usize = 3;

fn default_prefix_depth() -> usize {
    DEFAULT_PREFIX_DEPTH
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Language {
    pub code: String,
    pub display_name: String,
    #[serde(default)]
    pub direction: ReadingDirection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tailoring_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wordlist_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyboard_layout_ref: Option<String>,
    #[serde(default = "default_prefix_depth")]
    pub prefix_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_tolerance: Option<usize>,
}

impl Language {
    pub fn new(code: impl Into<String>, display_name: impl Into<String>) -> Self {
        Language {
            code: code.into(),
            display_name: display_name.into(),
            direction: ReadingDirection::Ltr,
            tailoring_ref: None,
            wordlist_ref: None,
            keyboard_layout_ref: None,
            prefix_depth: DEFAULT_PREFIX_DEPTH,
            split_tolerance: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexState {
    #[default]
    OrderedPages,
    SparseIndexed,
    FullyIndexed,
    LocationIndexed,
    Annotated,
    Digitized,
}

impl IndexState {
    pub const ALL: [IndexState; 6] = [
        IndexState::OrderedPages,
        IndexState::SparseIndexed,
        IndexState::FullyIndexed,
        IndexState::LocationIndexed,
        IndexState::Annotated,
        IndexState::Digitized,
    ];

    pub fn can_advance_to(self, to: IndexState) -> bool {
        use IndexState::*;
        matches!(
            (self, to),
            (OrderedPages, SparseIndexed)
                | (OrderedPages, FullyIndexed)
                | (SparseIndexed, FullyIndexed)
                | (FullyIndexed, LocationIndexed)
                | (LocationIndexed, Annotated)
                | (LocationIndexed, Digitized)
                | (Annotated, Digitized)
        )
    }

    /// Shortest chain of allowed transitions from `self` to `to`, excluding `self`.
    pub fn path_to(self, to: IndexState) -> Option<Vec<IndexState>> {
        let mut prev: BTreeMap<IndexState, IndexState> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([self]);
        let mut seen = BTreeSet::from([self]);
        while let Some(s) = queue.pop_front() {
            if s == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != self {
                    path.push(cur);
                    cur = prev[&cur];
                }
                path.reverse();
                return Some(path);
            }
            for next in IndexState::ALL {
                if s.can_advance_to(next) && seen.insert(next) {
                    prev.insert(next, s);
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryOrdering {
    #[default]
    Flat,
    RootNested,
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PageSize {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PageSizeOverride {
    pub page: u32,
    pub width: u32,
    pub height: u32,
}

/// Everything known about one scanned dictionary apart from its indexes.
/// Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryManifest {
    pub id: String,
    pub title: String,
    pub language_codes: Vec<String>,
    pub page_count: u32,
    /// Page image URL; `{page}` or a zero-padded `{page:04}` is replaced by the page number.
    pub image_url_template: String,
    #[serde(default)]
    pub index_state: IndexState,
    #[serde(default)]
    pub sparse_variant: SparseVariant,
    #[serde(default)]
    pub ordering: EntryOrdering,
    #[serde(default)]
    pub reading_direction: ReadingDirection,
    #[serde(default)]
    pub aggregation_policy: AggregationPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tailoring_ref: Option<String>,
    /// Index files loaded by [`Store::ingest_manifest_file`]; not persisted.
    #[serde(default, skip_serializing)]
    pub sparse_ref: Option<String>,
    #[serde(default, skip_serializing)]
    pub full_ref: Option<String>,
    #[serde(default)]
    pub missing_pages: Vec<u32>,
    #[serde(default)]
    pub duplicate_pages: Vec<u32>,
    #[serde(default)]
    pub feedback_policy: FeedbackPolicy,
    pub page_size: PageSize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub page_sizes: Vec<PageSizeOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<PageLayout>,
}

impl DictionaryManifest {
    pub fn new(
        id: impl Into<String>,
        title: impl Into<String>,
        language_codes: Vec<String>,
        page_count: u32,
        image_url_template: impl Into<String>,
        page_size: PageSize,
    ) -> Self {
        DictionaryManifest {
            id: id.into(),
            title: title.into(),
            language_codes,
            page_count,
            image_url_template: image_url_template.into(),
            index_state: IndexState::OrderedPages,
            sparse_variant: SparseVariant::FirstWord,
            ordering: EntryOrdering::Flat,
            reading_direction: ReadingDirection::Ltr,
            aggregation_policy: AggregationPolicy::LinearMean,
            tailoring_ref: None,
            sparse_ref: None,
            full_ref: None,
            missing_pages: Vec::new(),
            duplicate_pages: Vec::new(),
            feedback_policy: FeedbackPolicy::default(),
            page_size,
            page_sizes: Vec::new(),
            layout: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidManifest(msg));
        if !valid_id(&self.id) {
            return bad(format!(
                "id {:?} must be non-empty ASCII letters, digits, '-' or '_'",
                self.id
            ));
        }
        if self.language_codes.is_empty() {
            return bad("language_codes is empty".into());
        }
        if self.page_count == 0 {
            return bad("page_count must be at least 1".into());
        }
        if !self.image_url_template.contains("{page") {
            return bad("image_url_template has no {page} placeholder".into());
        }
        if let Some(p) = self
            .missing_pages
            .iter()
            .chain(&self.duplicate_pages)
            .find(|p| **p == 0 || **p > self.page_count)
        {
            return bad(format!("page {p} is outside 1..={}", self.page_count));
        }
        let sizes = std::iter::once((0, self.page_size.width, self.page_size.height))
            .chain(self.page_sizes.iter().map(|o| (o.page, o.width, o.height)));
        for (page, w, h) in sizes {
            if w == 0 || h == 0 {
                return bad("page dimensions must be positive".into());
            }
            if page > self.page_count {
                return bad(format!("page size override for page {page} is out of range"));
            }
        }
        match self.feedback_policy {
            FeedbackPolicy::Threshold { k: 0 } | FeedbackPolicy::Majority { min_votes: 0 } => {
                return bad("feedback policy thresholds must be positive".into())
            }
            _ => {}
        }
        if let Some(layout) = &self.layout {
            if layout.columns.is_empty() {
                return bad("layout has no columns".into());
            }
        }
        Ok(())
    }

    pub fn page_size_of(&self, page: u32) -> PageSize {
        self.page_sizes
            .iter()
            .find(|o| o.page == page)
            .map(|o| PageSize {
                width: o.width,
                height: o.height,
            })
            .unwrap_or(self.page_size)
    }

    pub fn page_src(&self, page: u32) -> String {
        let template = &self.image_url_template;
        let Some(start) = template.find("{page") else {
            return template.clone();
        };
        let Some(len) = template[start..].find('}') else {
            return template.clone();
        };
        let spec = &template[start + 5..start + len];
        let width: usize = spec.strip_prefix(":0").and_then(|w| w.parse().ok()).unwrap_or(0);
        format!("{}{:0width$}{}", &template[..start], page, &template[start + len + 1..])
    }

    pub fn is_missing(&self, page: u32) -> bool {
        self.missing_pages.contains(&page)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntryFields {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part_of_speech: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_language: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, String>,
}

impl EntryFields {
    pub fn is_empty(&self) -> bool {
        let blank = |s: &Option<String>| s.as_deref().is_none_or(|s| s.trim().is_empty());
        blank(&self.definition)
            && blank(&self.part_of_speech)
            && blank(&self.origin_language)
            && self.examples.iter().all(|e| e.trim().is_empty())
            && self.extra.values().all(|v| v.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitizedEntry {
    pub id: u64,
    pub dictionary_id: String,
    pub word: String,
    pub fields: EntryFields,
    pub boxes: Vec<RegionBox>,
    pub meta: Meta,
}

/// Contributor-supplied metadata; the store stamps `updated`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaInput {
    pub contributor: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackInput {
    pub dictionary_id: String,
    pub page: u32,
    pub word: String,
    pub verdict: Verdict,
    pub contributor: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerInput {
    pub dictionary_id: String,
    pub page: u32,
    pub word: String,
    pub x: u32,
    pub y: u32,
    pub contributor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationInput {
    pub dictionary_id: String,
    pub page: u32,
    pub word: String,
    pub text: String,
    pub meta: MetaInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitizationInput {
    pub dictionary_id: String,
    pub word: String,
    pub fields: EntryFields,
    #[serde(default)]
    pub boxes: Vec<RegionBox>,
    pub meta: MetaInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    Sparse,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub kind: IndexKind,
    pub entries: usize,
    /// Positions `i` where anchor `i` sorts after anchor `i + 1`.
    pub violations: Vec<usize>,
    /// False when violations kept the file from replacing the active index.
    pub activated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub dictionary_id: String,
    pub violations: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exists {
    Yes,
    No,
    Maybe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DictLookup {
    pub exists: Exists,
    pub pages: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeedbackAck {
    pub tally: VoteTally,
    pub promotions: Vec<Promotion>,
}

/// Fielded filter over digitized entries; unset fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldQuery {
    pub word: Option<String>,
    pub part_of_speech: Option<String>,
    pub origin_language: Option<String>,
}

pub struct LanguageEntry {
    pub language: Language,
    pub collator: Arc<Collator>,
    pub prefix_tree: Option<Arc<PrefixTree>>,
    rules: Option<TailoringRuleSet>,
    words: Option<Vec<String>>,
}

/// A registered dictionary with its indexes and contributions.
pub struct Dictionary {
    manifest: DictionaryManifest,
    collator: Arc<Collator>,
    tailoring: Option<TailoringRuleSet>,
    sparse: Option<SparseIndex>,
    pending_sparse: Option<(Vec<SparseEntry>, Vec<usize>)>,
    full: FullIndex,
    ledger: FeedbackLedger,
    proposals: BTreeMap<(String, u32), Vec<MarkerProposal>>,
    markers: BTreeMap<(String, u32), LocationMarker>,
    annotations: Vec<Annotation>,
    digitized: Vec<DigitizedEntry>,
}

impl Dictionary {
    fn new(manifest: DictionaryManifest, collator: Arc<Collator>, tailoring: Option<TailoringRuleSet>) -> Self {
        let full = FullIndex::empty(manifest.id.clone(), manifest.page_count, collator.clone());
        let ledger = FeedbackLedger::new(manifest.feedback_policy);
        Dictionary {
            manifest,
            collator,
            tailoring,
            sparse: None,
            pending_sparse: None,
            full,
            ledger,
            proposals: BTreeMap::new(),
            markers: BTreeMap::new(),
            annotations: Vec::new(),
            digitized: Vec::new(),
        }
    }

    pub fn manifest(&self) -> &DictionaryManifest {
        &self.manifest
    }

    pub fn id(&self) -> &str {
        &self.manifest.id
    }

    pub fn state(&self) -> IndexState {
        self.manifest.index_state
    }

    pub fn collator(&self) -> &Arc<Collator> {
        &self.collator
    }

    pub fn sparse(&self) -> Option<&SparseIndex> {
        self.sparse.as_ref()
    }

    pub fn full(&self) -> &FullIndex {
        &self.full
    }

    pub fn ledger(&self) -> &FeedbackLedger {
        &self.ledger
    }

    pub fn markers(&self) -> impl Iterator<Item = &LocationMarker> {
        self.markers.values()
    }

    pub fn marker(&self, word: &str, page: u32) -> Option<&LocationMarker> {
        self.markers.get(&(normalize_word(word), page))
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn annotations_for(&self, word: &str, page: u32) -> Vec<&Annotation> {
        let word = normalize_word(word);
        self.annotations
            .iter()
            .filter(|a| a.page == page && normalize_word(&a.word) == word)
            .collect()
    }

    pub fn digitized(&self) -> &[DigitizedEntry] {
        &self.digitized
    }

    fn has_manual_full(&self) -> bool {
        self.full.iter().any(|(_, _, p)| p == Provenance::Manual)
    }

    fn artifact_for(&self, state: IndexState) -> Option<&'static str> {
        let present = match state {
            IndexState::OrderedPages => true,
            IndexState::SparseIndexed => self.sparse.is_some(),
            IndexState::FullyIndexed => self.has_manual_full(),
            IndexState::LocationIndexed => !self.markers.is_empty(),
            IndexState::Annotated => !self.annotations.is_empty(),
            IndexState::Digitized => !self.digitized.is_empty(),
        };
        if present {
            return None;
        }
        Some(match state {
            IndexState::OrderedPages => unreachable!(),
            IndexState::SparseIndexed => "an active sparse index",
            IndexState::FullyIndexed => "a manually built full index",
            IndexState::LocationIndexed => "at least one location marker",
            IndexState::Annotated => "at least one annotation",
            IndexState::Digitized => "at least one digitized entry",
        })
    }

    /// Presence and pages of `word` given the current index state.
    pub fn lookup(&self, word: &str) -> DictLookup {
        let word = normalize_word(word);
        let full = self.full.lookup(&word);
        if self.state() >= IndexState::FullyIndexed {
            let pages: Vec<u32> = full.pages.into_iter().collect();
            let exists = if pages.is_empty() { Exists::No } else { Exists::Yes };
            return DictLookup { exists, pages };
        }
        let Some(sparse) = &self.sparse else {
            if !full.pages.is_empty() {
                return DictLookup {
                    exists: Exists::Yes,
                    pages: full.pages.into_iter().collect(),
                };
            }
            return DictLookup {
                exists: Exists::Maybe,
                pages: vec![1],
            };
        };
        let hit = sparse
            .lookup(&word, &self.collator)
            .expect("active sparse index is non-empty");
        let promoted: Vec<u32> = full.pages.into_iter().filter(|p| hit.pages.contains(*p)).collect();
        if !promoted.is_empty() {
            return DictLookup {
                exists: Exists::Yes,
                pages: promoted,
            };
        }
        let open: Vec<u32> = hit
            .pages
            .iter()
            .filter(|p| self.ledger.tally(&word, *p).status != TallyStatus::ConfirmedAbsent)
            .collect();
        if open.is_empty() {
            // every candidate was voted absent; keep the range so users can still check
            return DictLookup {
                exists: Exists::Maybe,
                pages: hit.pages.to_vec(),
            };
        }
        let exists = if hit.exists == SparseExists::Yes && open.len() == hit.pages.len() {
            Exists::Yes
        } else {
            Exists::Maybe
        };
        DictLookup { exists, pages: open }
    }

    /// Pages on which a presence vote for `word` is meaningful.
    pub fn candidates(&self, word: &str) -> Candidates {
        if self.state() >= IndexState::FullyIndexed {
            return Candidates::Pages(self.full.lookup(word).pages);
        }
        match &self.sparse {
            Some(sparse) => Candidates::Range(
                sparse
                    .lookup(&normalize_word(word), &self.collator)
                    .expect("active sparse index is non-empty")
                    .pages,
            ),
            None => Candidates::Range(sparse::PageRange::new(1, self.manifest.page_count)),
        }
    }

    /// Layout from the manifest, or estimated from every marker of the dictionary.
    pub fn layout(&self) -> Option<PageLayout> {
        if let Some(layout) = &self.manifest.layout {
            return Some(PageLayout::new(
                layout.margins,
                layout.columns.clone(),
                self.manifest.reading_direction,
            ));
        }
        let markers: Vec<LocationMarker> = self.markers.values().cloned().collect();
        let size = self.manifest.page_size;
        estimate_layout(
            &markers,
            size.width,
            size.height,
            self.manifest.reading_direction,
            &LayoutConfig::default(),
        )
        .ok()
    }

    /// Region boxes between `word`'s marker on `page` and the next marker in
    /// reading order. `None` without a marker or a usable layout.
    pub fn auto_boxes(&self, word: &str, page: u32) -> Option<Vec<RegionBox>> {
        let marker = self.marker(word, page)?;
        let layout = self.layout()?;
        let position = |m: &LocationMarker| {
            let col = layout.column_of(m.x).unwrap_or(0);
            let y = m.y.clamp(layout.margins.top, layout.margins.bottom);
            (m.page, col, y)
        };
        let here = position(marker);
        let next = self
            .markers
            .values()
            .filter(|m| position(m) > here)
            .min_by_key(|m| (position(m), m.word.clone()));
        region_boxes(marker, next, &layout, Some(&layout)).ok()
    }

    /// Boxes for `word` on `page`: digitized boxes first, then automated
    /// boxes once the dictionary is location indexed.
    pub fn boxes_for(&self, word: &str, page: u32) -> Vec<RegionBox> {
        let norm = normalize_word(word);
        let stored: Vec<RegionBox> = self
            .digitized
            .iter()
            .filter(|d| normalize_word(&d.word) == norm)
            .flat_map(|d| d.boxes.iter().copied())
            .filter(|b| b.page == page)
            .collect();
        if !stored.is_empty() || self.state() < IndexState::LocationIndexed {
            return stored;
        }
        self.auto_boxes(word, page)
            .unwrap_or_default()
            .into_iter()
            .filter(|b| b.page == page)
            .collect()
    }

    fn knows(&self, word: &str, page: Option<u32>) -> bool {
        let norm = normalize_word(word);
        match page {
            Some(page) => self.markers.contains_key(&(norm, page)) || self.full.contains(word, page),
            None => self.markers.keys().any(|(w, _)| *w == norm) || !self.full.lookup(word).pages.is_empty(),
        }
    }

    fn check_page(&self, page: u32) -> Result<()> {
        if page == 0 || page > self.manifest.page_count {
            return Err(Error::InvalidPayload(format!(
                "page {page} is outside 1..={}",
                self.manifest.page_count
            )));
        }
        Ok(())
    }

    fn apply_marker(&mut self, proposal: MarkerProposal) -> Result<LocationMarker> {
        let key = (normalize_word(&proposal.word), proposal.page);
        let group = self.proposals.entry(key.clone()).or_default();
        group.push(proposal);
        let marker = aggregate_marker(group, self.manifest.aggregation_policy)?;
        self.markers.insert(key, marker.clone());
        Ok(marker)
    }

    fn validation(&self) -> ValidationReport {
        let mut warnings = Vec::new();
        let missing: BTreeSet<u32> = self.manifest.missing_pages.iter().copied().collect();
        let violations = match &self.pending_sparse {
            Some((_, v)) => v.clone(),
            None => Vec::new(),
        };
        if let Some(sparse) = &self.sparse {
            for e in sparse.entries().iter().filter(|e| missing.contains(&e.page)) {
                warnings.push(format!("sparse anchor {:?} is on missing page {}", e.word, e.page));
            }
        }
        for (word, page, _) in self.full.iter().filter(|(_, p, _)| missing.contains(p)) {
            warnings.push(format!("full-index entry {word:?} is on missing page {page}"));
        }
        for page in &self.manifest.duplicate_pages {
            warnings.push(format!("page {page} is flagged as a duplicate"));
        }
        ValidationReport {
            dictionary_id: self.manifest.id.clone(),
            violations,
            warnings,
        }
    }
}

pub struct Store {
    root: Option<PathBuf>,
    clock: Clock,
    languages: BTreeMap<String, LanguageEntry>,
    dictionaries: BTreeMap<String, Dictionary>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("root", &self.root)
            .field("languages", &self.languages.keys().collect::<Vec<_>>())
            .field("dictionaries", &self.dictionaries.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn system_clock() -> Clock {
    Arc::new(Utc::now)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn append_line<T: Serialize>(path: &Path, record: &T) -> Result<()> {
    let line = serde_json::to_string(record).map_err(|e| Error::format(path, e))?;
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    writeln!(file, "{line}").map_err(|e| Error::io(path, e))
}

fn read_log<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::format(path, format!("line {}: {e}", i + 1))))
        .collect()
}

/// Resolves a tailoring reference: `builtin:<code>` or a path relative to `base`.
pub fn resolve_tailoring(reference: &str, base: &Path) -> Result<TailoringRuleSet> {
    if let Some(code) = reference.strip_prefix("builtin:") {
        return builtin_rules(code).ok_or_else(|| Error::UnknownLanguage(code.to_string()));
    }
    let path = base.join(reference);
    Ok(TailoringRuleSet::parse(&read(&path)?)?)
}

/// Reads a language description and the tailoring and wordlist it refers to.
pub fn read_language_file(path: &Path) -> Result<(Language, Option<TailoringRuleSet>, Option<Vec<String>>)> {
    let base = path.parent().unwrap_or(Path::new("."));
    let language: Language = toml::from_str(&read(path)?).map_err(|e| Error::format(path, e))?;
    let rules = language
        .tailoring_ref
        .as_deref()
        .map(|r| resolve_tailoring(r, base))
        .transpose()?;
    let words = match &language.wordlist_ref {
        Some(r) => Some(parse_wordlist(&read(&base.join(r))?)),
        None => None,
    };
    Ok((language, rules, words))
}

impl Store {
    pub fn in_memory() -> Self {
        Store {
            root: None,
            clock: system_clock(),
            languages: BTreeMap::new(),
            dictionaries: BTreeMap::new(),
        }
    }

    /// Opens (creating if needed) a data directory and replays its contents.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let lang_dir = root.join("languages");
        fs::create_dir_all(&lang_dir).map_err(|e| Error::io(&lang_dir, e))?;
        let mut store = Store {
            root: None,
            clock: system_clock(),
            languages: BTreeMap::new(),
            dictionaries: BTreeMap::new(),
        };
        for path in sorted_entries(&lang_dir)? {
            if path.extension().is_some_and(|e| e == "toml") {
                let (language, rules, words) = read_language_file(&path)?;
                store.register_language(language, rules, words)?;
            }
        }
        for dir in sorted_entries(&root)? {
            let manifest_path = dir.join("manifest.toml");
            if dir.file_name().is_some_and(|n| n == "languages") || !manifest_path.exists() {
                continue;
            }
            store.load_dictionary(&dir)?;
        }
        store.root = Some(root);
        Ok(store)
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    fn dict_dir(&self, id: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(id))
    }

    pub fn languages(&self) -> impl Iterator<Item = &LanguageEntry> {
        self.languages.values()
    }

    pub fn language(&self, code: &str) -> Result<&LanguageEntry> {
        self.languages
            .get(code)
            .ok_or_else(|| Error::UnknownLanguage(code.to_string()))
    }

    pub fn dictionaries(&self) -> impl Iterator<Item = &Dictionary> {
        self.dictionaries.values()
    }

    pub fn dictionary(&self, id: &str) -> Result<&Dictionary> {
        self.dictionaries
            .get(id)
            .ok_or_else(|| Error::UnknownDictionary(id.to_string()))
    }

    fn dictionary_mut(&mut self, id: &str) -> Result<&mut Dictionary> {
        self.dictionaries
            .get_mut(id)
            .ok_or_else(|| Error::UnknownDictionary(id.to_string()))
    }

    /// Dictionaries associated with `code`, ordered by id.
    pub fn dictionaries_for(&self, code: &str) -> Result<Vec<&Dictionary>> {
        self.language(code)?;
        Ok(self
            .dictionaries
            .values()
            .filter(|d| d.manifest.language_codes.iter().any(|c| c == code))
            .collect())
    }

    /// Registers a language. Without rules the shipped tailoring for the code
    /// is used if there is one, otherwise code-point order.
    pub fn register_language(
        &mut self,
        mut language: Language,
        rules: Option<TailoringRuleSet>,
        words: Option<Vec<String>>,
    ) -> Result<&LanguageEntry> {
        if !valid_id(&language.code) {
            return Err(Error::InvalidPayload(format!(
                "invalid language code {:?}",
                language.code
            )));
        }
        if self.languages.contains_key(&language.code) {
            return Err(Error::DuplicateId {
                kind: "language",
                id: language.code.clone(),
            });
        }
        let effective = match &rules {
            Some(r) => r.clone(),
            None => builtin_rules(&language.code).unwrap_or_else(|| TailoringRuleSet::untailored(&language.code)),
        };
        let collator = Arc::new(Collator::new(effective)?);
        let prefix_tree = match &words {
            Some(w) if !w.is_empty() => {
                let tree = PrefixTree::build(w, language.prefix_depth, collator.clone())?;
                let tree = match language.split_tolerance {
                    Some(t) => tree.split_oversized(t),
                    None => tree,
                };
                Some(Arc::new(tree))
            }
            _ => None,
        };
        if let Some(root) = &self.root {
            let dir = root.join("languages");
            let code = language.code.clone();
            if let Some(r) = &rules {
                let name = format!("{code}.tailoring");
                write_atomic(&dir.join(&name), &r.to_file_string())?;
                language.tailoring_ref = Some(name);
            }
            if let Some(w) = &words {
                let name = format!("{code}.words");
                let mut text = w.join("\n");
                text.push('\n');
                write_atomic(&dir.join(&name), &text)?;
                language.wordlist_ref = Some(name);
            }
            let text = toml::to_string(&language).map_err(|e| Error::format(dir.join(&code), e))?;
            write_atomic(&dir.join(format!("{code}.toml")), &text)?;
        }
        let code = language.code.clone();
        self.languages.insert(
            code.clone(),
            LanguageEntry {
                language,
                collator,
                prefix_tree,
                rules,
                words,
            },
        );
        Ok(&self.languages[&code])
    }

    /// Registers a dictionary in state OrderedPages, whatever the manifest says.
    pub fn register_dictionary(
        &mut self,
        mut manifest: DictionaryManifest,
        tailoring: Option<TailoringRuleSet>,
    ) -> Result<&DictionaryManifest> {
        manifest.validate()?;
        if self.dictionaries.contains_key(&manifest.id) {
            return Err(Error::DuplicateId {
                kind: "dictionary",
                id: manifest.id.clone(),
            });
        }
        for code in &manifest.language_codes {
            self.language(code)?;
        }
        let collator = match &tailoring {
            Some(rules) => Arc::new(Collator::new(rules.clone())?),
            None => self.languages[&manifest.language_codes[0]].collator.clone(),
        };
        manifest.index_state = IndexState::OrderedPages;
        manifest.sparse_ref = None;
        manifest.full_ref = None;
        if tailoring.is_some() {
            manifest.tailoring_ref = Some("tailoring.txt".into());
        } else {
            manifest.tailoring_ref = None;
        }
        if let Some(dir) = self.dict_dir(&manifest.id) {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            if let Some(rules) = &tailoring {
                write_atomic(&dir.join("tailoring.txt"), &rules.to_file_string())?;
            }
            write_atomic(&dir.join("manifest.toml"), &manifest.to_toml())?;
        }
        let id = manifest.id.clone();
        self.dictionaries
            .insert(id.clone(), Dictionary::new(manifest, collator, tailoring));
        Ok(&self.dictionaries[&id].manifest)
    }

    fn load_dictionary(&mut self, dir: &Path) -> Result<()> {
        let manifest_path = dir.join("manifest.toml");
        let manifest =
            DictionaryManifest::from_toml(&read(&manifest_path)?).map_err(|e| Error::format(&manifest_path, e))?;
        let target = manifest.index_state;
        let tailoring = manifest
            .tailoring_ref
            .as_deref()
            .map(|r| resolve_tailoring(r, dir))
            .transpose()?;
        let id = manifest.id.clone();
        self.register_dictionary(manifest, tailoring)?;
        let dict = self.dictionaries.get_mut(&id).expect("just registered");
        dict.manifest.index_state = target;

        let sparse_path = dir.join("sparse.tsv");
        if sparse_path.exists() {
            let entries = sparse::parse_tsv(&read(&sparse_path)?)?;
            let m = &dict.manifest;
            dict.sparse = Some(SparseIndex::build(
                id.clone(),
                entries,
                m.sparse_variant,
                m.page_count,
                &dict.collator,
            )?);
        }
        let pending_path = dir.join("sparse.pending.tsv");
        if pending_path.exists() {
            let entries = sparse::parse_tsv(&read(&pending_path)?)?;
            let violations = sparse::validate_sorted(&entries, &dict.collator);
            dict.pending_sparse = Some((entries, violations));
        }
        let full_path = dir.join("full.tsv");
        if full_path.exists() {
            let prov_path = dir.join("full.provenance.tsv");
            let prov = if prov_path.exists() {
                Some(read(&prov_path)?)
            } else {
                None
            };
            dict.full = FullIndex::from_tsv(
                id.clone(),
                &read(&full_path)?,
                prov.as_deref(),
                dict.manifest.page_count,
                dict.collator.clone(),
            )?;
        }
        for rec in read_log::<FeedbackRecord>(&dir.join("feedback.log"))? {
            dict.ledger.replay(rec);
        }
        for p in read_log::<MarkerProposal>(&dir.join("markers.log"))? {
            dict.apply_marker(p)?;
        }
        dict.annotations = read_log(&dir.join("annotations.log"))?;
        dict.digitized = read_log(&dir.join("digitized.log"))?;
        for state in IndexState::ALL.into_iter().filter(|s| *s <= target) {
            if let Some(artifact) = dict.artifact_for(state).filter(|_| reaches_through(target, state)) {
                return Err(Error::format(
                    &manifest_path,
                    format!("state {target:?} lacks {artifact}"),
                ));
            }
        }
        Ok(())
    }

    /// Reads a manifest file, registers it, loads the index files it names and
    /// advances to the state it declares.
    pub fn ingest_manifest_file(&mut self, path: &Path) -> Result<Vec<LoadReport>> {
        let base = path.parent().unwrap_or(Path::new("."));
        let manifest = DictionaryManifest::from_toml(&read(path)?).map_err(Error::InvalidManifest)?;
        let target = manifest.index_state;
        let tailoring = manifest
            .tailoring_ref
            .as_deref()
            .map(|r| resolve_tailoring(r, base))
            .transpose()?;
        let (sparse_ref, full_ref) = (manifest.sparse_ref.clone(), manifest.full_ref.clone());
        let id = manifest.id.clone();
        let path_to_target = IndexState::OrderedPages
            .path_to(target)
            .ok_or(Error::IllegalTransition {
                from: IndexState::OrderedPages,
                to: target,
            })?;
        self.register_dictionary(manifest, tailoring)?;
        let mut reports = Vec::new();
        if let Some(r) = sparse_ref {
            reports.push(self.ingest_index(&id, &read(&base.join(r))?, IndexKind::Sparse)?);
        }
        if let Some(r) = full_ref {
            reports.push(self.ingest_index(&id, &read(&base.join(r))?, IndexKind::Full)?);
        }
        for state in path_to_target {
            self.advance_state(&id, state)?;
        }
        Ok(reports)
    }

    pub fn advance_state(&mut self, id: &str, to: IndexState) -> Result<&DictionaryManifest> {
        let dir = self.dict_dir(id);
        let dict = self.dictionary_mut(id)?;
        let from = dict.manifest.index_state;
        if !from.can_advance_to(to) {
            return Err(Error::IllegalTransition { from, to });
        }
        if let Some(artifact) = dict.artifact_for(to) {
            return Err(Error::MissingArtifact { state: to, artifact });
        }
        dict.manifest.index_state = to;
        if let Some(dir) = dir {
            write_atomic(&dir.join("manifest.toml"), &dict.manifest.to_toml())?;
        }
        Ok(&dict.manifest)
    }

    /// Loads a sparse or full index file. Sparse files with ordering
    /// violations are kept as pending and do not replace the active index.
    pub fn ingest_index(&mut self, id: &str, text: &str, kind: IndexKind) -> Result<LoadReport> {
        let dir = self.dict_dir(id);
        let dict = self.dictionary_mut(id)?;
        match kind {
            IndexKind::Sparse => {
                let entries = sparse::parse_tsv(text)?;
                let count = entries.len();
                let m = &dict.manifest;
                match SparseIndex::build(id, entries.clone(), m.sparse_variant, m.page_count, &dict.collator) {
                    Ok(index) => {
                        if let Some(dir) = &dir {
                            write_atomic(&dir.join("sparse.tsv"), &index.to_tsv())?;
                            remove_if_exists(&dir.join("sparse.pending.tsv"))?;
                        }
                        dict.sparse = Some(index);
                        dict.pending_sparse = None;
                        Ok(LoadReport {
                            kind,
                            entries: count,
                            violations: Vec::new(),
                            activated: true,
                        })
                    }
                    Err(SparseError::SortViolation(violations)) => {
                        if let Some(dir) = &dir {
                            write_atomic(&dir.join("sparse.pending.tsv"), &sparse::entries_to_tsv(&entries))?;
                        }
                        dict.pending_sparse = Some((entries, violations.clone()));
                        Ok(LoadReport {
                            kind,
                            entries: count,
                            violations,
                            activated: false,
                        })
                    }
                    Err(e) => Err(e.into()),
                }
            }
            IndexKind::Full => {
                let pairs = crate::full::parse_tsv(text)?;
                let count = pairs.len();
                let incoming = FullIndex::build(id, pairs, dict.manifest.page_count, dict.collator.clone())?;
                let mut merged = dict.full.clone();
                merged.merge_manual(&incoming)?;
                if let Some(dir) = &dir {
                    write_full(dir, &merged)?;
                }
                dict.full = merged;
                Ok(LoadReport {
                    kind,
                    entries: count,
                    violations: Vec::new(),
                    activated: true,
                })
            }
        }
    }

    pub fn validate(&self, id: &str) -> Result<ValidationReport> {
        Ok(self.dictionary(id)?.validation())
    }

    pub fn record_feedback(&mut self, input: FeedbackInput) -> Result<VoteTally> {
        let now = self.now();
        let dir = self.dict_dir(&input.dictionary_id);
        let dict = self.dictionary_mut(&input.dictionary_id)?;
        dict.check_page(input.page)?;
        if input.contributor.trim().is_empty() || normalize_word(&input.word).is_empty() {
            return Err(Error::InvalidPayload("word and contributor are required".into()));
        }
        let candidates = dict.candidates(&input.word);
        let record = FeedbackRecord {
            dictionary_id: input.dictionary_id,
            page: input.page,
            word: input.word,
            verdict: input.verdict,
            contributor: input.contributor,
            timestamp: now,
        };
        let tally = dict.ledger.record(record.clone(), &candidates)?;
        if let Some(dir) = dir {
            append_line(&dir.join("feedback.log"), &record)?;
        }
        Ok(tally)
    }

    /// Records a vote and immediately promotes anything it confirmed.
    pub fn submit_feedback(&mut self, input: FeedbackInput) -> Result<FeedbackAck> {
        let id = input.dictionary_id.clone();
        let (word, page) = (input.word.clone(), input.page);
        self.record_feedback(input)?;
        let promotions = self.sweep(&id)?;
        let tally = self.dictionary(&id)?.ledger.tally(&word, page);
        Ok(FeedbackAck { tally, promotions })
    }

    /// Promotes every confirmed-present (word, page) missing from the full index.
    pub fn sweep(&mut self, id: &str) -> Result<Vec<Promotion>> {
        let dir = self.dict_dir(id);
        let dict = self.dictionary_mut(id)?;
        let (full, promotions) = promotion_sweep(&dict.ledger, &dict.full)?;
        if !promotions.is_empty() {
            if let Some(dir) = &dir {
                write_full(dir, &full)?;
            }
            dict.full = full;
        }
        Ok(promotions)
    }

    pub fn submit_marker(&mut self, input: MarkerInput) -> Result<LocationMarker> {
        let now = self.now();
        let dir = self.dict_dir(&input.dictionary_id);
        let dict = self.dictionary_mut(&input.dictionary_id)?;
        dict.check_page(input.page)?;
        if input.contributor.trim().is_empty() || normalize_word(&input.word).is_empty() {
            return Err(Error::InvalidPayload("word and contributor are required".into()));
        }
        let proposal = MarkerProposal {
            dictionary_id: input.dictionary_id,
            page: input.page,
            word: normalize_word(&input.word),
            x: input.x,
            y: input.y,
            contributor: input.contributor,
            timestamp: now,
        };
        let size = dict.manifest.page_size_of(proposal.page);
        proposal.check_bounds(size.width, size.height)?;
        let marker = dict.apply_marker(proposal.clone())?;
        if let Some(dir) = dir {
            append_line(&dir.join("markers.log"), &proposal)?;
        }
        Ok(marker)
    }

    pub fn attach_annotation(&mut self, input: AnnotationInput) -> Result<Annotation> {
        let now = self.now();
        let dir = self.dict_dir(&input.dictionary_id);
        let dict = self.dictionary_mut(&input.dictionary_id)?;
        if input.text.trim().is_empty() || input.meta.contributor.trim().is_empty() {
            return Err(Error::InvalidPayload(
                "annotation text and contributor are required".into(),
            ));
        }
        if !dict.knows(&input.word, Some(input.page)) {
            return Err(Error::UnknownTarget {
                dictionary_id: input.dictionary_id,
                word: input.word,
            });
        }
        let annotation = Annotation {
            id: dict.annotations.len() as u64 + 1,
            dictionary_id: input.dictionary_id,
            page: input.page,
            word: normalize_word(&input.word),
            text: input.text,
            meta: Meta {
                contributor: input.meta.contributor,
                updated: now,
                extra: input.meta.extra,
            },
        };
        if let Some(dir) = dir {
            append_line(&dir.join("annotations.log"), &annotation)?;
        }
        dict.annotations.push(annotation.clone());
        Ok(annotation)
    }

    /// Stores a fielded transcription. Without explicit boxes, boxes come from
    /// the word's marker once the dictionary is location indexed.
    pub fn store_digitization(&mut self, input: DigitizationInput) -> Result<DigitizedEntry> {
        let now = self.now();
        let dir = self.dict_dir(&input.dictionary_id);
        let dict = self.dictionary_mut(&input.dictionary_id)?;
        if input.fields.is_empty() {
            return Err(Error::InvalidPayload("at least one field must be non-empty".into()));
        }
        if input.meta.contributor.trim().is_empty() {
            return Err(Error::InvalidPayload("contributor is required".into()));
        }
        if !dict.knows(&input.word, None) {
            return Err(Error::UnknownTarget {
                dictionary_id: input.dictionary_id,
                word: input.word,
            });
        }
        for b in &input.boxes {
            dict.check_page(b.page)?;
            let size = dict.manifest.page_size_of(b.page);
            if !b.is_valid(size.width, size.height) {
                return Err(Error::InvalidPayload(format!("box {b:?} is not valid on its page")));
            }
        }
        let word = normalize_word(&input.word);
        let boxes = if input.boxes.is_empty() && dict.state() >= IndexState::LocationIndexed {
            let first_marked = dict.markers.keys().find(|(w, _)| *w == word).map(|(_, page)| *page);
            first_marked
                .and_then(|page| dict.auto_boxes(&word, page))
                .unwrap_or_default()
        } else {
            input.boxes
        };
        let entry = DigitizedEntry {
            id: dict.digitized.len() as u64 + 1,
            dictionary_id: input.dictionary_id,
            word,
            fields: input.fields,
            boxes,
            meta: Meta {
                contributor: input.meta.contributor,
                updated: now,
                extra: input.meta.extra,
            },
        };
        if let Some(dir) = dir {
            append_line(&dir.join("digitized.log"), &entry)?;
        }
        dict.digitized.push(entry.clone());
        Ok(entry)
    }

    /// Digitized entries of dictionaries associated with `code` that match
    /// every set field of `query`.
    pub fn find_digitized(&self, code: &str, query: &FieldQuery) -> Result<Vec<&DigitizedEntry>> {
        let dicts = self.dictionaries_for(code)?;
        let word = query.word.as_deref().map(normalize_word);
        let eq = |want: &Option<String>, have: &Option<String>| {
            want.as_deref()
                .is_none_or(|w| have.as_deref().is_some_and(|h| h.eq_ignore_ascii_case(w)))
        };
        Ok(dicts
            .into_iter()
            .flat_map(|d| d.digitized.iter())
            .filter(|e| word.as_deref().is_none_or(|w| normalize_word(&e.word) == w))
            .filter(|e| eq(&query.part_of_speech, &e.fields.part_of_speech))
            .filter(|e| eq(&query.origin_language, &e.fields.origin_language))
            .collect())
    }

    /// Re-serialized forms of everything loaded for `id`, keyed by file name.
    pub fn canonical_files(&self, id: &str) -> Result<BTreeMap<&'static str, String>> {
        let dict = self.dictionary(id)?;
        let mut out = BTreeMap::new();
        out.insert("manifest.toml", dict.manifest.to_toml());
        if let Some(rules) = &dict.tailoring {
            out.insert("tailoring.txt", rules.to_file_string());
        }
        if let Some(sparse) = &dict.sparse {
            out.insert("sparse.tsv", sparse.to_tsv());
        }
        if let Some((entries, _)) = &dict.pending_sparse {
            out.insert("sparse.pending.tsv", sparse::entries_to_tsv(entries));
        }
        if !dict.full.is_empty() {
            out.insert("full.tsv", dict.full.to_tsv());
            out.insert("full.provenance.tsv", dict.full.provenance_tsv());
        }
        Ok(out)
    }

    pub fn language_files(&self, code: &str) -> Result<(Option<String>, Option<String>)> {
        let entry = self.language(code)?;
        Ok((
            entry.rules.as_ref().map(|r| r.to_file_string()),
            entry.words.as_ref().map(|w| w.join("\n") + "\n"),
        ))
    }
}

/// True when `state` lies on the route the state machine takes to `target`.
fn reaches_through(target: IndexState, state: IndexState) -> bool {
    use IndexState::*;
    match (target, state) {
        (_, OrderedPages) => false,
        (t, s) if t == s => true,
        // the sparse stage may have been skipped
        (_, SparseIndexed) => false,
        (Annotated, Digitized) | (Digitized, Annotated) => false,
        (t, s) => s < t,
    }
}

fn write_full(dir: &Path, full: &FullIndex) -> Result<()> {
    write_atomic(&dir.join("full.tsv"), &full.to_tsv())?;
    write_atomic(&dir.join("full.provenance.tsv"), &full.provenance_tsv())
}

fn remove_if_exists(path: &Path) -> Result<()> {
    match fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}
