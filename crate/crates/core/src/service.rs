//! Per-language search across dictionaries and definition sources, plus the
//! contribution entry points used by the HTTP layer.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use tokio::task::JoinSet;

use crate::error::{Error, Result};
use crate::full::normalize_word;
use crate::location::{Annotation, LocationMarker, Meta, ReadingDirection, RegionBox};
use crate::prefix::{Expansion, PrefixError};
use crate::store::{
    AnnotationInput, DigitizationInput, DigitizedEntry, Exists, FeedbackAck, FeedbackInput, FieldQuery, IndexState,
    MarkerInput, Store,
};

pub const DEFAULT_SOURCE_TIMEOUT_MS: u64 = 2_000;
pub const DEFAULT_SEARCH_DEADLINE_MS: u64 = 5_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub query: String,
    pub language: String,
    pub resources: Vec<Resource>,
    pub definitions: Vec<Definition>,
    pub dictionaries: Vec<DictionaryBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    #[serde(rename = "type")]
    pub kind: String,
    pub href: String,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Definition {
    pub text: String,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryBlock {
    pub id: String,
    pub exists: Exists,
    pub pages: Vec<PageBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxBlock {
    pub top: u32,
    pub bottom: u32,
    pub left: u32,
    pub right: u32,
}

impl From<RegionBox> for BoxBlock {
    fn from(b: RegionBox) -> Self {
        BoxBlock {
            top: b.top,
            bottom: b.bottom,
            left: b.left,
            right: b.right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationBlock {
    pub id: u64,
    pub text: String,
    pub meta: Meta,
}

impl From<&Annotation> for AnnotationBlock {
    fn from(a: &Annotation) -> Self {
        AnnotationBlock {
            id: a.id,
            text: a.text.clone(),
            meta: a.meta.clone(),
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageBlock {
    pub number: u32,
    pub src: String,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Point>,
    pub boxes: Vec<BoxBlock>,
    pub annotations: Vec<AnnotationBlock>,
    /// Set for pages absent from the scan; the image is a placeholder.
    #[serde(default, skip_serializing_if = "is_false")]
    pub missing: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceResult {
    pub resources: Vec<Resource>,
    pub definitions: Vec<Definition>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("source {source_id}: {message}")]
pub struct SourceError {
    pub source_id: String,
    pub message: String,
}

/// An external provider of definitions and related resources.
#[async_trait]
pub trait DefinitionSource: Send + Sync {
    fn id(&self) -> &str;
    fn timeout(&self) -> Duration;
    fn enabled(&self) -> bool {
        true
    }
    async fn fetch(&self, query: &str, language: &str) -> std::result::Result<SourceResult, SourceError>;
}

/// Definitions from digitized entries of the language's dictionaries.
/// Extra fields holding URLs become resources typed by their key.
pub struct LocalFieldedSource {
    store: Arc<RwLock<Store>>,
    timeout: Duration,
}

impl LocalFieldedSource {
    pub fn new(store: Arc<RwLock<Store>>, timeout: Duration) -> Self {
        LocalFieldedSource { store, timeout }
    }
}

fn entry_meta(entry: &DigitizedEntry) -> Meta {
    let mut meta = entry.meta.clone();
    meta.extra.insert(
        "dictionary".into(),
        serde_json::Value::String(entry.dictionary_id.clone()),
    );
    for (key, value) in [
        ("part_of_speech", &entry.fields.part_of_speech),
        ("origin_language", &entry.fields.origin_language),
    ] {
        if let Some(v) = value {
            meta.extra.insert(key.into(), serde_json::Value::String(v.clone()));
        }
    }
    meta
}

#[async_trait]
impl DefinitionSource for LocalFieldedSource {
    fn id(&self) -> &str {
        "local"
    }

    fn timeout(&self) -> Duration {
        self.timeout
    }

    async fn fetch(&self, query: &str, language: &str) -> std::result::Result<SourceResult, SourceError> {
        let store = self.store.read().map_err(|_| SourceError {
            source_id: "local".into(),
            message: "store lock poisoned".into(),
        })?;
        let filter = FieldQuery {
            word: Some(query.to_string()),
            ..Default::default()
        };
        let entries = store.find_digitized(language, &filter).map_err(|e| SourceError {
            source_id: "local".into(),
            message: e.to_string(),
        })?;
        let mut out = SourceResult::default();
        for entry in entries {
            let meta = entry_meta(entry);
            if let Some(text) = entry.fields.definition.as_ref().filter(|t| !t.trim().is_empty()) {
                out.definitions.push(Definition {
                    text: text.clone(),
                    meta: meta.clone(),
                });
            }
            for example in entry.fields.examples.iter().filter(|e| !e.trim().is_empty()) {
                let mut meta = meta.clone();
                meta.extra
                    .insert("kind".into(), serde_json::Value::String("example".into()));
                out.definitions.push(Definition {
                    text: example.clone(),
                    meta,
                });
            }
            for (key, value) in &entry.fields.extra {
                if value.starts_with("http://") || value.starts_with("https://") {
                    out.resources.push(Resource {
                        kind: key.clone(),
                        href: value.clone(),
                        meta: meta.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub id: String,
    pub kind: SourceKind,
    #[serde(default)]
    pub timeout_ms: Option<u64>,
    #[serde(default = "enabled_default")]
    pub enabled: bool,
}

fn enabled_default() -> bool {
    true
}

fn default_port() -> u16 {
    8080
}

fn default_bind() -> String {
    "127.0.0.1".into()
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

fn default_source_timeout() -> u64 {
    DEFAULT_SOURCE_TIMEOUT_MS
}

fn default_deadline() -> u64 {
    DEFAULT_SEARCH_DEADLINE_MS
}

fn default_sources() -> Vec<SourceConfig> {
    vec![SourceConfig {
        id: "local".into(),
        kind: SourceKind::Local,
        timeout_ms: None,
        enabled: true,
    }]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_source_timeout")]
    pub source_timeout_ms: u64,
    #[serde(default = "default_deadline")]
    pub search_deadline_ms: u64,
    #[serde(default = "default_sources")]
    pub sources: Vec<SourceConfig>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: default_bind(),
            port: default_port(),
            data_dir: default_data_dir(),
            source_timeout_ms: DEFAULT_SOURCE_TIMEOUT_MS,
            search_deadline_ms: DEFAULT_SEARCH_DEADLINE_MS,
            sources: default_sources(),
        }
    }
}

impl ServiceConfig {
    /// Reads a TOML config file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let config: ServiceConfig = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str(&text).map_err(|e| Error::format(p, e))?
            }
            None => ServiceConfig::default(),
        };
        config.check()?;
        Ok(config)
    }

    /// Applies `PAGEDEX_PORT` and `PAGEDEX_DATA_DIR` from `var`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(port) = var("PAGEDEX_PORT") {
            self.port = port
                .parse()
                .map_err(|_| Error::format("PAGEDEX_PORT", format!("{port:?} is not a port number")))?;
        }
        if let Some(dir) = var("PAGEDEX_DATA_DIR") {
            self.data_dir = PathBuf::from(dir);
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let zero = self.source_timeout_ms == 0
            || self.search_deadline_ms == 0
            || self.sources.iter().any(|s| s.timeout_ms == Some(0));
        if zero {
            return Err(Error::format("config", "timeouts must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DictionarySummary {
    pub id: String,
    pub title: String,
    pub index_state: IndexState,
    pub page_count: u32,
    pub reading_direction: ReadingDirection,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LanguageSummary {
    pub code: String,
    pub display_name: String,
    pub direction: ReadingDirection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keyboard_layout_ref: Option<String>,
    pub has_prefix_tree: bool,
    pub dictionaries: Vec<DictionarySummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkerAck {
    pub marker: LocationMarker,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotationAck {
    pub id: u64,
    pub annotation: Annotation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitizationAck {
    pub id: u64,
    pub entry: DigitizedEntry,
}

pub struct Engine {
    store: Arc<RwLock<Store>>,
    sources: Vec<Arc<dyn DefinitionSource>>,
    deadline: Duration,
}

impl Engine {
    pub fn new(store: Store, config: &ServiceConfig) -> Self {
        let store = Arc::new(RwLock::new(store));
        let sources = config
            .sources
            .iter()
            .filter(|s| s.enabled)
            .map(|s| {
                let timeout = Duration::from_millis(s.timeout_ms.unwrap_or(config.source_timeout_ms));
                match s.kind {
                    SourceKind::Local => {
                        Arc::new(LocalFieldedSource::new(store.clone(), timeout)) as Arc<dyn DefinitionSource>
                    }
                }
            })
            .collect();
        Engine {
            store,
            sources,
            deadline: Duration::from_millis(config.search_deadline_ms),
        }
    }

    pub fn with_sources(mut self, sources: Vec<Arc<dyn DefinitionSource>>) -> Self {
        self.sources = sources;
        self
    }

    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn shared_store(&self) -> Arc<RwLock<Store>> {
        self.store.clone()
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn languages(&self) -> Vec<LanguageSummary> {
        let store = self.read();
        store
            .languages()
            .map(|entry| {
                let lang = &entry.language;
                let dictionaries = store
                    .dictionaries_for(&lang.code)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|d| DictionarySummary {
                        id: d.id().to_string(),
                        title: d.manifest().title.clone(),
                        index_state: d.state(),
                        page_count: d.manifest().page_count,
                        reading_direction: d.manifest().reading_direction,
                    })
                    .collect();
                LanguageSummary {
                    code: lang.code.clone(),
                    display_name: lang.display_name.clone(),
                    direction: lang.direction,
                    keyboard_layout_ref: lang.keyboard_layout_ref.clone(),
                    has_prefix_tree: entry.prefix_tree.is_some(),
                    dictionaries,
                }
            })
            .collect()
    }

    /// Dictionary blocks only, without consulting definition sources.
    pub fn dictionary_blocks(&self, query: &str, language: &str) -> Result<Vec<DictionaryBlock>> {
        let store = self.read();
        let word = normalize_word(query);
        let mut blocks = Vec::new();
        for dict in store.dictionaries_for(language)? {
            let hit = dict.lookup(&word);
            let manifest = dict.manifest();
            let pages = hit
                .pages
                .iter()
                .map(|&number| {
                    let size = manifest.page_size_of(number);
                    PageBlock {
                        number,
                        src: manifest.page_src(number),
                        width: size.width,
                        height: size.height,
                        location: dict.marker(&word, number).map(|m| Point { x: m.x, y: m.y }),
                        boxes: dict.boxes_for(&word, number).into_iter().map(BoxBlock::from).collect(),
                        annotations: dict
                            .annotations_for(&word, number)
                            .into_iter()
                            .map(AnnotationBlock::from)
                            .collect(),
                        missing: manifest.is_missing(number),
                    }
                })
                .collect();
            blocks.push(DictionaryBlock {
                id: dict.id().to_string(),
                exists: hit.exists,
                pages,
            });
        }
        Ok(blocks)
    }

    pub async fn search(&self, query: &str, language: &str) -> Result<SearchResponse> {
        let word = normalize_word(query);
        if word.is_empty() {
            return Err(Error::InvalidPayload("query is empty".into()));
        }
        let dictionaries = self.dictionary_blocks(&word, language)?;

        let mut tasks = JoinSet::new();
        for (idx, source) in self.sources.iter().enumerate().filter(|(_, s)| s.enabled()) {
            let source = source.clone();
            let (word, language) = (word.clone(), language.to_string());
            tasks.spawn(async move {
                let result = tokio::time::timeout(source.timeout(), source.fetch(&word, &language)).await;
                (idx, source.id().to_string(), result)
            });
        }
        let mut results: Vec<(usize, SourceResult)> = Vec::new();
        let deadline = tokio::time::Instant::now() + self.deadline;
        loop {
            match tokio::time::timeout_at(deadline, tasks.join_next()).await {
                Ok(Some(Ok((idx, _, Ok(Ok(result)))))) => results.push((idx, result)),
                Ok(Some(Ok((_, id, Ok(Err(e)))))) => {
                    tracing::warn!(source = %id, error = %e, "definition source failed")
                }
                Ok(Some(Ok((_, id, Err(_))))) => tracing::warn!(source = %id, "definition source timed out"),
                Ok(Some(Err(e))) => tracing::warn!(error = %e, "definition source task failed"),
                Ok(None) => break,
                Err(_) => {
                    tracing::warn!("search deadline reached; dropping pending sources");
                    tasks.abort_all();
                    break;
                }
            }
        }
        results.sort_by_key(|(idx, _)| *idx);
        let mut response = SearchResponse {
            query: word,
            language: language.to_string(),
            resources: Vec::new(),
            definitions: Vec::new(),
            dictionaries,
        };
        for (_, r) in results {
            response.resources.extend(r.resources);
            response.definitions.extend(r.definitions);
        }
        Ok(response)
    }

    pub fn list_prefix(&self, language: &str, prefix: &str) -> Result<Expansion> {
        let store = self.read();
        let entry = store.language(language)?;
        let tree = entry
            .prefix_tree
            .as_ref()
            .ok_or_else(|| PrefixError::UnknownPrefix(prefix.to_string()))?;
        Ok(tree.expand(prefix)?)
    }

    pub fn submit_feedback(&self, input: FeedbackInput) -> Result<FeedbackAck> {
        self.write().submit_feedback(input)
    }

    pub fn submit_marker(&self, input: MarkerInput) -> Result<MarkerAck> {
        let marker = self.write().submit_marker(input)?;
        Ok(MarkerAck { marker })
    }

    pub fn submit_annotation(&self, input: AnnotationInput) -> Result<AnnotationAck> {
        let annotation = self.write().attach_annotation(input)?;
        Ok(AnnotationAck {
            id: annotation.id,
            annotation,
        })
    }

    pub fn submit_digitization(&self, input: DigitizationInput) -> Result<DigitizationAck> {
        let entry = self.write().store_digitization(input)?;
        Ok(DigitizationAck { id: entry.id, entry })
    }
}
