//! Page-anchored sparse indexes.
//!
//! A sparse index lists one anchor word per indexed page (the first or the
//! last headword printed there). Because the pages of a dictionary are
//! sorted, a predecessor search over the anchors yields the contiguous range
//! of pages on which a word must appear if it is in the dictionary at all.
//!
//! Pages on which no headword begins carry the continuing headword as their
//! anchor, so a long entry shows up as a run of equal anchors on
//! consecutive pages.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::collation::Collator;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SparseError {
    #[error("sparse index has no entries")]
    EmptyIndex,
    #[error("anchor words out of collation order at positions {0:?}")]
    SortViolation(Vec<usize>),
    #[error("page {0} is anchored more than once")]
    DuplicatePage(u32),
    #[error("page {page} is outside 1..={page_count}")]
    PageOutOfRange { page: u32, page_count: u32 },
    #[error("anchor {0:?} is not a single collation unit")]
    NotSingleUnit(String),
    #[error("empty anchor word for page {0}")]
    EmptyWord(u32),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub word: String,
    pub page: u32,
}

impl SparseEntry {
    pub fn new(word: impl Into<String>, page: u32) -> Self {
        SparseEntry {
            word: word.into(),
            page,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SparseVariant {
    #[default]
    FirstWord,
    LastWord,
}

/// Inclusive, non-empty range of page numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PageRange {
    pub first: u32,
    pub last: u32,
}

impl PageRange {
    pub fn new(first: u32, last: u32) -> Self {
        debug_assert!(first <= last);
        PageRange { first, last }
    }

    pub fn single(page: u32) -> Self {
        PageRange {
            first: page,
            last: page,
        }
    }

    pub fn contains(&self, page: u32) -> bool {
        (self.first..=self.last).contains(&page)
    }

    pub fn len(&self) -> usize {
        (self.last - self.first) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<u32> {
        self.first..=self.last
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparseExists {
    Yes,
    Maybe,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparseLookupResult {
    pub pages: PageRange,
    pub exists: SparseExists,
    pub anchor_word: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIndex {
    pub dictionary_id: String,
    pub variant: SparseVariant,
    pub page_count: u32,
    pub rules_ref: String,
    entries: Vec<SparseEntry>,
}

/// Positions `i` where `entries[i]` sorts after `entries[i + 1]`.
pub fn validate_sorted(entries: &[SparseEntry], collator: &Collator) -> Vec<usize> {
    entries
        .windows(2)
        .enumerate()
        .filter(|(_, pair)| collator.compare(&pair[0].word, &pair[1].word) == Ordering::Greater)
        .map(|(i, _)| i)
        .collect()
}

impl SparseIndex {
    pub fn build(
        dictionary_id: impl Into<String>,
        mut entries: Vec<SparseEntry>,
        variant: SparseVariant,
        page_count: u32,
        collator: &Collator,
    ) -> Result<Self, SparseError> {
        if entries.is_empty() {
            return Err(SparseError::EmptyIndex);
        }
        entries.sort_by_key(|e| e.page);
        check_pages(&entries, page_count)?;
        let violations = validate_sorted(&entries, collator);
        if !violations.is_empty() {
            return Err(SparseError::SortViolation(violations));
        }
        Ok(SparseIndex {
            dictionary_id: dictionary_id.into(),
            variant,
            page_count,
            rules_ref: collator.language_code().to_string(),
            entries,
        })
    }

    /// Index of the pages where each letter of the alphabet begins.
    pub fn build_alphabet(
        dictionary_id: impl Into<String>,
        letter_anchors: Vec<SparseEntry>,
        page_count: u32,
        collator: &Collator,
    ) -> Result<Self, SparseError> {
        if let Some(bad) = letter_anchors.iter().find(|e| collator.expand(&e.word).len() != 1) {
            return Err(SparseError::NotSingleUnit(bad.word.clone()));
        }
        SparseIndex::build(
            dictionary_id,
            letter_anchors,
            SparseVariant::FirstWord,
            page_count,
            collator,
        )
    }

    /// Keeps the anchor of every `window`-th page (starting with the first),
    /// the window-of-N indexing strategy.
    pub fn build_windowed(
        dictionary_id: impl Into<String>,
        per_page: Vec<SparseEntry>,
        window: usize,
        page_count: u32,
        collator: &Collator,
    ) -> Result<Self, SparseError> {
        let mut per_page = per_page;
        per_page.sort_by_key(|e| e.page);
        let kept = per_page.into_iter().step_by(window.max(1)).collect();
        SparseIndex::build(dictionary_id, kept, SparseVariant::FirstWord, page_count, collator)
    }

    pub fn entries(&self) -> &[SparseEntry] {
        &self.entries
    }

    /// Candidate pages for `word` by binary search over the anchors.
    pub fn lookup(&self, word: &str, collator: &Collator) -> Result<SparseLookupResult, SparseError> {
        if self.entries.is_empty() {
            return Err(SparseError::EmptyIndex);
        }
        let n = self.entries.len();
        let key = collator.key(word);
        // ordering of an anchor relative to `word`
        let cmp = |e: &SparseEntry| collator.compare_to_key(&e.word, &key);
        match self.variant {
            SparseVariant::FirstWord => {
                // count of anchors <= word
                let at_or_before = self.entries.partition_point(|e| cmp(e) != Ordering::Greater);
                if at_or_before == 0 {
                    return Ok(self.before_first());
                }
                let i = at_or_before - 1;
                if cmp(&self.entries[i]) == Ordering::Equal {
                    let start = self.entries[..=i].partition_point(|e| cmp(e) == Ordering::Less);
                    return Ok(self.equal_run(start, i));
                }
                let last = match self.entries.get(i + 1) {
                    Some(next) => next.page - 1,
                    None => self.page_count,
                };
                Ok(self.maybe(i, PageRange::new(self.entries[i].page, last)))
            }
            SparseVariant::LastWord => {
                let before = self.entries.partition_point(|e| cmp(e) == Ordering::Less);
                if before == n {
                    return Ok(self.after_last());
                }
                let i = before;
                if cmp(&self.entries[i]) == Ordering::Equal {
                    let end = i + self.entries[i..].partition_point(|e| cmp(e) == Ordering::Equal) - 1;
                    return Ok(self.equal_run(i, end));
                }
                let first = match i.checked_sub(1) {
                    Some(prev) => self.entries[prev].page + 1,
                    None => 1,
                };
                Ok(self.maybe(i, PageRange::new(first, self.entries[i].page)))
            }
        }
    }

    /// Same contract as [`SparseIndex::lookup`], by scanning every anchor.
    pub fn lookup_linear(&self, word: &str, collator: &Collator) -> Result<SparseLookupResult, SparseError> {
        if self.entries.is_empty() {
            return Err(SparseError::EmptyIndex);
        }
        let cmp: Vec<Ordering> = self.entries.iter().map(|e| collator.compare(&e.word, word)).collect();
        let equal: Vec<usize> = (0..cmp.len()).filter(|&i| cmp[i] == Ordering::Equal).collect();
        if let (Some(&start), Some(&end)) = (equal.first(), equal.last()) {
            return Ok(self.equal_run(start, end));
        }
        match self.variant {
            SparseVariant::FirstWord => {
                let mut pred = None;
                for (i, c) in cmp.iter().enumerate() {
                    if *c == Ordering::Less {
                        pred = Some(i);
                    }
                }
                let Some(i) = pred else {
                    return Ok(self.before_first());
                };
                let last = self.entries.get(i + 1).map_or(self.page_count, |e| e.page - 1);
                Ok(self.maybe(i, PageRange::new(self.entries[i].page, last)))
            }
            SparseVariant::LastWord => {
                let Some(i) = cmp.iter().position(|c| *c == Ordering::Greater) else {
                    return Ok(self.after_last());
                };
                let first = if i == 0 { 1 } else { self.entries[i - 1].page + 1 };
                Ok(self.maybe(i, PageRange::new(first, self.entries[i].page)))
            }
        }
    }

    fn equal_run(&self, start: usize, end: usize) -> SparseLookupResult {
        SparseLookupResult {
            pages: PageRange::new(self.entries[start].page, self.entries[end].page),
            exists: SparseExists::Yes,
            anchor_word: self.entries[start].word.clone(),
        }
    }

    fn maybe(&self, i: usize, pages: PageRange) -> SparseLookupResult {
        SparseLookupResult {
            pages,
            exists: SparseExists::Maybe,
            anchor_word: self.entries[i].word.clone(),
        }
    }

    fn before_first(&self) -> SparseLookupResult {
        self.maybe(0, PageRange::single(self.entries[0].page))
    }

    fn after_last(&self) -> SparseLookupResult {
        let last = self.entries.len() - 1;
        self.maybe(last, PageRange::single(self.entries[last].page))
    }

    /// Canonical TSV form, ordered by page.
    pub fn to_tsv(&self) -> String {
        entries_to_tsv(&self.entries)
    }
}

fn check_pages(entries: &[SparseEntry], page_count: u32) -> Result<(), SparseError> {
    let mut last_page = 0;
    for e in entries {
        if e.word.is_empty() {
            return Err(SparseError::EmptyWord(e.page));
        }
        if e.page == 0 || e.page > page_count {
            return Err(SparseError::PageOutOfRange {
                page: e.page,
                page_count,
            });
        }
        if e.page == last_page {
            return Err(SparseError::DuplicatePage(e.page));
        }
        last_page = e.page;
    }
    Ok(())
}

/// Parses `WORD<TAB>PAGE` lines; `#` comments and blank lines are skipped.
/// Entries come back sorted by page.
pub fn parse_tsv(text: &str) -> Result<Vec<SparseEntry>, SparseError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: &str| SparseError::Parse {
            line: idx + 1,
            message: message.to_string(),
        };
        let (word, page) = line.split_once('\t').ok_or_else(|| err("expected WORD<TAB>PAGE"))?;
        let page: u32 = page.trim().parse().map_err(|_| err("page is not a positive integer"))?;
        if word.is_empty() {
            return Err(err("empty word"));
        }
        entries.push(SparseEntry::new(word, page));
    }
    entries.sort_by_key(|e| e.page);
    Ok(entries)
}

pub fn entries_to_tsv(entries: &[SparseEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(out, "{}\t{}", e.word, e.page);
    }
    out
}
