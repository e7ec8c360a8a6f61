//! Found / not-found votes per (word, page) and the policies that turn them
//! into confirmed presence or absence.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::full::{normalize_word, FullIndex, FullIndexError};
use crate::sparse::PageRange;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeedbackError {
    #[error("page {page} is not a candidate page for {word:?}")]
    IrrelevantPage { word: String, page: u32 },
    #[error("unknown dictionary {0:?}")]
    UnknownDictionary(String),
    #[error(transparent)]
    Promotion(#[from] FullIndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub dictionary_id: String,
    pub page: u32,
    pub word: String,
    pub verdict: Verdict,
    pub contributor: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TallyStatus {
    Open,
    ConfirmedPresent,
    ConfirmedAbsent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub present_votes: u32,
    pub absent_votes: u32,
    pub status: TallyStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeedbackPolicy {
    /// Confirm once one side leads the other by at least `k` votes.
    Threshold { k: u32 },
    /// Once `min_votes` are in, the strictly larger side wins.
    Majority { min_votes: u32 },
}

impl Default for FeedbackPolicy {
    fn default() -> Self {
        FeedbackPolicy::Threshold { k: 3 }
    }
}

pub fn apply_policy(present: u32, absent: u32, policy: FeedbackPolicy) -> TallyStatus {
    match policy {
        FeedbackPolicy::Threshold { k } => {
            let k = k.max(1);
            if present >= absent.saturating_add(k) {
                TallyStatus::ConfirmedPresent
            } else if absent >= present.saturating_add(k) {
                TallyStatus::ConfirmedAbsent
            } else {
                TallyStatus::Open
            }
        }
        FeedbackPolicy::Majority { min_votes } => {
            if present + absent < min_votes.max(1) {
                TallyStatus::Open
            } else if present > absent {
                TallyStatus::ConfirmedPresent
            } else if absent > present {
                TallyStatus::ConfirmedAbsent
            } else {
                TallyStatus::Open
            }
        }
    }
}

type Target = (String, u32);
// timestamp, log sequence, verdict
type Vote = (DateTime<Utc>, usize, Verdict);

/// Pages a vote may target: a sparse candidate range or an explicit set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidates {
    Range(PageRange),
    Pages(BTreeSet<u32>),
}

impl Candidates {
    pub fn contains(&self, page: u32) -> bool {
        match self {
            Candidates::Range(r) => r.contains(page),
            Candidates::Pages(p) => p.contains(&page),
        }
    }

    pub fn pages(&self) -> Vec<u32> {
        match self {
            Candidates::Range(r) => r.to_vec(),
            Candidates::Pages(p) => p.iter().copied().collect(),
        }
    }
}

impl From<PageRange> for Candidates {
    fn from(r: PageRange) -> Self {
        Candidates::Range(r)
    }
}

/// Append-only vote log for one dictionary with per-contributor replacement.
#[derive(Debug, Clone, Default)]
pub struct FeedbackLedger {
    policy: FeedbackPolicy,
    records: Vec<FeedbackRecord>,
    latest: BTreeMap<Target, BTreeMap<String, Vote>>,
}

impl FeedbackLedger {
    pub fn new(policy: FeedbackPolicy) -> Self {
        FeedbackLedger {
            policy,
            ..Default::default()
        }
    }

    pub fn policy(&self) -> FeedbackPolicy {
        self.policy
    }

    pub fn records(&self) -> &[FeedbackRecord] {
        &self.records
    }

    /// Records a vote after checking the page is one of `candidates`.
    pub fn record(&mut self, rec: FeedbackRecord, candidates: &Candidates) -> Result<VoteTally, FeedbackError> {
        if !candidates.contains(rec.page) {
            return Err(FeedbackError::IrrelevantPage {
                word: rec.word,
                page: rec.page,
            });
        }
        Ok(self.replay(rec))
    }

    /// Appends a vote without the candidate check (log replay).
    pub fn replay(&mut self, rec: FeedbackRecord) -> VoteTally {
        let target = (normalize_word(&rec.word), rec.page);
        let seq = self.records.len();
        let votes = self.latest.entry(target.clone()).or_default();
        let newer = votes
            .get(&rec.contributor)
            .is_none_or(|(ts, s, _)| (rec.timestamp, seq) > (*ts, *s));
        if newer {
            votes.insert(rec.contributor.clone(), (rec.timestamp, seq, rec.verdict));
        }
        self.records.push(rec);
        self.tally_of(&target)
    }

    fn tally_of(&self, target: &Target) -> VoteTally {
        let (mut present, mut absent) = (0, 0);
        if let Some(votes) = self.latest.get(target) {
            for (_, _, verdict) in votes.values() {
                match verdict {
                    Verdict::Present => present += 1,
                    Verdict::Absent => absent += 1,
                }
            }
        }
        VoteTally {
            present_votes: present,
            absent_votes: absent,
            status: apply_policy(present, absent, self.policy),
        }
    }

    pub fn tally(&self, word: &str, page: u32) -> VoteTally {
        self.tally_of(&(normalize_word(word), page))
    }

    pub fn confirmed(&self, status: TallyStatus) -> BTreeSet<(String, u32)> {
        self.latest
            .keys()
            .filter(|t| self.tally_of(t).status == status)
            .cloned()
            .collect()
    }

    /// True when every candidate page of `word` is confirmed absent.
    pub fn all_absent(&self, word: &str, candidates: &Candidates) -> bool {
        let word = normalize_word(word);
        let pages = candidates.pages();
        !pages.is_empty()
            && pages
                .into_iter()
                .all(|page| self.tally_of(&(word.clone(), page)).status == TallyStatus::ConfirmedAbsent)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Promotion {
    pub word: String,
    pub page: u32,
}

/// Promotes every confirmed-present target missing from `full`. Running it
/// again on the returned index promotes nothing.
pub fn promotion_sweep(
    ledger: &FeedbackLedger,
    full: &FullIndex,
) -> Result<(FullIndex, Vec<Promotion>), FeedbackError> {
    let mut index = full.clone();
    let mut applied = Vec::new();
    for (word, page) in ledger.confirmed(TallyStatus::ConfirmedPresent) {
        if index.contains(&word, page) {
            continue;
        }
        index = index.promote(&word, page)?;
        applied.push(Promotion { word, page });
    }
    Ok((index, applied))
}
