//! Language-wide prefix tree over a spell-checker wordlist.
//!
//! Words are grouped by their leading collation units (so a compound letter
//! counts as one letter). Levels above `depth` are branch nodes; nodes at
//! `depth` hold the sorted words themselves. Oversized leaf buckets can be
//! split further by lengthening the prefix for those words only.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::collation::{Collator, ExpandedUnit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrefixError {
    #[error("unknown prefix {0:?}")]
    UnknownPrefix(String),
    #[error("wordlist is empty")]
    EmptyWordlist,
    #[error("depth must be at least 1")]
    ZeroDepth,
}

/// Reads a wordlist: one word per line, Ispell-style `/FLAGS` suffixes
/// dropped, blank lines skipped, duplicates removed (first occurrence kept).
pub fn parse_wordlist(text: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for line in text.lines() {
        let word = line.split('/').next().unwrap_or("").trim();
        if word.is_empty() {
            continue;
        }
        if seen.insert(word.to_string()) {
            words.push(word.to_string());
        }
    }
    words
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeBody {
    Branch {
        /// Words whose units end exactly at this prefix.
        terminal: Vec<String>,
        children: Vec<PrefixNode>,
    },
    Leaf {
        words: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixNode {
    pub prefix: String,
    /// Prefix length in collation units.
    pub level: usize,
    /// Primary weight of the last unit of the prefix (0 at the root).
    pub weight: u32,
    pub word_count: usize,
    pub body: NodeBody,
}

struct Word {
    text: String,
    units: Vec<ExpandedUnit>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ChildSummary {
    pub prefix: String,
    pub count: usize,
}

/// One step of lazy tree expansion.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum Expansion {
    Branch {
        prefix: String,
        terminal: Vec<String>,
        children: Vec<ChildSummary>,
    },
    Leaf {
        prefix: String,
        words: Vec<String>,
    },
}

#[derive(Debug, Clone)]
pub struct PrefixTree {
    pub depth: usize,
    pub root: PrefixNode,
    collator: Arc<Collator>,
}

fn sort_words(words: &mut [Word]) {
    words.sort_by(|a, b| {
        let wa = a.units.iter().map(|u| u.weight);
        let wb = b.units.iter().map(|u| u.weight);
        wa.cmp(wb).then_with(|| a.text.cmp(&b.text))
    });
}

fn build_node(prefix: String, level: usize, weight: u32, mut words: Vec<Word>, depth: usize) -> PrefixNode {
    let word_count = words.len();
    if level >= depth && level > 0 {
        sort_words(&mut words);
        return PrefixNode {
            prefix,
            level,
            weight,
            word_count,
            body: NodeBody::Leaf {
                words: words.into_iter().map(|w| w.text).collect(),
            },
        };
    }
    let mut terminal = Vec::new();
    let mut groups: BTreeMap<u32, (String, Vec<Word>)> = BTreeMap::new();
    for w in words {
        match w.units.get(level) {
            None => terminal.push(w),
            Some(unit) => {
                let entry = groups
                    .entry(unit.weight)
                    .or_insert_with(|| (format!("{prefix}{}", unit.text), Vec::new()));
                entry.1.push(w);
            }
        }
    }
    sort_words(&mut terminal);
    let children = groups
        .into_iter()
        .map(|(w, (child_prefix, group))| build_node(child_prefix, level + 1, w, group, depth))
        .collect();
    PrefixNode {
        prefix,
        level,
        weight,
        word_count,
        body: NodeBody::Branch {
            terminal: terminal.into_iter().map(|w| w.text).collect(),
            children,
        },
    }
}

impl PrefixTree {
    pub fn build(words: &[String], depth: usize, collator: Arc<Collator>) -> Result<Self, PrefixError> {
        if depth == 0 {
            return Err(PrefixError::ZeroDepth);
        }
        if words.is_empty() {
            return Err(PrefixError::EmptyWordlist);
        }
        let mut seen = HashSet::new();
        let prepared: Vec<Word> = words
            .iter()
            .filter(|w| !w.is_empty() && seen.insert(w.as_str()))
            .map(|w| Word {
                text: w.clone(),
                units: collator.expand(w),
            })
            .filter(|w| !w.units.is_empty())
            .collect();
        if prepared.is_empty() {
            return Err(PrefixError::EmptyWordlist);
        }
        let root = build_node(String::new(), 0, 0, prepared, depth);
        Ok(PrefixTree { depth, root, collator })
    }

    pub fn word_count(&self) -> usize {
        self.root.word_count
    }

    fn find(&self, prefix: &str) -> Option<&PrefixNode> {
        let units = self.collator.expand(prefix);
        let mut node = &self.root;
        for unit in &units {
            let NodeBody::Branch { children, .. } = &node.body else {
                return None;
            };
            node = children.iter().find(|c| c.weight == unit.weight)?;
        }
        Some(node)
    }

    /// Children (or leaf words) under `prefix`; the empty prefix is the root.
    pub fn expand(&self, prefix: &str) -> Result<Expansion, PrefixError> {
        let node = self
            .find(prefix)
            .ok_or_else(|| PrefixError::UnknownPrefix(prefix.to_string()))?;
        Ok(match &node.body {
            NodeBody::Branch { terminal, children } => Expansion::Branch {
                prefix: node.prefix.clone(),
                terminal: terminal.clone(),
                children: children
                    .iter()
                    .map(|c| ChildSummary {
                        prefix: c.prefix.clone(),
                        count: c.word_count,
                    })
                    .collect(),
            },
            NodeBody::Leaf { words } => Expansion::Leaf {
                prefix: node.prefix.clone(),
                words: words.clone(),
            },
        })
    }

    /// Replaces every leaf bucket larger than `tolerance` with buckets one
    /// unit longer, recursively. Buckets whose words cannot be told apart by
    /// a longer prefix stay as they are.
    pub fn split_oversized(&self, tolerance: usize) -> PrefixTree {
        let tolerance = tolerance.max(1);
        let mut root = self.root.clone();
        split_node(&mut root, tolerance, &self.collator);
        PrefixTree {
            depth: self.depth,
            root,
            collator: self.collator.clone(),
        }
    }

    /// Leaf buckets and terminal groups: the units a user actually expands
    /// to reach words. Every word belongs to exactly one.
    pub fn buckets(&self) -> Vec<ChildSummary> {
        let mut out = Vec::new();
        collect_buckets(&self.root, &mut out);
        out
    }

    /// Bucket sizes at a given prefix length, where words shorter than the
    /// prefix form buckets of their own.
    pub fn level_buckets(&self, level: usize) -> Vec<ChildSummary> {
        let mut out = Vec::new();
        collect_level(&self.root, level, &mut out, &self.collator);
        out
    }

    pub fn collator(&self) -> &Arc<Collator> {
        &self.collator
    }
}

fn split_node(node: &mut PrefixNode, tolerance: usize, collator: &Collator) {
    match &mut node.body {
        NodeBody::Branch { children, .. } => {
            for child in children {
                split_node(child, tolerance, collator);
            }
        }
        NodeBody::Leaf { words } => {
            if words.len() <= tolerance {
                return;
            }
            let prepared: Vec<Word> = words
                .iter()
                .map(|w| Word {
                    text: w.clone(),
                    units: collator.expand(w),
                })
                .collect();
            if prepared.iter().all(|w| w.units.len() <= node.level) {
                return;
            }
            let mut rebuilt = build_node(node.prefix.clone(), node.level, node.weight, prepared, node.level + 1);
            // build_node at level < depth yields a branch whose children are leaves
            split_node(&mut rebuilt, tolerance, collator);
            *node = rebuilt;
        }
    }
}

fn collect_buckets(node: &PrefixNode, out: &mut Vec<ChildSummary>) {
    match &node.body {
        NodeBody::Leaf { words } => out.push(ChildSummary {
            prefix: node.prefix.clone(),
            count: words.len(),
        }),
        NodeBody::Branch { terminal, children } => {
            if !terminal.is_empty() {
                out.push(ChildSummary {
                    prefix: node.prefix.clone(),
                    count: terminal.len(),
                });
            }
            for c in children {
                collect_buckets(c, out);
            }
        }
    }
}

fn collect_level(node: &PrefixNode, level: usize, out: &mut Vec<ChildSummary>, collator: &Collator) {
    if node.level == level && node.level > 0 {
        out.push(ChildSummary {
            prefix: node.prefix.clone(),
            count: node.word_count,
        });
        return;
    }
    match &node.body {
        NodeBody::Branch { terminal, children } => {
            if !terminal.is_empty() && node.level > 0 {
                out.push(ChildSummary {
                    prefix: node.prefix.clone(),
                    count: terminal.len(),
                });
            }
            for c in children {
                collect_level(c, level, out, collator);
            }
        }
        NodeBody::Leaf { words } => {
            // below the built depth: regroup the leaf's words directly
            let groups = group_by_prefix(words, level, collator);
            out.extend(groups.into_values().map(|ws| ChildSummary {
                prefix: prefix_text(&ws[0], level, collator),
                count: ws.len(),
            }));
        }
    }
}

fn prefix_text(word: &str, size: usize, collator: &Collator) -> String {
    collator.expand(word).into_iter().take(size).map(|u| u.text).collect()
}

/// Groups words by their first `size` collation units (whole word when shorter).
pub fn group_by_prefix<S: AsRef<str>>(
    words: &[S],
    size: usize,
    collator: &Collator,
) -> BTreeMap<Vec<u32>, Vec<String>> {
    let mut groups: BTreeMap<Vec<u32>, Vec<String>> = BTreeMap::new();
    for w in words {
        let w = w.as_ref();
        let mut key = collator.weights(w);
        key.truncate(size);
        if key.is_empty() {
            continue;
        }
        groups.entry(key).or_default().push(w.to_string());
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrefixStats {
    pub prefix_size: usize,
    pub count: usize,
    pub total: usize,
    pub min: usize,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: usize,
}

/// Quantile by linear interpolation between closest ranks over sorted data.
pub fn quantile(sorted: &[usize], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64)
}

pub fn prefix_stats<S: AsRef<str>>(words: &[S], prefix_size: usize, collator: &Collator) -> PrefixStats {
    let mut sizes: Vec<usize> = group_by_prefix(words, prefix_size.max(1), collator)
        .values()
        .map(Vec::len)
        .collect();
    sizes.sort_unstable();
    let total: usize = sizes.iter().sum();
    let count = sizes.len();
    PrefixStats {
        prefix_size,
        count,
        total,
        min: sizes.first().copied().unwrap_or(0),
        q1: quantile(&sizes, 0.25),
        median: quantile(&sizes, 0.5),
        mean: if count == 0 { 0.0 } else { total as f64 / count as f64 },
        q3: quantile(&sizes, 0.75),
        max: sizes.last().copied().unwrap_or(0),
    }
}

fn fmt_quantile(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as u64)
    } else {
        format!("{v}")
    }
}

pub const STATS_HEADER: &str = "Size\tCount\tMin\t1st Q\tMed\tMean\t3rd Q\tMax";

impl PrefixStats {
    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.1}\t{}\t{}",
            self.prefix_size,
            self.count,
            self.min,
            fmt_quantile(self.q1),
            fmt_quantile(self.median),
            self.mean,
            fmt_quantile(self.q3),
            self.max
        )
    }
}

pub fn stats_tsv(rows: &[PrefixStats]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{STATS_HEADER}");
    for r in rows {
        let _ = writeln!(out, "{}", r.tsv_row());
    }
    out
}
