//! Tailored single-level collation.
//!
//! A [`TailoringRuleSet`] lists the collation units of a language (single
//! letters or compound letters of up to three code points) with strictly
//! increasing primary weights. Words are expanded left to right with
//! longest-match, ignorable marks are skipped, and code points that no rule
//! mentions sort after every tailored unit at `UNTAILORED_OFFSET + code point`.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;
use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

/// Weights below this value are reserved for tailored units.
pub const UNTAILORED_OFFSET: u32 = 0x0100_0000;

/// Maximum number of code points in one collation unit.
pub const MAX_UNIT_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CollationError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unit {unit:?} must hold 1..=3 code points")]
    UnitLength { unit: String },
    #[error("duplicate unit {unit:?}")]
    DuplicateUnit { unit: String },
    #[error("weight of unit {unit:?} is not greater than the previous weight")]
    WeightOrder { unit: String },
    #[error("weight of unit {unit:?} exceeds the tailored range")]
    WeightRange { unit: String },
    #[error("root pattern needs 2..=4 letters, got {0}")]
    RootArity(usize),
    #[error("root letter {0:?} is not a single collation unit")]
    RootLetter(String),
}

/// One tailored "letter": a code-point sequence and its primary weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollationUnit {
    pub text: String,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TailoringRuleSet {
    pub language_code: String,
    pub units: Vec<CollationUnit>,
    pub ignorables: BTreeSet<char>,
    /// Apply canonical composition (NFC) before expansion.
    pub normalization: bool,
}

impl TailoringRuleSet {
    /// Rules with no tailoring at all: ordering degenerates to code-point order.
    pub fn untailored(language_code: impl Into<String>) -> Self {
        TailoringRuleSet {
            language_code: language_code.into(),
            ..Default::default()
        }
    }

    /// Builds a rule set from units listed in collation order, assigning
    /// weights 1, 2, 3, ...
    pub fn from_sequence<I, S>(language_code: impl Into<String>, units: I) -> Result<Self, CollationError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let units = units
            .into_iter()
            .enumerate()
            .map(|(i, text)| CollationUnit {
                text: text.into(),
                weight: i as u32 + 1,
            })
            .collect();
        let rules = TailoringRuleSet {
            language_code: language_code.into(),
            units,
            ignorables: BTreeSet::new(),
            normalization: true,
        };
        rules.validate()?;
        Ok(rules)
    }

    pub fn validate(&self) -> Result<(), CollationError> {
        let mut seen = BTreeSet::new();
        let mut last: Option<u32> = None;
        for unit in &self.units {
            let len = unit.text.chars().count();
            if !(1..=MAX_UNIT_LEN).contains(&len) {
                return Err(CollationError::UnitLength {
                    unit: unit.text.clone(),
                });
            }
            if !seen.insert(unit.text.as_str()) {
                return Err(CollationError::DuplicateUnit {
                    unit: unit.text.clone(),
                });
            }
            if unit.weight >= UNTAILORED_OFFSET {
                return Err(CollationError::WeightRange {
                    unit: unit.text.clone(),
                });
            }
            if last.is_some_and(|w| unit.weight <= w) {
                return Err(CollationError::WeightOrder {
                    unit: unit.text.clone(),
                });
            }
            last = Some(unit.weight);
        }
        Ok(())
    }

    /// Parses the tab-separated tailoring format.
    ///
    /// ```text
    /// # comment
    /// !LANGUAGE ur
    /// !NORMALIZE on
    /// !IGNORE U+064B
    /// ک<TAB>30
    /// U+06A9U+06BE<TAB>31
    /// ```
    pub fn parse(text: &str) -> Result<Self, CollationError> {
        let mut rules = TailoringRuleSet::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| CollationError::Parse {
                line: line_no,
                message: message.to_string(),
            };
            if let Some(rest) = line.strip_prefix('!') {
                let (directive, arg) = rest.split_once(' ').unwrap_or((rest, ""));
                let arg = arg.trim();
                match directive {
                    "IGNORE" => {
                        for token in arg.split_whitespace() {
                            let chars = parse_escapes(token).ok_or_else(|| err("bad code point escape"))?;
                            rules.ignorables.extend(chars);
                        }
                    }
                    "LANGUAGE" => rules.language_code = arg.to_string(),
                    "NORMALIZE" => {
                        rules.normalization = match arg {
                            "on" => true,
                            "off" => false,
                            _ => return Err(err("NORMALIZE expects on|off")),
                        }
                    }
                    _ => return Err(err("unknown directive")),
                }
                continue;
            }
            let (unit, weight) = line.split_once('\t').ok_or_else(|| err("expected UNIT<TAB>WEIGHT"))?;
            let weight: u32 = weight.trim().parse().map_err(|_| err("weight is not an integer"))?;
            let text = if unit.starts_with("U+") {
                parse_escapes(unit)
                    .ok_or_else(|| err("bad code point escape"))?
                    .into_iter()
                    .collect()
            } else {
                unit.to_string()
            };
            if text.is_empty() {
                return Err(err("empty unit"));
            }
            rules.units.push(CollationUnit { text, weight });
        }
        rules.validate()?;
        Ok(rules)
    }

    /// Canonical serialization; `parse(to_file_string())` returns an equal rule set.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        if !self.language_code.is_empty() {
            let _ = writeln!(out, "!LANGUAGE {}", self.language_code);
        }
        let _ = writeln!(out, "!NORMALIZE {}", if self.normalization { "on" } else { "off" });
        for c in &self.ignorables {
            let _ = writeln!(out, "!IGNORE U+{:04X}", *c as u32);
        }
        for unit in &self.units {
            let literal = unit.text.chars().all(|c| c.is_alphanumeric()) && !unit.text.starts_with("U+");
            if literal {
                let _ = writeln!(out, "{}\t{}", unit.text, unit.weight);
            } else {
                for c in unit.text.chars() {
                    let _ = write!(out, "U+{:04X}", c as u32);
                }
                let _ = writeln!(out, "\t{}", unit.weight);
            }
        }
        out
    }
}

/// `U+0627`, `U+06A9U+06BE` or `U+06A9 U+06BE`.
fn parse_escapes(token: &str) -> Option<Vec<char>> {
    let mut chars = Vec::new();
    for part in token.split("U+").skip(1) {
        let hex = part.trim();
        let cp = u32::from_str_radix(hex, 16).ok()?;
        chars.push(char::from_u32(cp)?);
    }
    if chars.is_empty() || !token.starts_with("U+") {
        return None;
    }
    Some(chars)
}

/// Sort key of a word: primary weights, tie-broken by the source text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CollationKey {
    pub weights: Vec<u32>,
    pub source_word: String,
}

impl Ord for CollationKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weights
            .cmp(&other.weights)
            .then_with(|| self.source_word.cmp(&other.source_word))
    }
}

impl PartialOrd for CollationKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A unit matched while expanding a word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedUnit {
    pub text: String,
    pub weight: u32,
}

/// Compiled, immutable comparator for one rule set.
#[derive(Debug, Clone)]
pub struct Collator {
    rules: TailoringRuleSet,
    table: HashMap<String, u32>,
    /// First characters of multi-character units.
    compound_starts: BTreeSet<char>,
    longest: usize,
}

pub type SharedCollator = Arc<Collator>;

impl Collator {
    pub fn new(rules: TailoringRuleSet) -> Result<Self, CollationError> {
        rules.validate()?;
        let table: HashMap<String, u32> = rules.units.iter().map(|u| (u.text.clone(), u.weight)).collect();
        let longest = rules.units.iter().map(|u| u.text.chars().count()).max().unwrap_or(1);
        let compound_starts = rules
            .units
            .iter()
            .filter(|u| u.text.chars().nth(1).is_some())
            .filter_map(|u| u.text.chars().next())
            .collect();
        Ok(Collator {
            rules,
            table,
            compound_starts,
            longest,
        })
    }

    pub fn untailored() -> Self {
        Collator::new(TailoringRuleSet::untailored("")).expect("empty rules are valid")
    }

    pub fn rules(&self) -> &TailoringRuleSet {
        &self.rules
    }

    pub fn language_code(&self) -> &str {
        &self.rules.language_code
    }

    fn prepare<'a>(&self, word: &'a str) -> Cow<'a, str> {
        if self.rules.normalization && is_nfc_quick(word.chars()) != IsNormalized::Yes {
            Cow::Owned(word.nfc().collect())
        } else {
            Cow::Borrowed(word)
        }
    }

    fn units<'w>(&self, word: &'w str) -> Units<'_, 'w> {
        Units {
            collator: self,
            text: self.prepare(word),
            pos: 0,
        }
    }

    /// Expands `word` into collation units, longest match first.
    pub fn expand(&self, word: &str) -> Vec<ExpandedUnit> {
        let mut units = self.units(word);
        let mut out = Vec::new();
        while let Some((range, weight)) = units.next() {
            out.push(ExpandedUnit {
                text: units.text[range].to_string(),
                weight,
            });
        }
        out
    }

    pub fn weights(&self, word: &str) -> Vec<u32> {
        self.units(word).map(|(_, w)| w).collect()
    }

    pub fn key(&self, word: &str) -> CollationKey {
        CollationKey {
            weights: self.weights(word),
            source_word: word.to_string(),
        }
    }

    pub fn compare(&self, a: &str, b: &str) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        self.compare_primary(a, b).then_with(|| a.cmp(b))
    }

    /// `compare(word, &key.source_word)` without re-expanding the key's word.
    pub fn compare_to_key(&self, word: &str, key: &CollationKey) -> Ordering {
        if word == key.source_word {
            return Ordering::Equal;
        }
        self.units(word)
            .map(|(_, w)| w)
            .cmp(key.weights.iter().copied())
            .then_with(|| word.cmp(&key.source_word))
    }

    /// Compares primary weights only, without the code-point tie-break.
    pub fn compare_primary(&self, a: &str, b: &str) -> Ordering {
        let weights = |w| self.units(w).map(|(_, weight)| weight);
        weights(a).cmp(weights(b))
    }

    /// Builds a root pattern, checking that every letter is one unit.
    pub fn root_pattern<I, S>(&self, letters: I) -> Result<RootPattern, CollationError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let root = RootPattern::new(letters)?;
        for letter in &root.letters {
            if self.expand(letter).len() != 1 {
                return Err(CollationError::RootLetter(letter.clone()));
            }
        }
        Ok(root)
    }

    /// True iff the root letters occur, in order, as a subsequence of the
    /// word's collation units.
    pub fn matches_root(&self, word: &str, root: &RootPattern) -> bool {
        let word_weights = self.weights(word);
        let mut wanted = root.letters.iter().flat_map(|l| self.weights(l)).peekable();
        for w in word_weights {
            match wanted.peek() {
                Some(&next) if next == w => {
                    wanted.next();
                }
                Some(_) => {}
                None => break,
            }
        }
        wanted.peek().is_none()
    }
}

impl From<RootPattern> for String {
    fn from(r: RootPattern) -> String {
        r.to_string()
    }
}

/// Byte range and weight of each unit of a prepared word.
struct Units<'c, 'w> {
    collator: &'c Collator,
    text: Cow<'w, str>,
    pos: usize,
}

impl Iterator for Units<'_, '_> {
    type Item = (Range<usize>, u32);

    fn next(&mut self) -> Option<Self::Item> {
        let collator = self.collator;
        loop {
            let rest = &self.text[self.pos..];
            let mut chars = rest.char_indices();
            let (_, first) = chars.next()?;
            if collator.rules.ignorables.contains(&first) {
                self.pos += first.len_utf8();
                continue;
            }
            let mut ends = [0; MAX_UNIT_LEN];
            ends[0] = first.len_utf8();
            let mut n = 1;
            let reach = if collator.compound_starts.contains(&first) {
                collator.longest - 1
            } else {
                0
            };
            for (offset, c) in chars.take(reach) {
                ends[n] = offset + c.len_utf8();
                n += 1;
            }
            let start = self.pos;
            for &end in ends[..n].iter().rev() {
                if let Some(&weight) = collator.table.get(&rest[..end]) {
                    self.pos += end;
                    return Some((start..start + end, weight));
                }
            }
            self.pos += first.len_utf8();
            return Some((start..self.pos, UNTAILORED_OFFSET + first as u32));
        }
    }
}

/// Root letters (L1-L2-L3...) keying a nested-order dictionary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "String")]
pub struct RootPattern {
    letters: Vec<String>,
}

impl RootPattern {
    pub fn new<I, S>(letters: I) -> Result<Self, CollationError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if !(2..=4).contains(&letters.len()) {
            return Err(CollationError::RootArity(letters.len()));
        }
        if let Some(empty) = letters.iter().find(|l| l.is_empty()) {
            return Err(CollationError::RootLetter(empty.clone()));
        }
        Ok(RootPattern { letters })
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }
}

impl std::fmt::Display for RootPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.letters.join("-"))
    }
}

/// Basic Latin lowercase alphabet, one unit per letter.
pub fn latin_rules() -> TailoringRuleSet {
    TailoringRuleSet::from_sequence("en", ('a'..='z').map(String::from)).expect("static rules")
}

/// Tailorings shipped with the crate, by language code.
pub fn builtin_rules(code: &str) -> Option<TailoringRuleSet> {
    let text = match code {
        "en" => include_str!("../data/tailoring/en.txt"),
        "ur" => include_str!("../data/tailoring/ur.txt"),
        _ => return None,
    };
    Some(TailoringRuleSet::parse(text).expect("shipped tailoring parses"))
}
