//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Every random input comes from a fixed-seed ChaCha stream.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pagedex::collation::{latin_rules, Collator, TailoringRuleSet};
use pagedex::feedback::{Candidates, FeedbackLedger, FeedbackPolicy, FeedbackRecord, TallyStatus, Verdict};
use pagedex::full::{FullExists, FullIndex};
use pagedex::location::{
    aggregate_marker, region_boxes, AggregationPolicy, Column, LocationMarker, Margins, MarkerProposal, PageLayout,
    ReadingDirection,
};
use pagedex::prefix::{group_by_prefix, parse_wordlist, prefix_stats, PrefixTree};
use pagedex::sparse::{PageRange, SparseEntry, SparseIndex, SparseVariant};

const SEED: u64 = 0x5EED_0001;
const SOUNDNESS_BUDGET: Duration = Duration::from_secs(30);
const ORACLE_QUERIES: usize = 10_000;
const REFERENCE_WORDS: usize = 144_106;
const REFERENCE_MEAN_TOL: f64 = 0.05;
const REFERENCE_QUARTILE_TOL: f64 = 1.0;
const SPLIT_TOLERANCE: usize = 500;
const OUTLIER_BUCKET: usize = 1_798;
const MAJORITY_TARGETS: usize = 1_000;
const MAJORITY_MIN_CORRECT: f64 = 0.95;
const MALICIOUS_FRACTION: f64 = 0.2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---- synthetic dictionaries ----

struct SyntheticDictionary {
    collator: Arc<Collator>,
    page_count: u32,
    /// Headwords in collation order with their page.
    words: Vec<(String, u32)>,
    sparse: SparseIndex,
}

fn random_tailoring(rng: &mut ChaCha8Rng) -> TailoringRuleSet {
    let mut letters: Vec<char> = ('a'..='z').collect();
    letters.shuffle(rng);
    letters.truncate(rng.random_range(6..=26));
    let mut units: Vec<String> = letters.iter().map(|c| c.to_string()).collect();
    let compound = format!("{}{}", letters[0], letters[1]);
    units.push(compound);
    if rng.random_bool(0.5) {
        units.push("ñ".into());
    }
    units.shuffle(rng);
    TailoringRuleSet::from_sequence("synthetic", units).unwrap()
}

fn random_word(rng: &mut ChaCha8Rng, rules: &TailoringRuleSet) -> String {
    let len = rng.random_range(1..=7);
    (0..len)
        .map(|_| rules.units.choose(rng).unwrap().text.as_str())
        .collect()
}

fn synthetic_dictionary(rng: &mut ChaCha8Rng, idx: usize) -> SyntheticDictionary {
    let rules = random_tailoring(rng);
    let collator = Arc::new(Collator::new(rules.clone()).unwrap());
    let page_count = rng.random_range(10..=200);
    let per_page: Vec<usize> = (0..page_count).map(|_| rng.random_range(1..=20)).collect();
    let total: usize = per_page.iter().sum();

    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(total);
    while words.len() < total {
        let w = random_word(rng, &rules);
        if seen.insert(collator.key(&w)) {
            words.push(w);
        }
    }
    words.sort_by_cached_key(|w| collator.key(w));
    let mut paged = Vec::with_capacity(total);
    let mut it = words.into_iter();
    for (i, &n) in per_page.iter().enumerate() {
        for w in it.by_ref().take(n) {
            paged.push((w, i as u32 + 1));
        }
    }

    let id = format!("synthetic-{idx}");
    let first_of_page = || {
        let mut out: Vec<SparseEntry> = Vec::new();
        for (w, p) in &paged {
            if out.last().is_none_or(|e| e.page != *p) {
                out.push(SparseEntry::new(w.clone(), *p));
            }
        }
        out
    };
    let sparse = match rng.random_range(0..3) {
        0 => SparseIndex::build(&id, first_of_page(), SparseVariant::FirstWord, page_count, &collator).unwrap(),
        1 => {
            let window = rng.random_range(2..=4);
            SparseIndex::build_windowed(&id, first_of_page(), window, page_count, &collator).unwrap()
        }
        _ => {
            let mut last: BTreeMap<u32, String> = BTreeMap::new();
            for (w, p) in &paged {
                last.insert(*p, w.clone());
            }
            let entries = last.into_iter().map(|(p, w)| SparseEntry::new(w, p)).collect();
            SparseIndex::build(&id, entries, SparseVariant::LastWord, page_count, &collator).unwrap()
        }
    };
    SyntheticDictionary {
        collator,
        page_count,
        words: paged,
        sparse,
    }
}

fn sparse_soundness(corpus: &[SyntheticDictionary], generation: Duration) -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut misses = Vec::new();
    for (i, d) in corpus.iter().enumerate() {
        for (w, page) in &d.words {
            checked += 1;
            let r = d.sparse.lookup(w, &d.collator).unwrap();
            if !r.pages.contains(*page) {
                misses.push(format!("dict {i} {w:?} page {page} got {:?}", r.pages));
            }
        }
    }
    let elapsed = generation + start.elapsed();
    let detail = format!(
        "{} dictionaries, {checked} headwords, {} misses, {:.1}s ({:.1}s generating)",
        corpus.len(),
        misses.len(),
        elapsed.as_secs_f64(),
        generation.as_secs_f64()
    );
    if let Some(m) = misses.first() {
        return outcome(false, format!("{detail}; first: {m}"));
    }
    outcome(elapsed < SOUNDNESS_BUDGET, detail)
}

fn query(rng: &mut ChaCha8Rng, d: &SyntheticDictionary) -> String {
    match rng.random_range(0..3) {
        0 => d.words.choose(rng).unwrap().0.clone(),
        1 => d.sparse.entries().choose(rng).unwrap().word.clone(),
        _ => random_word(rng, d.collator.rules()),
    }
}

fn oracle_equivalence(rng: &mut ChaCha8Rng, corpus: &[SyntheticDictionary]) -> Outcome {
    let mut mismatches = 0;
    for _ in 0..ORACLE_QUERIES {
        let d = corpus.choose(rng).unwrap();
        let q = query(rng, d);
        let fast = format!("{:?}", d.sparse.lookup(&q, &d.collator));
        let slow = format!("{:?}", d.sparse.lookup_linear(&q, &d.collator));
        if fast != slow {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{ORACLE_QUERIES} queries, {mismatches} mismatches"),
    )
}

fn full_exactness(rng: &mut ChaCha8Rng, corpus: &[SyntheticDictionary]) -> Outcome {
    let fulls: Vec<FullIndex> = corpus
        .iter()
        .map(|d| {
            let pairs = d.words.iter().map(|(w, p)| (w.as_str(), *p));
            FullIndex::build("full", pairs, d.page_count, d.collator.clone()).unwrap()
        })
        .collect();
    let (mut wrong, mut not_refined, mut present) = (0, 0, 0);
    for _ in 0..ORACLE_QUERIES {
        let i = rng.random_range(0..corpus.len());
        let d = &corpus[i];
        let q = query(rng, d);
        let truth: BTreeSet<u32> = d
            .words
            .iter()
            .filter(|(w, _)| d.collator.compare(w, &q).is_eq())
            .map(|(_, p)| *p)
            .collect();
        let got = fulls[i].lookup(&q);
        let exists = got.exists == FullExists::Yes;
        if exists != !truth.is_empty() || got.pages != truth {
            wrong += 1;
        }
        if exists {
            present += 1;
            let range = d.sparse.lookup(&q, &d.collator).unwrap().pages;
            if !got.pages.iter().all(|p| range.contains(*p)) {
                not_refined += 1;
            }
        }
    }
    outcome(
        wrong == 0 && not_refined == 0,
        format!(
            "{ORACLE_QUERIES} queries ({present} present), {wrong} disagreements, {not_refined} refinement failures"
        ),
    )
}

// ---- prefix statistics ----

const LETTER_FREQ: [(char, u32); 26] = [
    ('a', 82),
    ('b', 15),
    ('c', 28),
    ('d', 43),
    ('e', 127),
    ('f', 22),
    ('g', 20),
    ('h', 61),
    ('i', 70),
    ('j', 2),
    ('k', 8),
    ('l', 40),
    ('m', 24),
    ('n', 67),
    ('o', 75),
    ('p', 19),
    ('q', 1),
    ('r', 60),
    ('s', 63),
    ('t', 91),
    ('u', 28),
    ('v', 10),
    ('w', 24),
    ('x', 2),
    ('y', 20),
    ('z', 1),
];

fn english_like_wordlist(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let total: u32 = LETTER_FREQ.iter().map(|(_, f)| f).sum();
    let letter = |rng: &mut ChaCha8Rng| {
        let mut t = rng.random_range(0..total);
        for (c, f) in LETTER_FREQ {
            if t < f {
                return c;
            }
            t -= f;
        }
        unreachable!()
    };
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        let len = rng.random_range(2..=12);
        let w: String = (0..len).map(|_| letter(rng)).collect();
        seen.insert(w);
    }
    seen.into_iter().collect()
}

struct ReferenceRow {
    size: usize,
    count: usize,
    min: Option<usize>,
    q1: Option<f64>,
    median: Option<f64>,
    mean: f64,
    q3: Option<f64>,
    max: usize,
}

const REFERENCE_ROWS: [ReferenceRow; 2] = [
    ReferenceRow {
        size: 1,
        count: 26,
        min: Some(121),
        q1: None,
        median: None,
        mean: 5503.0,
        q3: None,
        max: 15620,
    },
    ReferenceRow {
        size: 3,
        count: 3995,
        min: None,
        q1: None,
        median: None,
        mean: 35.8,
        q3: None,
        max: 1798,
    },
];

fn reference_exact(words: &[String], collator: &Collator) -> Outcome {
    let mut failures = Vec::new();
    for row in &REFERENCE_ROWS {
        let s = prefix_stats(words, row.size, collator);
        let close = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;
        let mut ok = s.count == row.count && s.max == row.max && close(s.mean, row.mean, REFERENCE_MEAN_TOL);
        ok &= row.min.is_none_or(|m| m == s.min);
        for (want, got) in [(row.q1, s.q1), (row.median, s.median), (row.q3, s.q3)] {
            ok &= want.is_none_or(|w| close(got, w, REFERENCE_QUARTILE_TOL));
        }
        if !ok {
            failures.push(s.tsv_row());
        }
    }
    outcome(
        failures.is_empty(),
        format!("exact wordlist; mismatching rows: {failures:?}"),
    )
}

fn reference_properties(words: &[String], collator: &Collator) -> Outcome {
    let mut problems = Vec::new();
    let mut expected: Vec<&str> = words.iter().map(String::as_str).collect();
    expected.sort_unstable();
    let mut prev: Option<(usize, usize)> = None;
    for size in 1..=6 {
        let groups = group_by_prefix(words, size, collator);
        let mut members: Vec<&str> = groups.values().flatten().map(String::as_str).collect();
        members.sort_unstable();
        if members != expected {
            problems.push(format!("size {size}: not a partition"));
        }
        let s = prefix_stats(words, size, collator);
        if (s.mean * s.count as f64 - s.total as f64).abs() > 1e-6 * s.total as f64 || s.total != words.len() {
            problems.push(format!("size {size}: mean x count != total"));
        }
        if let Some((count, max)) = prev {
            if s.count < count || s.max > max {
                problems.push(format!("size {size}: count/max not monotone"));
            }
        }
        prev = Some((s.count, s.max));
    }
    outcome(
        problems.is_empty(),
        format!(
            "conditional: exact wordlist unavailable, property substitute on {} synthetic words, sizes 1..6; {problems:?}",
            words.len()
        ),
    )
}

fn reference_stats(rng: &mut ChaCha8Rng) -> Outcome {
    let collator = Collator::new(latin_rules()).unwrap();
    if let Some(path) = std::env::var_os("PAGEDEX_REFERENCE_WORDLIST") {
        let words = parse_wordlist(&std::fs::read_to_string(&path).unwrap());
        if words.len() == REFERENCE_WORDS {
            return reference_exact(&words, &collator);
        }
    }
    reference_properties(&english_like_wordlist(rng, REFERENCE_WORDS), &collator)
}

fn bucket_splitting(rng: &mut ChaCha8Rng) -> Outcome {
    let collator = Arc::new(Collator::new(latin_rules()).unwrap());
    let mut words: BTreeSet<String> = BTreeSet::new();
    words.insert("con".into());
    while words.len() < OUTLIER_BUCKET {
        let tail: String = (0..rng.random_range(1..=6))
            .map(|_| rng.random_range(b'a'..=b'z') as char)
            .collect();
        words.insert(format!("con{tail}"));
    }
    words.extend(
        english_like_wordlist(rng, 3_000)
            .into_iter()
            .filter(|w| !w.starts_with("con")),
    );
    let words: Vec<String> = words.into_iter().collect();

    let tree = PrefixTree::build(&words, 3, collator.clone()).unwrap();
    let before = tree.buckets().into_iter().find(|b| b.prefix == "con").map(|b| b.count);
    let split = tree.split_oversized(SPLIT_TOLERANCE);
    let buckets = split.buckets();
    let total: usize = buckets.iter().map(|b| b.count).sum();
    let oversized: Vec<_> = buckets
        .iter()
        .filter(|b| b.count > SPLIT_TOLERANCE)
        .filter(|b| {
            // irreducible: every word under the prefix has the same key
            let prefix = collator.weights(&b.prefix);
            let keys: BTreeSet<_> = words
                .iter()
                .map(|w| collator.weights(w))
                .filter(|k| k.starts_with(&prefix))
                .collect();
            keys.len() > 1
        })
        .collect();
    let largest = buckets.iter().map(|b| b.count).max().unwrap_or(0);
    outcome(
        before == Some(OUTLIER_BUCKET) && total == words.len() && oversized.is_empty(),
        format!(
            "con bucket {before:?} -> {} buckets, largest {largest}, total {total}/{}",
            buckets.len(),
            words.len()
        ),
    )
}

// ---- feedback ----

fn vote(word: &str, page: u32, verdict: Verdict, who: usize, t: i64) -> FeedbackRecord {
    FeedbackRecord {
        dictionary_id: "sim".into(),
        page,
        word: word.into(),
        verdict,
        contributor: format!("voter-{who}"),
        timestamp: Utc.timestamp_opt(1_700_000_000 + t, 0).unwrap(),
    }
}

fn feedback_convergence(rng: &mut ChaCha8Rng) -> Outcome {
    let candidates = Candidates::Range(PageRange::new(1, 500));
    let mut ledger = FeedbackLedger::new(FeedbackPolicy::Threshold { k: 3 });
    let mut threshold_bad = 0;
    let mut t = 0;
    for target in 0..MAJORITY_TARGETS {
        let word = format!("w{target}");
        let page = rng.random_range(1..=500);
        let truth = if rng.random_bool(0.5) {
            Verdict::Present
        } else {
            Verdict::Absent
        };
        let expected = match truth {
            Verdict::Present => TallyStatus::ConfirmedPresent,
            Verdict::Absent => TallyStatus::ConfirmedAbsent,
        };
        for n in 1..=3 {
            t += 1;
            let tally = ledger.record(vote(&word, page, truth, n, t), &candidates).unwrap();
            let want = if n < 3 { TallyStatus::Open } else { expected };
            if tally.status != want {
                threshold_bad += 1;
            }
        }
    }

    let mut ledger = FeedbackLedger::new(FeedbackPolicy::Majority { min_votes: 7 });
    let mut correct = 0;
    for target in 0..MAJORITY_TARGETS {
        let word = format!("m{target}");
        let page = rng.random_range(1..=500);
        let truth = rng.random_bool(0.5);
        for voter in 0..50 {
            let honest = !rng.random_bool(MALICIOUS_FRACTION);
            let says_present = truth == honest;
            let verdict = if says_present {
                Verdict::Present
            } else {
                Verdict::Absent
            };
            t += 1;
            let tally = ledger
                .record(vote(&word, page, verdict, voter, t), &candidates)
                .unwrap();
            match tally.status {
                TallyStatus::Open => continue,
                TallyStatus::ConfirmedPresent => correct += truth as usize,
                TallyStatus::ConfirmedAbsent => correct += !truth as usize,
            }
            break;
        }
    }
    let rate = correct as f64 / MAJORITY_TARGETS as f64;
    outcome(
        threshold_bad == 0 && rate >= MAJORITY_MIN_CORRECT,
        format!("threshold(3): {threshold_bad} off-schedule tallies; majority(7) with 20% malicious: {correct}/{MAJORITY_TARGETS} correct"),
    )
}

// ---- markers ----

fn linear_oracle(values: &[u64]) -> u64 {
    let n = values.len() as i128;
    let sum: i128 = values.iter().map(|&v| v as i128).sum();
    let (lo, hi) = (*values.iter().min().unwrap(), *values.iter().max().unwrap());
    // nearest integer to sum/n, ties upward
    (lo..=hi)
        .min_by_key(|&r| ((n * r as i128 - sum).abs(), std::cmp::Reverse(r)))
        .unwrap()
}

fn quadratic_oracle(values: &[u64]) -> u64 {
    let n = values.len() as u128;
    let sum_sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let s = (sum_sq as f64 / n as f64).sqrt();
    let k = s.floor() as u128;
    if (s - s.floor() - 0.5).abs() < 1e-9 && 4 * sum_sq == (2 * k + 1) * (2 * k + 1) * n {
        return (k + 1) as u64;
    }
    (s + 0.5).floor() as u64
}

fn marker_aggregation(rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    let mut outside = 0;
    for case in 0..1000 {
        let n: usize = rng.random_range(1..=30);
        let (w, h) = (rng.random_range(1..=3000u32), rng.random_range(1..=3000u32));
        let proposals: Vec<MarkerProposal> = (0..n)
            .map(|i| MarkerProposal {
                dictionary_id: "d".into(),
                page: 1,
                word: "w".into(),
                x: rng.random_range(0..w),
                y: rng.random_range(0..h),
                contributor: format!("c{}", rng.random_range(0..5)),
                timestamp: Utc
                    .timestamp_opt(1_700_000_000 + rng.random_range(0..20) + (i % 2) as i64, 0)
                    .unwrap(),
            })
            .collect();
        let xs: Vec<u64> = proposals.iter().map(|p| p.x as u64).collect();
        let ys: Vec<u64> = proposals.iter().map(|p| p.y as u64).collect();
        let mut last = proposals.clone();
        last.sort_by(|a, b| (a.timestamp, &a.contributor, a.y, a.x).cmp(&(b.timestamp, &b.contributor, b.y, b.x)));
        let last = last.last().unwrap();
        let expected = [
            (AggregationPolicy::LinearMean, linear_oracle(&xs), linear_oracle(&ys)),
            (
                AggregationPolicy::QuadraticMean,
                quadratic_oracle(&xs),
                quadratic_oracle(&ys),
            ),
            (AggregationPolicy::LastWins, last.x as u64, last.y as u64),
        ];
        for (policy, ex, ey) in expected {
            let m = aggregate_marker(&proposals, policy).unwrap();
            if (m.x as u64, m.y as u64) != (ex, ey) || m.proposal_count != n {
                bad += 1;
                if bad == 1 {
                    eprintln!(
                        "marker case {case} {policy:?}: got ({}, {}) want ({ex}, {ey})",
                        m.x, m.y
                    );
                }
            }
            let within = |v: u64, vs: &[u64]| (*vs.iter().min().unwrap()..=*vs.iter().max().unwrap()).contains(&v);
            if !within(m.x as u64, &xs) || !within(m.y as u64, &ys) {
                outside += 1;
            }
        }
    }
    outcome(
        bad == 0 && outside == 0,
        format!("1000 proposal sets x 3 policies, {bad} mismatches, {outside} outside [min,max]"),
    )
}

// ---- region tiling ----

fn random_layout(rng: &mut ChaCha8Rng, w: u32, h: u32, dir: ReadingDirection) -> PageLayout {
    let top = rng.random_range(0..h / 5);
    let bottom = h - rng.random_range(0..h / 5);
    let left = rng.random_range(0..w / 10);
    let right = w - rng.random_range(0..w / 10);
    let mid = rng.random_range(left + (right - left) / 3..left + 2 * (right - left) / 3);
    let gutter = rng.random_range(0..=(right - left) / 10);
    let columns = vec![
        Column { left, right: mid },
        Column {
            left: mid + gutter,
            right,
        },
    ];
    PageLayout::new(
        Margins {
            top,
            bottom,
            left,
            right,
        },
        columns,
        dir,
    )
}

fn marker(page: u32, x: u32, y: u32) -> LocationMarker {
    LocationMarker {
        word: String::new(),
        page,
        x,
        y,
        proposal_count: 1,
        policy: AggregationPolicy::LinearMean,
    }
}

fn reading_pos(m: &LocationMarker, layout: &PageLayout) -> (u32, usize, u32) {
    let col = layout.column_of(m.x).unwrap();
    (m.page, col, m.y.clamp(layout.margins.top, layout.margins.bottom))
}

fn tiling_oracle(
    start: (u32, usize, u32),
    end: (u32, usize, u32),
    layout_for: &dyn Fn(u32) -> PageLayout,
) -> Vec<(u32, u32, u32, u32)> {
    let mut rows = Vec::new();
    for page in start.0..=end.0 {
        let layout = layout_for(page);
        for (ci, c) in layout.columns.iter().enumerate() {
            for row in layout.margins.top..layout.margins.bottom {
                let pos = (page, ci, row);
                if start <= pos && pos < end {
                    rows.push((page, c.left, c.right, row));
                }
            }
        }
    }
    rows.sort_unstable();
    rows
}

fn region_tiling(rng: &mut ChaCha8Rng) -> Outcome {
    let mut bad = 0;
    let mut cases = 0;
    let mut by_kind = BTreeMap::new();
    while cases < 1000 {
        let (w, h) = (rng.random_range(200..=600), rng.random_range(80..=300));
        let dir = if rng.random_bool(0.5) {
            ReadingDirection::Ltr
        } else {
            ReadingDirection::Rtl
        };
        let layout = random_layout(rng, w, h, dir);
        let next_layout = random_layout(rng, w, h, dir);
        let page = rng.random_range(1..=50);
        let word = marker(page, rng.random_range(0..w), rng.random_range(0..h));
        let kind = rng.random_range(0..4);
        let next = match kind {
            0 => None,
            1 => Some(marker(page, rng.random_range(0..w), rng.random_range(0..h))),
            _ => Some(marker(
                page + rng.random_range(1..=3),
                rng.random_range(0..w),
                rng.random_range(0..h),
            )),
        };
        let layout_for = |p: u32| {
            if next.as_ref().is_some_and(|n| n.page == p && p != page) {
                next_layout.clone()
            } else {
                layout.clone()
            }
        };
        let start = reading_pos(&word, &layout);
        let end = match &next {
            None => (page, layout.columns.len(), 0),
            Some(n) => reading_pos(n, &layout_for(n.page)),
        };
        if end <= start {
            continue;
        }
        cases += 1;
        *by_kind
            .entry(match kind {
                0 => "to-page-end",
                1 => "same-page",
                _ => "cross-page",
            })
            .or_insert(0) += 1;

        let Ok(boxes) = region_boxes(&word, next.as_ref(), &layout, Some(&next_layout)) else {
            bad += 1;
            continue;
        };
        let mut got: Vec<(u32, u32, u32, u32)> = boxes
            .iter()
            .flat_map(|b| (b.top..b.bottom).map(move |row| (b.page, b.left, b.right, row)))
            .collect();
        got.sort_unstable();
        let expected = tiling_oracle(start, end, &layout_for);
        let area = |rows: &[(u32, u32, u32, u32)]| rows.iter().map(|r| (r.2 - r.1) as u64).sum::<u64>();
        if got != expected || area(&got) != area(&expected) {
            bad += 1;
        }
    }
    outcome(
        bad == 0,
        format!("{cases} cases {by_kind:?}, LTR and RTL, {bad} discrepancies"),
    )
}

// ---- wire format ----

fn wire_format() -> Outcome {
    use axum::body::Body;
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let runtime = tokio::runtime::Runtime::new().unwrap();
    let validator = jsonschema::validator_for(&common::schema()).unwrap();
    let mut failures = Vec::new();
    for (name, q) in common::GOLDEN_QUERIES {
        let app = pagedex::http::router(Arc::new(common::fixture_engine()));
        let body = runtime.block_on(async {
            let req = axum::http::Request::get(format!("/api/search?lang=en&q={q}"))
                .body(Body::empty())
                .unwrap();
            let response = app.oneshot(req).await.unwrap();
            response.into_body().collect().await.unwrap().to_bytes().to_vec()
        });
        let value: serde_json::Value = serde_json::from_slice(&body).unwrap();
        if !validator.is_valid(&value) {
            failures.push(format!("{name}: schema"));
        }
        let golden = std::fs::read(common::golden_dir().join(format!("{name}.json"))).unwrap();
        if golden != body {
            failures.push(format!("{name}: bytes"));
        }
    }
    outcome(failures.is_empty(), format!("3 fixtures; failures: {failures:?}"))
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let started = Instant::now();
    let corpus: Vec<SyntheticDictionary> = (0..500).map(|i| synthetic_dictionary(&mut rng, i)).collect();
    let generation = started.elapsed();

    let results = [
        ("sparse-soundness", sparse_soundness(&corpus, generation)),
        ("binary-linear-equivalence", oracle_equivalence(&mut rng, &corpus)),
        ("full-index-exactness", full_exactness(&mut rng, &corpus)),
        ("prefix-table", reference_stats(&mut rng)),
        ("bucket-splitting", bucket_splitting(&mut rng)),
        ("feedback-convergence", feedback_convergence(&mut rng)),
        ("marker-aggregation", marker_aggregation(&mut rng)),
        ("region-tiling", region_tiling(&mut rng)),
        ("wire-format-golden", wire_format()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    println!("EXCLUDED indexing-throughput: human working-rate measurements, not reproducible in software");
    if failed > 0 {
        std::process::exit(1);
    }
}
