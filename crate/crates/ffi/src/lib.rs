//! C ABI for the pagedex indexing engine.
//!
//! Handles are opaque pointers created by `*_new`/`*_from_tsv` and released
//! with the matching `*_free`. Every fallible call returns a [`PdxStatus`];
//! on failure [`pdx_last_error_message`] describes the most recent error on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use chrono::{TimeZone, Utc};
use pagedex::collation::{builtin_rules, Collator, TailoringRuleSet};
use pagedex::full::{self, FullExists, FullIndex};
use pagedex::location::{aggregate_marker, AggregationPolicy, MarkerProposal};
use pagedex::prefix::{parse_wordlist, prefix_stats, stats_tsv};
use pagedex::sparse::{self, SparseExists, SparseIndex, SparseVariant};
use pagedex::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidTailoring = 3,
    ParseError = 4,
    PageOutOfRange = 5,
    SortViolation = 6,
    InvalidIndex = 7,
    InvalidLocation = 8,
    InvalidArgument = 9,
    BufferTooSmall = 10,
    UnknownLanguage = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdxVariant {
    FirstWord = 0,
    LastWord = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdxExists {
    No = 0,
    Yes = 1,
    Maybe = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdxAggregation {
    LastWins = 0,
    LinearMean = 1,
    QuadraticMean = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PdxPoint {
    pub x: u32,
    pub y: u32,
}

/// Result of a sparse lookup: the inclusive page range to show.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PdxSparseHit {
    pub first_page: u32,
    pub last_page: u32,
    pub exists: PdxExists,
}

pub struct PdxCollator(Arc<Collator>);

pub struct PdxSparseIndex {
    index: SparseIndex,
    collator: Arc<Collator>,
}

pub struct PdxFullIndex(FullIndex);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(PdxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.code() {
            "INVALID_TAILORING" => PdxStatus::InvalidTailoring,
            "PARSE_ERROR" => PdxStatus::ParseError,
            "PAGE_OUT_OF_RANGE" => PdxStatus::PageOutOfRange,
            "SORT_VIOLATION" => PdxStatus::SortViolation,
            "INVALID_INDEX" => PdxStatus::InvalidIndex,
            "MARKER_OUT_OF_BOUNDS" | "ORDER_VIOLATION" | "INVALID_LOCATION" => PdxStatus::InvalidLocation,
            "UNKNOWN_LANGUAGE" => PdxStatus::UnknownLanguage,
            _ => PdxStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

macro_rules! impl_from_module_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

impl_from_module_error!(
    pagedex::collation::CollationError,
    sparse::SparseError,
    full::FullIndexError,
    pagedex::location::LocationError
);

fn null(what: &str) -> Failure {
    Failure(PdxStatus::NullArgument, format!("{what} is null"))
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PdxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PdxStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PdxStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(PdxStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn into_raw_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(PdxStatus::InvalidArgument, "output contains NUL".into()))
}

/// Message for the last failed call on this thread, or null. Free it with
/// [`pdx_string_free`].
#[no_mangle]
pub extern "C" fn pdx_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().clone().map_or(ptr::null_mut(), CString::into_raw))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Compiles a collator from tailoring rule text. A null `rules` gives
/// code-point order.
///
/// # Safety
/// `rules` must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_collator_new(rules: *const c_char, out: *mut *mut PdxCollator) -> PdxStatus {
    guard(|| {
        let rules = if rules.is_null() {
            TailoringRuleSet::untailored("")
        } else {
            TailoringRuleSet::parse(text(rules, "rules")?)?
        };
        let collator = Collator::new(rules)?;
        write_out(out, Box::into_raw(Box::new(PdxCollator(Arc::new(collator)))), "out")
    })
}

/// Collator for a shipped tailoring such as `"en"` or `"ur"`.
///
/// # Safety
/// `code` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_collator_builtin(code: *const c_char, out: *mut *mut PdxCollator) -> PdxStatus {
    guard(|| {
        let code = text(code, "code")?;
        let rules = builtin_rules(code).ok_or_else(|| Failure::from(Error::UnknownLanguage(code.into())))?;
        let collator = Collator::new(rules)?;
        write_out(out, Box::into_raw(Box::new(PdxCollator(Arc::new(collator)))), "out")
    })
}

/// # Safety
/// `c` must be null or a live collator handle.
#[no_mangle]
pub unsafe extern "C" fn pdx_collator_free(c: *mut PdxCollator) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Writes -1, 0 or 1 to `out` as `a` sorts before, equal to or after `b`.
///
/// # Safety
/// All pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pdx_collator_compare(
    c: *const PdxCollator,
    a: *const c_char,
    b: *const c_char,
    out: *mut i32,
) -> PdxStatus {
    guard(|| {
        let c = handle(c, "collator")?;
        let ord = c.0.compare(text(a, "a")?, text(b, "b")?);
        write_out(out, ord as i32, "out")
    })
}

/// Builds a sparse index from `word<TAB>page` lines.
///
/// # Safety
/// `c` must be a live collator, `tsv` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_sparse_from_tsv(
    c: *const PdxCollator,
    tsv: *const c_char,
    page_count: u32,
    variant: PdxVariant,
    out: *mut *mut PdxSparseIndex,
) -> PdxStatus {
    guard(|| {
        let collator = handle(c, "collator")?.0.clone();
        let entries = sparse::parse_tsv(text(tsv, "tsv")?)?;
        let variant = match variant {
            PdxVariant::FirstWord => SparseVariant::FirstWord,
            PdxVariant::LastWord => SparseVariant::LastWord,
        };
        let index = SparseIndex::build("ffi", entries, variant, page_count, &collator)?;
        write_out(out, Box::into_raw(Box::new(PdxSparseIndex { index, collator })), "out")
    })
}

/// # Safety
/// `idx` must be null or a live sparse index handle.
#[no_mangle]
pub unsafe extern "C" fn pdx_sparse_free(idx: *mut PdxSparseIndex) {
    if !idx.is_null() {
        drop(Box::from_raw(idx));
    }
}

/// # Safety
/// `idx` must be live, `word` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_sparse_lookup(
    idx: *const PdxSparseIndex,
    word: *const c_char,
    out: *mut PdxSparseHit,
) -> PdxStatus {
    guard(|| {
        let idx = handle(idx, "index")?;
        let hit = idx.index.lookup(text(word, "word")?, &idx.collator)?;
        let exists = match hit.exists {
            SparseExists::Yes => PdxExists::Yes,
            SparseExists::Maybe => PdxExists::Maybe,
        };
        write_out(
            out,
            PdxSparseHit {
                first_page: hit.pages.first,
                last_page: hit.pages.last,
                exists,
            },
            "out",
        )
    })
}

/// Builds a full index from `word<TAB>page[,page...]` lines.
///
/// # Safety
/// `c` must be a live collator, `tsv` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_full_from_tsv(
    c: *const PdxCollator,
    tsv: *const c_char,
    page_count: u32,
    out: *mut *mut PdxFullIndex,
) -> PdxStatus {
    guard(|| {
        let collator = handle(c, "collator")?.0.clone();
        let pairs = full::parse_tsv(text(tsv, "tsv")?)?;
        let index = FullIndex::build("ffi", pairs, page_count, collator)?;
        write_out(out, Box::into_raw(Box::new(PdxFullIndex(index))), "out")
    })
}

/// # Safety
/// `idx` must be null or a live full index handle.
#[no_mangle]
pub unsafe extern "C" fn pdx_full_free(idx: *mut PdxFullIndex) {
    if !idx.is_null() {
        drop(Box::from_raw(idx));
    }
}

/// Writes the ascending pages holding `word` into `pages` and their number
/// into `out_len`. When `capacity` is too small nothing is copied,
/// `out_len` still receives the needed length and the call returns
/// `BufferTooSmall`. `exists` may be null.
///
/// # Safety
/// `idx` must be live, `word` NUL-terminated, `pages` valid for `capacity`
/// writes (may be null when `capacity` is 0), `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_full_lookup(
    idx: *const PdxFullIndex,
    word: *const c_char,
    pages: *mut u32,
    capacity: usize,
    out_len: *mut usize,
    exists: *mut PdxExists,
) -> PdxStatus {
    guard(|| {
        let idx = handle(idx, "index")?;
        let hit = idx.0.lookup(text(word, "word")?);
        write_out(out_len, hit.pages.len(), "out_len")?;
        if !exists.is_null() {
            exists.write(match hit.exists {
                FullExists::Yes => PdxExists::Yes,
                FullExists::No => PdxExists::No,
            });
        }
        if hit.pages.len() > capacity {
            return Err(Failure(
                PdxStatus::BufferTooSmall,
                format!("need {} slots, got {capacity}", hit.pages.len()),
            ));
        }
        if !hit.pages.is_empty() {
            if pages.is_null() {
                return Err(null("pages"));
            }
            for (i, p) in hit.pages.iter().enumerate() {
                pages.add(i).write(*p);
            }
        }
        Ok(())
    })
}

/// Prefix bucket statistics of a newline-separated wordlist as TSV, one row
/// per entry of `sizes`. Free the result with [`pdx_string_free`].
///
/// # Safety
/// `c` must be live, `wordlist` NUL-terminated, `sizes` valid for
/// `n_sizes` reads, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_prefix_stats_tsv(
    c: *const PdxCollator,
    wordlist: *const c_char,
    sizes: *const usize,
    n_sizes: usize,
    out: *mut *mut c_char,
) -> PdxStatus {
    guard(|| {
        let c = handle(c, "collator")?;
        let words = parse_wordlist(text(wordlist, "wordlist")?);
        if sizes.is_null() && n_sizes > 0 {
            return Err(null("sizes"));
        }
        let sizes = if n_sizes == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(sizes, n_sizes)
        };
        let rows: Vec<_> = sizes.iter().map(|&s| prefix_stats(&words, s, &c.0)).collect();
        write_out(out, into_raw_string(stats_tsv(&rows))?, "out")
    })
}

/// Aggregates marker proposals for one word. Proposals are taken in
/// submission order, so `LastWins` picks the final element.
///
/// # Safety
/// `points` must be valid for `n` reads and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pdx_aggregate_marker(
    points: *const PdxPoint,
    n: usize,
    policy: PdxAggregation,
    out: *mut PdxPoint,
) -> PdxStatus {
    guard(|| {
        if points.is_null() && n > 0 {
            return Err(null("points"));
        }
        let points = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(points, n)
        };
        let proposals: Vec<MarkerProposal> = points
            .iter()
            .enumerate()
            .map(|(i, p)| MarkerProposal {
                dictionary_id: String::new(),
                page: 1,
                word: String::new(),
                x: p.x,
                y: p.y,
                contributor: String::new(),
                timestamp: Utc.timestamp_opt(i as i64, 0).unwrap(),
            })
            .collect();
        let policy = match policy {
            PdxAggregation::LastWins => AggregationPolicy::LastWins,
            PdxAggregation::LinearMean => AggregationPolicy::LinearMean,
            PdxAggregation::QuadraticMean => AggregationPolicy::QuadraticMean,
        };
        let m = aggregate_marker(&proposals, policy)?;
        write_out(out, PdxPoint { x: m.x, y: m.y }, "out")
    })
}
