//! Word locations on scanned pages: crowd marker aggregation, page layout
//! estimation and the region boxes that cover one headword's entry.
//!
//! Coordinates are source-image pixels. Boxes are half-open:
//! a box covers rows `top..bottom` and columns `left..right`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::full::normalize_word;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocationError {
    #[error("no proposals to aggregate")]
    NoProposals,
    #[error("proposals target different (dictionary, page, word) triples")]
    MixedTarget,
    #[error("marker ({x}, {y}) is outside the {width}x{height} page")]
    OutOfBounds { x: u32, y: u32, width: u32, height: u32 },
    #[error("need at least {needed} markers to estimate a layout, got {got}")]
    InsufficientMarkers { needed: usize, got: usize },
    #[error("next marker does not follow the current one in reading order")]
    OrderViolation,
    #[error("layout has no columns")]
    EmptyLayout,
    #[error("invalid layout configuration: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerProposal {
    pub dictionary_id: String,
    pub page: u32,
    pub word: String,
    pub x: u32,
    pub y: u32,
    pub contributor: String,
    pub timestamp: DateTime<Utc>,
}

impl MarkerProposal {
    pub fn check_bounds(&self, width: u32, height: u32) -> Result<(), LocationError> {
        if self.x >= width || self.y >= height {
            return Err(LocationError::OutOfBounds {
                x: self.x,
                y: self.y,
                width,
                height,
            });
        }
        Ok(())
    }

    fn target(&self) -> (&str, u32, String) {
        (&self.dictionary_id, self.page, normalize_word(&self.word))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationPolicy {
    LastWins,
    #[default]
    LinearMean,
    QuadraticMean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationMarker {
    pub word: String,
    pub page: u32,
    pub x: u32,
    pub y: u32,
    pub proposal_count: usize,
    pub policy: AggregationPolicy,
}

/// `round_half_up(sum / n)` in exact integer arithmetic.
pub fn mean_half_up(sum: u64, n: u64) -> u64 {
    (2 * sum + n) / (2 * n)
}

/// `round_half_up(sqrt(sum_sq / n))` in exact integer arithmetic: the `r`
/// with `(2r - 1)^2 * n <= 4 * sum_sq < (2r + 1)^2 * n`.
pub fn rms_half_up(sum_sq: u128, n: u128) -> u64 {
    let target = 4 * sum_sq;
    let mut r = ((sum_sq as f64 / n as f64).sqrt() + 0.5).floor() as u128;
    let upper = |r: u128| (2 * r + 1) * (2 * r + 1) * n;
    let lower = |r: u128| if r == 0 { 0 } else { (2 * r - 1) * (2 * r - 1) * n };
    while target >= upper(r) {
        r += 1;
    }
    while r > 0 && target < lower(r) {
        r -= 1;
    }
    r as u64
}

pub fn aggregate_marker(
    proposals: &[MarkerProposal],
    policy: AggregationPolicy,
) -> Result<LocationMarker, LocationError> {
    let first = proposals.first().ok_or(LocationError::NoProposals)?;
    let target = first.target();
    if proposals.iter().any(|p| p.target() != target) {
        return Err(LocationError::MixedTarget);
    }
    let n = proposals.len() as u64;
    let (x, y) = match policy {
        AggregationPolicy::LastWins => {
            // latest timestamp; ties resolved by contributor then coordinates
            let last = proposals
                .iter()
                .max_by(|a, b| {
                    a.timestamp
                        .cmp(&b.timestamp)
                        .then_with(|| a.contributor.cmp(&b.contributor))
                        .then_with(|| (a.y, a.x).cmp(&(b.y, b.x)))
                })
                .expect("non-empty");
            (last.x, last.y)
        }
        AggregationPolicy::LinearMean => {
            let sx: u64 = proposals.iter().map(|p| p.x as u64).sum();
            let sy: u64 = proposals.iter().map(|p| p.y as u64).sum();
            (mean_half_up(sx, n) as u32, mean_half_up(sy, n) as u32)
        }
        AggregationPolicy::QuadraticMean => {
            let sx: u128 = proposals.iter().map(|p| (p.x as u128).pow(2)).sum();
            let sy: u128 = proposals.iter().map(|p| (p.y as u128).pow(2)).sum();
            (rms_half_up(sx, n as u128) as u32, rms_half_up(sy, n as u128) as u32)
        }
    };
    Ok(LocationMarker {
        word: target.2,
        page: first.page,
        x,
        y,
        proposal_count: proposals.len(),
        policy,
    })
}

/// Groups proposals by `(page, word)` and aggregates each group.
pub fn aggregate_all(proposals: &[MarkerProposal], policy: AggregationPolicy) -> Vec<LocationMarker> {
    let mut groups: BTreeMap<(u32, String), Vec<MarkerProposal>> = BTreeMap::new();
    for p in proposals {
        groups
            .entry((p.page, normalize_word(&p.word)))
            .or_default()
            .push(p.clone());
    }
    groups
        .values()
        .filter_map(|g| aggregate_marker(g, policy).ok())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadingDirection {
    #[default]
    Ltr,
    Rtl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Margins {
    pub top: u32,
    pub bottom: u32,
    pub left: u32,
    pub right: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub left: u32,
    pub right: u32,
}

/// Margins and text columns of a page. `columns` are kept in reading order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageLayout {
    pub margins: Margins,
    pub columns: Vec<Column>,
    pub reading_direction: ReadingDirection,
}

impl PageLayout {
    /// Columns given in any order are sorted into reading order.
    pub fn new(margins: Margins, mut columns: Vec<Column>, reading_direction: ReadingDirection) -> Self {
        columns.sort_by_key(|c| c.left);
        if reading_direction == ReadingDirection::Rtl {
            columns.reverse();
        }
        PageLayout {
            margins,
            columns,
            reading_direction,
        }
    }

    /// Reading-order index of the column holding `x` (nearest column when
    /// `x` falls in a gutter).
    pub fn column_of(&self, x: u32) -> Option<usize> {
        self.columns
            .iter()
            .enumerate()
            .min_by_key(|(_, c)| {
                if x < c.left {
                    c.left - x
                } else if x >= c.right {
                    x + 1 - c.right
                } else {
                    0
                }
            })
            .map(|(i, _)| i)
    }

    fn clamp_y(&self, y: u32) -> u32 {
        y.clamp(self.margins.top, self.margins.bottom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConfig {
    /// Split x clusters at gaps wider than this fraction of the page width.
    pub column_gap_fraction: f64,
    /// Padding added around marker extents, as a fraction of the page dimension.
    pub padding_fraction: f64,
    pub min_markers: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            column_gap_fraction: 0.25,
            padding_fraction: 0.02,
            min_markers: 10,
        }
    }
}

pub fn estimate_layout(
    markers: &[LocationMarker],
    page_width: u32,
    page_height: u32,
    direction: ReadingDirection,
    config: &LayoutConfig,
) -> Result<PageLayout, LocationError> {
    if markers.len() < config.min_markers {
        return Err(LocationError::InsufficientMarkers {
            needed: config.min_markers,
            got: markers.len(),
        });
    }
    if config.column_gap_fraction <= 2.0 * config.padding_fraction {
        return Err(LocationError::Config("column gap must exceed twice the padding"));
    }
    let pad_x = (page_width as f64 * config.padding_fraction).round() as u32;
    let pad_y = (page_height as f64 * config.padding_fraction).round() as u32;
    let gap = page_width as f64 * config.column_gap_fraction;

    let min_y = markers.iter().map(|m| m.y).min().expect("non-empty");
    let max_y = markers.iter().map(|m| m.y).max().expect("non-empty");
    let mut xs: Vec<u32> = markers.iter().map(|m| m.x).collect();
    xs.sort_unstable();

    let margins = Margins {
        top: min_y.saturating_sub(pad_y),
        bottom: (max_y + pad_y + 1).min(page_height),
        left: xs[0].saturating_sub(pad_x),
        right: (xs[xs.len() - 1] + pad_x + 1).min(page_width),
    };

    let mut columns = Vec::new();
    let mut start = xs[0];
    for pair in xs.windows(2) {
        if (pair[1] - pair[0]) as f64 > gap {
            columns.push((start, pair[0]));
            start = pair[1];
        }
    }
    columns.push((start, xs[xs.len() - 1]));
    let columns = columns
        .into_iter()
        .map(|(lo, hi)| Column {
            left: lo.saturating_sub(pad_x).max(margins.left),
            right: (hi + pad_x + 1).min(margins.right),
        })
        .collect();
    Ok(PageLayout::new(margins, columns, direction))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionBox {
    pub page: u32,
    pub top: u32,
    pub bottom: u32,
    pub left: u32,
    pub right: u32,
}

impl RegionBox {
    pub fn area(&self) -> u64 {
        (self.bottom - self.top) as u64 * (self.right - self.left) as u64
    }

    pub fn intersects(&self, other: &RegionBox) -> bool {
        self.page == other.page
            && self.top < other.bottom
            && other.top < self.bottom
            && self.left < other.right
            && other.left < self.right
    }

    pub fn is_valid(&self, width: u32, height: u32) -> bool {
        self.top < self.bottom && self.left < self.right && self.bottom <= height && self.right <= width
    }
}

/// Reading position of a marker: page, column in reading order, row.
fn position(marker: &LocationMarker, layout: &PageLayout) -> Result<(u32, usize, u32), LocationError> {
    let col = layout.column_of(marker.x).ok_or(LocationError::EmptyLayout)?;
    Ok((marker.page, col, layout.clamp_y(marker.y)))
}

fn push_box(out: &mut Vec<RegionBox>, page: u32, column: &Column, top: u32, bottom: u32) {
    if top < bottom {
        out.push(RegionBox {
            page,
            top,
            bottom,
            left: column.left,
            right: column.right,
        });
    }
}

/// Regions between a headword's marker and the next headword's marker, in
/// reading order. Intermediate pages (if any) use `layout`.
pub fn region_boxes(
    word: &LocationMarker,
    next: Option<&LocationMarker>,
    layout: &PageLayout,
    next_page_layout: Option<&PageLayout>,
) -> Result<Vec<RegionBox>, LocationError> {
    let (page, col, y) = position(word, layout)?;
    let mut out = Vec::new();
    let m = layout.margins;

    let Some(next) = next else {
        push_box(&mut out, page, &layout.columns[col], y, m.bottom);
        for c in &layout.columns[col + 1..] {
            push_box(&mut out, page, c, m.top, m.bottom);
        }
        return Ok(out);
    };

    if next.page == page {
        let (_, ncol, ny) = position(next, layout)?;
        match (col, y).cmp(&(ncol, ny)) {
            Ordering::Less => {}
            _ => return Err(LocationError::OrderViolation),
        }
        if col == ncol {
            push_box(&mut out, page, &layout.columns[col], y, ny);
            return Ok(out);
        }
        push_box(&mut out, page, &layout.columns[col], y, m.bottom);
        for c in &layout.columns[col + 1..ncol] {
            push_box(&mut out, page, c, m.top, m.bottom);
        }
        push_box(&mut out, page, &layout.columns[ncol], m.top, ny);
        return Ok(out);
    }
    if next.page < page {
        return Err(LocationError::OrderViolation);
    }

    push_box(&mut out, page, &layout.columns[col], y, m.bottom);
    for c in &layout.columns[col + 1..] {
        push_box(&mut out, page, c, m.top, m.bottom);
    }
    for mid in page + 1..next.page {
        for c in &layout.columns {
            push_box(&mut out, mid, c, m.top, m.bottom);
        }
    }
    let next_layout = next_page_layout.unwrap_or(layout);
    let (_, ncol, ny) = position(next, next_layout)?;
    let nm = next_layout.margins;
    for c in &next_layout.columns[..ncol] {
        push_box(&mut out, next.page, c, nm.top, nm.bottom);
    }
    push_box(&mut out, next.page, &next_layout.columns[ncol], nm.top, ny);
    Ok(out)
}

/// Contribution metadata. Keys beyond `contributor` and `updated` pass
/// through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub contributor: String,
    pub updated: DateTime<Utc>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Meta {
    pub fn new(contributor: impl Into<String>, updated: DateTime<Utc>) -> Self {
        Meta {
            contributor: contributor.into(),
            updated,
            extra: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: u64,
    pub dictionary_id: String,
    pub page: u32,
    pub word: String,
    pub text: String,
    pub meta: Meta,
}
