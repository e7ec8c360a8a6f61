//! Progressive indexing and lookup for scanned dictionaries.
//!
//! A dictionary starts as an ordered run of page images and gains a sparse
//! index, a full index, location markers, annotations and digitized entries
//! as contributors provide them. [`service::Engine`] answers per-language
//! lookups across all dictionaries from whatever index each one has.

pub mod cli;
pub mod collation;
pub mod error;
pub mod feedback;
pub mod full;
pub mod http;
pub mod location;
pub mod prefix;
pub mod service;
pub mod sparse;
pub mod store;

pub use collation::{Collator, TailoringRuleSet};
pub use error::{Error, Result};
pub use service::{Engine, SearchResponse, ServiceConfig};
pub use store::Store;
