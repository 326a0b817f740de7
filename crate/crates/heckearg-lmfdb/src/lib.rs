//! Weight-2, trivial-character newforms of prime level from the LMFDB web API.
//!
//! Two requests per newform orbit: the orbit list for the level, then the complex
//! embeddings (`an_normalized`) of each orbit. Responses are cached under
//! `<cache>/lmfdb/q=<q>.json`; offline mode reads only the cache.

mod client;
mod crosscheck;
mod record;

pub use client::{ClientConfig, LmfdbClient, Transport, TransportError, UreqTransport};
pub use crosscheck::{crosscheck, data_sanity, CrosscheckReport, MatchedPair};
pub use record::{cache_path, hecke_orbit_code, to_basis, IngestedForm, LmfdbRecord};

#[derive(Debug, thiserror::Error)]
pub enum LmfdbError {
    #[error("could not fetch {url}: {reason}; no cache at {cache}. Rerun with --offline once a cache file is in place")]
    Unreachable { url: String, reason: String, cache: String },
    #[error("offline mode: no cache at {0}")]
    NoCache(String),
    #[error("malformed payload from {url}: {detail}; payload starts {excerpt:?}")]
    Payload { url: String, detail: String, excerpt: String },
    #[error("bad newform label {0:?}")]
    Label(String),
    #[error("form count mismatch at q={q}: basis has {computed}, ingested {ingested}")]
    CountMismatch { q: u64, computed: usize, ingested: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] heckearg::Error),
}

pub type Result<T> = std::result::Result<T, LmfdbError>;
