//! Holographic declarative memory.
//!
//! A vector-symbolic memory store in which every unique token owns three
//! fixed-dimension vectors: a random environment vector identifying it, a
//! memory vector accumulating its associations, and a time-memory vector
//! binding the chunks it appeared in to oscillator-derived representations
//! of their encoding time. Storage scales with the number of unique tokens,
//! not with the amount of text or the number of chunks encoded.
//!
//! On top of the store sit cue-based retrieval with multiple-unknown
//! chaining, whole-chunk recall driven by time-code reconstruction, a
//! text-to-memory ingestion pipeline, and CSV exports for inspecting the
//! vector space and the time codes.

mod config;
mod error;
mod hrr;
mod model;
mod recall;
mod rng;
mod store;
mod time;

pub mod analysis;
pub mod snapshot;
pub mod text;

pub use config::{ModelConfig, RecallMethod, RecallPolicy};
pub use error::{Error, Result};
pub use hrr::{HoloVector, Permutation};
pub use model::{LexiconEntry, Model, TokenInfo};
pub use recall::{Recall, RecallStage, ScanOutcome, TimeHrr};
pub use store::{Chunk, Cue};
pub use time::{
    sample_indices, selection_probabilities, BankParams, OscillatorBank, SimilarityMatrix,
    TimeVector, OSCILLATOR_COUNT, SELECTIONS_PER_ELEMENT, TIME_VECTOR_LEN,
};

#[doc(hidden)]
pub use recall::measure_recall_rate;
