//! Core engine for retrieval-augmented root-cause analysis of incident tickets.
//!
//! Everything in this crate is pure computation over in-memory data: no file
//! or network IO, no clocks, no global state. The `rca` companion crate wires
//! these pieces to files, providers, a CLI, and an HTTP service.
//!
//! Pipeline stages, in the order a ticket flows through them:
//!
//! - [`incident`] — ticket records, filtering, and chronological splits
//! - [`cleanse`] — stack-trace and embedded-image removal
//! - [`summarize`] — provider-backed summarization with content-addressed caching
//! - [`embed`] — unit-norm embeddings (remote provider or local feature hashing)
//! - [`index`] — exact and 8-bit-quantized L2 nearest-neighbor search
//! - [`retrieve`] — in-context example selection and the chunked baseline
//! - [`prompt`] — few-shot prompt assembly under a token budget
//! - [`generate`] — root-cause generation through a completion provider
//! - [`metrics`] — ROUGE-1, ROUGE-L, METEOR, and GLEU scoring
//! - [`stats`] — paired significance tests and percent-gain arithmetic
//! - [`experiment`] — study designs (shot sweeps, selection, ordering, chunked)
//!
//! The crate is `no_std` + `alloc`; determinism is a hard requirement
//! throughout (seeded RNGs, ordered maps, total float orderings).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cleanse;
pub mod embed;
pub mod experiment;
pub mod generate;
pub mod incident;
pub mod index;
pub mod metrics;
pub mod prompt;
pub mod provider;
mod randutil;
pub mod retrieve;
pub mod stats;
pub mod summarize;
pub mod synth;

pub use incident::{CorpusSplits, FilterSpec, Incident, Status};
pub use index::{IndexKind, SearchHit};
pub use prompt::{AssembledPrompt, TokenBudget, TokenCounter};
