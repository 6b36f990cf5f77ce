//! Fuzzy lexical item detection for technical documents, with a correction
//! memory that learns from how writers fix (or ignore) alerts.
//!
//! The pipeline is:
//!
//! 1. [`detector::detect`] finds fuzzy items and attaches a [`detector::Context`];
//! 2. [`memory::learn`] compares original and corrected documents and stores one
//!    [`memory::CorrectionRecord`] per alert, classified into cases 1 to 5;
//! 3. [`memory::induce`] derives deactivations and ranked slot fillers;
//! 4. [`patterns::suggest`] matches correction patterns and fills their slots
//!    from memory.

pub mod config;
pub mod detector;
pub mod fixtures;
pub mod kv;
pub mod lexicon;
pub mod memory;
pub mod patterns;
pub mod textmodel;
