//! Core algorithms for bias-aware candidate screening.
//!
//! This crate is `no_std` (with `alloc`) and holds everything that is pure
//! computation: the application data model and attribute derivation, the
//! descriptive statistics behind the statistical sidebar, the pairwise
//! ranking SVM that models one reviewer's preferences, the inconsistency
//! detectors, the t-SNE comparison layout and the append-only scoring log.
//!
//! File formats, storage, the HTTP service and the CLI live in the
//! `fairscreen` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod attributes;
pub mod classify;
pub mod inconsistency;
pub mod indicators;
pub mod layout;
pub mod model;
pub mod parse;
pub mod prefmodel;
pub mod schema;
pub mod session;
pub mod stats;

pub use attributes::{derive_attributes, AttributeVector, Normalization, RankTables};
pub use model::{AppId, Application, Level, Score, ScoreSheet, Section, Tier};
pub use parse::{parse_application, ParseError};
pub use schema::{Attribute, SectionSchema, SCHEMA_VERSION};
