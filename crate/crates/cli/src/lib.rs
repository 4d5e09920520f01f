//! Command-line front end: the `.rcp` language, report emission and the
//! `recipro` commands.

pub mod commands;
pub mod dsl;
pub mod model;
pub mod report;

pub use dsl::{parse_document, render, Document, DslError};
