//! Portable project folders for geospatial layer decks, plus the tools that
//! author, validate, share, render and present them.
//!
//! A project is a folder holding a canonical `project.json` and an `assets/`
//! tree. [`project`] reads, validates, saves and zips such folders;
//! [`author`] edits them; [`state`] is the pure presenter state machine;
//! [`compositor`] renders a state to pixels; [`service`] serves a project to
//! controller and display clients over HTTP and a websocket.

pub mod author;
pub mod cli;
pub mod compositor;
pub mod demo;
pub mod error;
pub mod model;
pub mod project;
pub mod report;
pub mod service;
pub mod state;

pub use error::{ProjectError, Result};
pub use model::{ColorSpec, DataLayer, ProjectManifest, SubLayer, TimeFormat, TimeKey};
pub use report::{IssueCode, Severity, ValidationIssue, ValidationReport};
