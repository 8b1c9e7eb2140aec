//! Scenario files, benchmark generators, plan files, SVG export and the
//! benchmark harness around [`sl1m_core`].

pub mod bench;
pub mod cli;
pub mod dump;
pub mod error;
pub mod generators;
pub mod plan_file;
pub mod scenario;
pub mod svg;

pub use error::{Error, Result};
