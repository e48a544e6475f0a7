//! Manifest loading, command execution and report rendering for the `pw`
//! binary. The pieces are a library so integration tests can drive them
//! directly.

pub mod manifest;
pub mod output;
pub mod runner;

pub use manifest::{load_manifest, parse_manifest, Manifest};
pub use output::{render_json, render_text, OutputFormat, RunOutput};
pub use runner::{CommandResult, RunConfig};
