//! Command-line front end: commands, reports and their renderings.

pub mod cmd;
pub mod report;
pub mod tex;

pub use cmd::{run, Outcome};
