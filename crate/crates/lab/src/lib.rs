//! File formats, parallel job runners and the `speclab` command line.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod formats;
pub mod jobs;
pub mod manifest;
pub mod pool;
