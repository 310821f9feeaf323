//! Library surface of the `copt` command-line tool; the binary in `main.rs`
//! is a thin clap wrapper over [`commands`], so integration tests can drive
//! the exact command implementations in-process.

pub mod commands;
