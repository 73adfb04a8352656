//! Conversion servers and the `texmath` command-line client.

pub mod cli;
pub mod client;
pub mod config;
pub mod envelope;
pub mod examples;
pub mod pool;
pub mod server;
pub mod ws;
pub mod zipjob;
