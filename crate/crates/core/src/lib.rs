//! Correlational object search in simulated households.
//!
//! The crate learns object co-occurrence from relationship-triple corpora
//! with a graph-attention link predictor, drives an iterative zero-shot
//! object-search policy in a seeded grid-world household, and couples the
//! search to a symbolic task planner that turns templated instructions
//! into executable plans with search steps for missing objects.

pub mod commands;
pub mod config;
pub mod error;
pub mod gnn;
pub mod relation;
pub mod render;
pub mod search;
pub mod task;
pub mod world;

pub use error::{Error, Result};
