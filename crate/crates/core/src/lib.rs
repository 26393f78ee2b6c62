//! Semantic service composition without hand-written workflows.
//!
//! Services describe what they need and what they produce as graph
//! patterns over a shared triple knowledge base. The [`engine`] repeatedly
//! invokes every service whose precondition currently matches and merges the
//! results back until nothing new can happen. Services may embed
//! [`smartness`] rules that answer from the request alone, and [`maturity`]
//! grades a service by how much of this it supports.
//!
//! This crate is `no_std` and only needs `alloc`; HTTP hosting, file formats
//! and the CLI live in the `smartws` crate.

#![no_std]

extern crate alloc;

pub mod descriptions;
pub mod engine;
pub mod kb;
pub mod maturity;
pub mod smartness;
