//! Exact-arithmetic toolkit for subdirect and fibre products of free groups.

pub mod cli;
pub mod decision;
pub mod error;
pub mod fibre;
pub mod hnn;
pub mod homology;
pub mod intlin;
pub mod nilpotent;
pub mod presentations;
pub mod stallings;
pub mod words;
