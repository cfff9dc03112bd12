//! Desk-scale separating-coset calculus for hyperbolically embedded subgroups.

pub mod boundary_pairs;
pub mod cber;
pub mod cli;
pub mod error;
pub mod group_model;
pub mod rays;
pub mod relative_graph;
pub mod separating_cosets;
pub mod y_graph;

pub use error::{LabError, Result};
