//! Graph-of-groups calculus, subgroup distortion scans, rapid-decay
//! convolution experiments and Anosov slope dynamics.

pub mod algebra;
pub mod anosov;
pub mod config;
pub mod distortion;
pub mod error;
pub mod free_product;
pub mod functions;
pub mod gog;
pub mod groups;
pub mod growth;
pub mod harness;
pub mod lattice;
pub mod rd;
pub mod scenarios;
pub mod stallings;
pub mod subgroup;
pub mod word;

pub use error::{Error, Result};
