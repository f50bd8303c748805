//! Implicit-explicit multirate infinitesimal GARK methods.

pub mod catalog;
pub mod error;
pub mod format;
pub mod gark;
pub mod integrator;
pub mod linalg;
pub mod order_conditions;
pub mod problems;
pub mod stability;
pub mod study;
pub mod tableaux;

pub use error::{Error, Result};
