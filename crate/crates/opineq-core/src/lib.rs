pub mod block;
pub mod checks;
pub mod classes;
pub mod error;
pub mod matrix;
pub mod means;
pub mod radius;
pub mod registry;
pub mod report;

pub use error::{LabError, Result};
