pub mod cij;
pub mod classify;
pub mod error;
pub mod iteration;
pub mod ledger;
pub mod models;
pub mod normal_form;
pub mod real;
pub mod relations;
pub mod rotation;
pub mod surface;

pub use error::{Error, Result};
