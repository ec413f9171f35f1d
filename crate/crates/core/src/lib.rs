//! Exact symbolic computation of higher Contou-Carrère symbols and related maps.

pub mod coeff;
pub mod error;
pub mod forms;
pub mod index;
pub mod laurent;
pub mod random;
pub mod sign;
pub mod suites;
pub mod symbol;
pub mod universal;
pub mod verify;
pub mod witt;

pub use error::{Error, Result};
