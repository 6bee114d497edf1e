//! Symbolic dynamics toolkit: subshifts of finite type, their covers,
//! entropies, maximal-entropy measures and periodic points.

pub mod blockcodes;
pub mod bounds;
pub mod constructions;
pub mod cover;
pub mod error;
pub mod measures;
pub mod sft;
pub mod spectral;
pub mod words;

pub use error::{Error, Result};
