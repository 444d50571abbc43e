//! Group gradings on upper block triangular matrix algebras.

pub mod group;
pub mod scalar;
pub mod linalg;
pub mod par;
pub mod graded;
pub mod constructions;
pub(crate) mod poly;
pub mod decompose;
pub mod verify;
pub mod error;

pub use error::Error;
