//! Generation, exact certification and canonicalization of semidefinite
//! programs with positive duality gaps.

pub mod canonical2;
pub mod error;
pub mod facial;
pub mod generators;
pub mod io;
pub mod scalar;
pub mod sdpmodel;
pub mod symkernel;
pub mod tolerances;

pub use error::{Error, Result};
pub use scalar::{ExtendedRat, Rat};
pub use sdpmodel::{Family, ReformOp, SdpInstance};
pub use symkernel::{Mat, PsdStatus, SymMat};
pub use tolerances::Tolerances;
