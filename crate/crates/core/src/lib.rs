//! Spectral radii, boundedness classes and Neumann-series resolvents for
//! operators on sequence spaces whose topology is given by explicit
//! seminorm families.

pub mod calculus;
pub mod classify;
pub mod closed_ops;
pub mod compact;
pub mod corpus;
pub mod error;
pub mod limsup;
pub mod measure;
pub mod neumann;
pub mod num;
pub mod operator;
pub mod radii;
pub mod seminorm;
pub mod space;
pub mod vector;
pub mod weight;

pub use error::{Result, SpectraError};
pub use num::{Bracket, ExtReal, Scalar, Wide};
pub use operator::OperatorRep;
pub use seminorm::{Seminorm, SeminormFamily};
pub use space::{SequenceClass, SpaceModel};
pub use weight::Weight;
pub use vector::{SparseVector, WideVector};
