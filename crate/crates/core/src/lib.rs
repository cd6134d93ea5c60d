//! Transfer operators of the Collatz map on weighted Bergman-type spaces.

pub mod collatz;
pub mod eigen;
pub mod ergodic;
pub mod error;
pub mod exact_norm;
pub mod num;
pub mod space;
pub mod transfer;
pub mod weights;

pub use error::{Error, Result};
pub use space::{AnyVec, CoeffVec, Degree, Scalar, ScalarKind};
pub use weights::WeightDescriptor;
