//! S-spectrum functional calculus for right-linear operators on
//! finite-dimensional Clifford modules.

pub mod calculus;
pub mod clifford;
pub mod error;
pub mod harness;
pub mod hinfinity;
pub mod linalg;
pub mod quadrature;
pub mod relations;
pub mod scenario;
pub mod slice;

pub use clifford::{CliffordElement, ImaginaryUnit, Paravector, SpectralSphere};
pub use error::{Error, Result};
pub use linalg::{ModuleVector, RightLinearOperator};
