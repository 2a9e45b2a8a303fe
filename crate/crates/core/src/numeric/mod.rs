//! Numerical building blocks shared by the geometry, dynamics and quantum
//! layers.

pub mod fd;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod sampling;

pub use ode::{DenseSolution, OdeError, OdeOptions, TwoSided};
