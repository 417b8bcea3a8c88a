//! Continuum mechanics of bodies with a manifold-valued order parameter:
//! constitutive models, a structured-grid Hamiltonian integrator, Nöther
//! currents, Poisson brackets of functionals and Hamilton–Jacobi checks.

pub mod checks;
pub mod engine;
pub mod error;
pub mod hjac;
pub mod model;
pub mod noether;
pub mod poisson;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod scenario;
pub mod tensor;

pub use error::{Error, Result};
pub use model::{CanonicalPoint, DerivedPoint, HamiltonianPartials, Model, StatePoint};
pub use scalar::{Dual, Scalar};

pub type Real = f64;
pub type Dual64 = Dual<f64>;
pub type HyperDual64 = Dual<Dual<f64>>;
