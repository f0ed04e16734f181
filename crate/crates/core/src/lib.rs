//! Exact ground states of small fermionic Hamiltonians, orbital entanglement
//! measures, and entropy-driven selection and optimization of complete
//! active spaces.

pub mod analysis;
pub mod casci;
pub mod cli;
pub mod error;
pub mod fci;
pub mod measures;
pub mod model;
pub mod optimizer;
pub mod partition;
pub mod rdm;
pub mod rotation;
pub mod tensor;

pub use error::{QicasError, Result};
