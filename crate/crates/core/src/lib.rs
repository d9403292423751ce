//! Simulation of analog matrix computing (AMC) circuits built from
//! crosspoint resistive-memory arrays and operational amplifiers.
//!
//! * [`matrix`]: dense matrices, canonical splitting, eigenvalues
//! * [`device`]: conductance mapping, quantization, program-and-verify
//! * [`circuits`]: state-space models of the MVM, inversion, pseudoinverse
//!   and eigenvector circuits
//! * [`dynamics`]: transient integration and settling analysis
//! * [`stability`]: poles, verdicts and response-time bounds
//! * [`oracle`]: reference linear-algebra solvers used to check the circuits

pub mod circuits;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod stability;

pub use circuits::{CircuitSystem, EigenSign, OaParams, TiaConfig, Topology};
pub use device::{ConductanceMatrix, DeviceConfig, MappedSplit, Provenance};
pub use error::{AmcError, Result};
pub use matrix::{Matrix, Spectrum, SplitPair};
pub use stability::{PoleReport, Verdict};
