//! Gate-based statevector simulation and circuit construction for quantum
//! spectral solvers: periodic Poisson problems in one and two dimensions and
//! the fixed-point homogenisation of a one-dimensional RVE.
//!
//! Conventions shared by every module:
//! - qubit 0 is the most significant bit of a basis index;
//! - the forward Fourier transform uses `exp(+2 pi i jk / N) / sqrt(N)`;
//! - an `RY(theta)` on a flag qubit in `|0>` leaves `sin(theta / 2)` on `|1>`.

pub mod circuit;
pub mod cli;
pub mod encode;
pub mod error;
pub mod gate;
pub mod linalg;
pub mod poisson;
pub mod qft;
pub mod rve;
pub mod stats;
pub mod statevector;
pub mod synth;
pub mod transpile;

pub use circuit::{Circuit, GateCounts};
pub use error::{Error, Result};
pub use gate::{Control, GateInstance, GateKind, Polarity};
pub use statevector::{Projector, StateVector};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
