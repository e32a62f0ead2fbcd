//! Unambiguous discrimination of quantum operations.
//!
//! Given a finite set of channels in Kraus form, decide whether they can be
//! told apart without error (possibly with an inconclusive outcome) using a
//! single use with an entangled ancilla, or several uses; build the explicit
//! multi-use strategy and evaluate or simulate it.

pub mod channels;
pub mod discrimination;
pub mod error;
pub mod io;
pub mod numerics;
pub mod random;
pub mod states;

pub use channels::{pauli_channel, unitary_channel, ChannelSet, KrausChannel};
pub use discrimination::{
    build_strategy, check_multi_use, check_single_use, evaluate_strategy,
    no_ancilla_single_use_scan, simulate_strategy, FeasibilityReport, Strategy,
};
pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, Subspace, Tolerance};
pub use states::{DensityMatrix, MeasurementPlan, ProbeState};
