//! Exact simulation of multi-particle interferometer experiments in the
//! transactional picture.
//!
//! The pipeline is: describe a network ([`circuit`]), propagate the offer
//! waves to their absorbers ([`propagate`]), form the weighted set of
//! incipient transactions and sample it ([`transact`]). Amplitudes are exact
//! elements of Q(√2)[i] ([`exact`]) unless the float engine is requested.

pub mod amplitude;
pub mod circuit;
pub mod exact;
pub mod propagate;
pub mod state;
pub mod transact;

pub use amplitude::{Amplitude, Weight};
pub use circuit::{builtin, parse, render, CircuitGraph, Component, Violation};
pub use exact::{ExactAmp, ExactReal, Rational};
pub use propagate::{propagate, schedule, state_at_cut, FinalState, PropagateError, Schedule};
pub use state::{BasisLabel, Slot, State};
pub use transact::{build_mixture, cw_response, frequency_report, TransactionSet, TrialReport};
