//! Approximate contractive (alternating) simulation relations and symbolic
//! output-feedback controller synthesis for transition systems.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::type_complexity)]

extern crate alloc;

pub mod case;
pub mod checker;
pub mod compose;
pub mod dec;
pub mod error;
pub mod lift;
pub mod observer;
pub mod powerset;
pub mod simulate;
pub mod relation;
pub mod system;
pub mod toy;

pub use dec::{Dec, Gauge};
pub use error::{Error, Result};
pub use relation::{AcParams, GaugedRelation, InputMetric};
pub use system::{FinitePlant, FiniteStates, FiniteSystem, Outputs, TransitionSystem};
