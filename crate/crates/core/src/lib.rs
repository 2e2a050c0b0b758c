//! Recursive Arrival: switching graphs with recursive calls.
//!
//! * [`model`]: instances, validation, canonical edge order, normalization.
//! * [`semantics`]: the transition function, runs and run profiles.
//! * [`flow`]: switching-flow certificates and the run-like classification.
//! * [`line`]: the Adv/Prev line, the walk, decisions, witnesses and the
//!   UEOPL step functions.
//! * [`reduce`]: monotone circuits and the hardness gadget construction.

pub mod bounds;
pub mod error;
pub mod flow;
pub mod gen;
pub mod line;
pub mod model;
pub mod reduce;
pub mod report;
pub mod semantics;

pub use bounds::OverflowPoly;
pub use error::{Error, Result};
pub use flow::Flow;
pub use model::{parse_instance, Instance};
