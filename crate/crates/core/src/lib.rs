//! Feasibility simulator for a gravitational entanglement witness built from
//! two side-by-side superfluid He⁴ quantum interference devices.

// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod constants;
pub mod coupling;
pub mod error;
pub mod interferometer;
pub mod io;
pub mod noise;
pub mod quadrature;
pub mod roots;
pub mod seed;
pub mod superfluid;
pub mod sweep;

pub use config::{parse_config, ExperimentConfig};
pub use error::{Error, Result};
pub use interferometer::{Model, PairMode};
pub use noise::{NoiseParams, TimeSeries};
