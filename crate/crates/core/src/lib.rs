//! Risk assessment for planned trajectories against uncertain agent
//! predictions.

pub mod cheb_bounds;
pub mod cli_io;
pub mod distributions;
pub mod error;
pub mod frames;
pub mod linalg;
pub mod math;
pub mod mc_oracle;
pub mod method;
pub mod par;
pub mod qfmvg;
pub mod risk_engine;
pub mod sos_bound;
pub mod synth;
pub mod treering;

pub use error::{Error, Result};
