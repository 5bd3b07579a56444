//! Decentralized observer-based load-frequency controller synthesis for
//! N-area power systems: model construction, LMI assembly and solution, gain
//! recovery, closed-loop verification and time-domain simulation.
//!
//! Everything numeric is generic over [`Scalar`] (`f32`, `f64`); the `*64`
//! aliases fix `f64`.

pub mod analysis;
pub mod error;
pub mod io;
pub mod model;
pub mod numlin;
pub mod scalar;
pub mod sdp;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = numlin::Matrix<f64>;
pub type AreaParams64 = model::AreaParams<f64>;
pub type CompositeSystem64 = model::CompositeSystem<f64>;
pub type OutputSelection64 = model::OutputSelection<f64>;
pub type DesignSpec64 = synthesis::DesignSpec<f64>;
pub type DesignOptions64 = synthesis::DesignOptions<f64>;
pub type Design64 = synthesis::Design<f64>;
pub type GainSet64 = synthesis::GainSet<f64>;
pub type LmiSolution64 = sdp::LmiSolution<f64>;
pub type VerificationReport64 = analysis::VerificationReport<f64>;
pub type Trajectory64 = sim::Trajectory<f64>;
