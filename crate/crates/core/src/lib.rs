//! Structure-preserving solvers for the relativistic heat equation and the
//! relativistic kinetic Fokker-Planck equations written as GENERIC systems.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod generic;
pub mod grid;
pub mod heat;
pub mod jacobi;
pub mod io;
pub mod kfp;
pub mod limit;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModelParams = model::ModelParams<f64>;
pub type Potential = model::Potential<f64>;
pub type SpeedOfLight = model::SpeedOfLight<f64>;
pub type PhaseGrid = grid::PhaseGrid<f64>;
pub type State = generic::State<f64>;
pub type CotangentVector = generic::CotangentVector<f64>;
pub type Tangent = generic::Tangent<f64>;
pub type KineticOperator = generic::KineticOperator<f64>;
pub type DiagnosticsRecord = diagnostics::DiagnosticsRecord<f64>;
pub type KfpConfig = kfp::KfpConfig<f64>;
pub type HeatGrid = heat::HeatGrid<f64>;
pub type HeatState = heat::HeatState<f64>;
pub type HeatConfig = heat::HeatConfig<f64>;

pub use generic::Dissipation;
pub use model::Variant;
