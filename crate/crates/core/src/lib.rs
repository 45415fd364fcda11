//! Mean-field simulation of diffractive focusing for a Bose-Einstein
//! condensate released from a Laguerre-Gauss box trap.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix it to `f64`.

pub mod dynamics;
pub mod error;
pub mod gpe3d;
pub mod grid;
pub mod groundstate;
pub mod metrics;
pub mod potentials;
pub mod propagator;
pub mod scalar;
pub mod sweep;
pub mod trajectories;
pub mod units;
pub mod wavefile;
pub mod wigner;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid1D = grid::Grid1D<f64>;
pub type Grid3D = grid::Grid3D<f64>;
pub type WaveFunction = grid::WaveFunction<f64>;
pub type WaveFunction3D = grid::WaveFunction3D<f64>;
pub type MomentumWaveFunction = grid::MomentumWaveFunction<f64>;
pub type Spectral1D = grid::Spectral1D<f64>;
pub type Evolution = dynamics::Evolution<f64>;
pub type Evolution3D = dynamics::Evolution3D<f64>;
pub type SplitStep1D = dynamics::SplitStep1D<f64>;
pub type Kinetic = propagator::Kinetic<f64>;
