//! OTFS delay-Doppler channel simulation and low-complexity linear
//! equalization.
//!
//! The delay-Doppler channel with integer taps is a 2D circular convolution,
//! so its `NM x NM` matrix is doubly block circulant and is diagonalized by the
//! 2D DFT. [`equalizer::zf_fft2`] and [`equalizer::mmse_fft2`] exploit this to
//! equalize a frame in `O(NM log NM)`; [`equalizer::zf_dense`] and
//! [`equalizer::mmse_dense`] solve the same systems on the explicit matrix and
//! serve as references.

pub mod bench;
pub mod channel;
pub mod equalizer;
pub mod error;
pub mod fft;
pub mod grid;
pub mod modem;
pub mod sim;
pub mod transform;
pub mod verify;

pub use channel::{ChannelPath, ChannelSpectrum, DenseChannel, PathSet};
pub use equalizer::{EqualizedFrame, Method, NoiseModel};
pub use error::{Error, Result};
pub use grid::{DdGrid, DdVector};
pub use transform::TransformPlan;
