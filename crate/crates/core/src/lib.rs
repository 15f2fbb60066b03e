//! Slepian functions on regions of the sphere, Slepian scale-discretised
//! wavelets built from the sifting convolution, and hard-threshold wavelet
//! denoising.

pub mod basis;
pub mod cli;
pub mod config;
pub mod denoise;
pub mod error;
pub mod io;
pub mod quadrature;
pub mod region;
pub mod sifting;
pub mod sphere;
pub mod synthetic;
pub mod wavelets;

pub use basis::{build_basis, SlepianBasis, SlepianCoeffs};
pub use error::{Error, Result};
pub use region::Region;
pub use sphere::{forward_sht, inverse_sht, make_grid, GridSpec, HarmonicCoeffs, SampledField};
pub use wavelets::{build_filter_bank, FilterBank, FilterId, TilingParams};
