//! Hadamard single-pixel imaging (HSI) simulation toolkit.
//!
//! The crate covers the whole simulated acquisition chain:
//!
//! - [`transform`]: fast Walsh–Hadamard transforms with sequency-ordered spectra
//!   and basis-pattern synthesis.
//! - [`ordering`]: pattern orders (natural, random, Walsh, cake-cutting, total
//!   variation, dataset-derived preliminary order, XY weight order).
//! - [`sampler`]: the exponential probability function and exact-budget
//!   random selection along an order.
//! - [`acquisition`]: differential bucket measurements and Gaussian noise.
//! - [`recon`]: zero-fill inverse transform and a TV-regularized
//!   compressed-sensing solver.
//! - [`metrics`]: MSE, PSNR and SSIM, whole-image or on a region.
//! - [`cli`]: dataset ingestion, benchmark sweeps, order timing and the
//!   `hsi` command-line front end.
//!
//! ```
//! use hsi::{ordering, sampler, acquisition, recon, metrics, phantom};
//!
//! let object = phantom::centered_square(32, 32, 0.5, 40.0, 220.0);
//! let order = ordering::xy_order(32, 32).unwrap();
//! let samples = sampler::select(&order, 0.25, 7).unwrap();
//! let meas = acquisition::measure(&object, &samples, &acquisition::NoiseSpec::none()).unwrap();
//! let out = recon::tv_reconstruct(&meas, samples.dims(), &recon::ReconParams::default()).unwrap();
//! let db = metrics::psnr(&object, &out.image, 255.0).unwrap();
//! assert!(db > 20.0);
//! ```

pub mod acquisition;
pub mod cli;
pub mod dataset;
pub mod digest;
pub mod error;
pub mod fileio;
pub mod metrics;
pub mod ordering;
pub mod phantom;
pub mod raster;
pub mod recon;
pub mod sampler;
pub mod transform;

pub use error::{Error, Result};
pub use ordering::{PatternOrder, SpectralCoord, Strategy};
pub use raster::ImageBuffer;
pub use sampler::SampleSet;
pub use transform::Spectrum;
