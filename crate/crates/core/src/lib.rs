//! Provenance watermarks for GPS trajectories.
//!
//! A trajectory is cut into fixed-size blocks, each block is read as a
//! complex sequence (`lat + i*lon`), and a secret ternary vector is added to
//! the block's Fourier amplitudes. Verification is non-blind: it needs the
//! original trajectory and the watermark, and scores the suspect by the mean
//! normalized cross-correlation between the recovered and the secret vectors.
//!
//! * [`geo`]: trajectory model, haversine distance, modification threshold.
//! * [`spectral`]: forward and inverse transforms in amplitude/phase form.
//! * [`watermark`]: generation, embedding, candidate selection, verification.
//! * [`attack`]: the modification attacks used to test robustness.
//! * [`eval`]: CSV I/O, the original-trajectory store and the experiment runner.

pub mod attack;
pub mod error;
pub mod eval;
pub mod geo;
pub mod spectral;
pub mod watermark;

pub use error::{Error, Result};
pub use geo::{GpsPoint, Trajectory};
pub use watermark::{VerificationReport, WatermarkParams, WatermarkSpec};
