//! Stress testing of single control loops in the frequency-amplitude plane.
//!
//! Reference signals are built from a periodic unit shape scaled by an
//! amplitude gain and a time gain ([`signals`]). Executed traces are analysed
//! through their single-sided DFT ([`spectral`]): the degree of non-linearity
//! measures output energy at frequencies that are not relevant components of
//! the reference, and the degree of filtering compares output and reference
//! at the relevant ones.
//!
//! [`plants`] provides two deterministic closed-loop simulators with
//! injectable non-linear blocks, [`campaign`] bounds amplitudes with sinusoidal
//! probes, generates and executes test sets, and [`analysis`] evaluates the
//! metamorphic relations over campaign results.

pub mod analysis;
pub mod campaign;
pub mod error;
pub mod plants;
pub mod signals;
pub mod spectral;

pub use error::{Error, Result};
