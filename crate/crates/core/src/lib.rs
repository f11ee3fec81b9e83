//! Numerical verification toolkit for Hardy-inequality weights built from
//! iterated logarithms.
//!
//! The crate discretizes weighted operators `(1/W)P` on radially reducible
//! domains with conforming P1 elements, bounds their spectra from below via
//! Sylvester inertia, and certifies essential-spectrum points from above with
//! explicit Weyl quasimodes.

pub mod criteria;
pub mod discretize;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod jet;
pub mod measures;
pub mod quad;
pub mod quasimode;
pub mod report;
pub mod scenarios;
pub mod xlog;

pub use error::{Error, Result};
