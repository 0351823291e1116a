//! Numerical laboratory for the GUE-perturbed discrete torus.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::needless_range_loop)]

pub mod error;
pub mod field;
pub mod fourier_diagnostic;
pub mod free_convolution;
pub mod gaussian_wave;
pub mod lab;
pub mod measure;
pub mod quad;
pub mod random_matrix;
pub mod resolvent_flow;
pub mod seed;
pub mod spectral_density;
pub mod stats;
pub mod torus_spectrum;

pub use error::{LabError, Result};
