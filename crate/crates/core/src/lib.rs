//! Motor-imagery EEG feature extraction, two-stage feature selection and dense-network
//! classification, evaluated leave-one-subject-out.
//!
//! Pipeline: epochs ([`data`]) → band powers ([`spectral`]), Morlet wavelet scores
//! ([`wavelet`]) and time-domain statistics ([`stats`]) → standardization
//! ([`preprocess`]) → mutual-information filter and floating forward search
//! ([`selection`]) → [`mlp`] → [`evaluation`].

pub mod artifact;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod mlp;
pub mod pca;
pub mod preprocess;
pub mod rng;
pub mod selection;
pub mod spectral;
pub mod stats;
pub mod svm;
pub mod synthetic;
pub mod wavelet;

pub use error::{Error, Result};
