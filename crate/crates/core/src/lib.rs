//! Schalkwijk-Kailath (SK) joint source-channel coding over the AWGN wiretap
//! channel with noiseless feedback, analysed at finite blocklength.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: Q-function and its inverse, Gaussian capacity, rate-distortion
//!   and dispersion functions, log-determinant mutual information.
//! * [`schemes`]: the classic (zero-forcing) and modified (MMSE-initialised) SK
//!   state machines, exact and simulated excess-distortion probabilities.
//! * [`leakage`]: exact eavesdropper leakage via the linear-Gaussian structure
//!   of the encoders, the `F2` bound and the blocklength searches it drives.
//! * [`bounds`]: lower and upper bounds on the delta-secrecy rate, including the
//!   fully explicit converse condition.
//! * [`verify`]: Monte Carlo checks of the converse machinery (d-tilted
//!   information, information density, MGF and moment identities,
//!   Berry-Esseen containment).
//! * [`config`], [`report`] and [`cli`]: the flat-file sweep configuration, CSV
//!   emission and the subcommand drivers behind the `skfb` binary.
//!
//! All information quantities are in nats.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod leakage;
pub mod numerics;
pub mod report;
pub mod sampling;
pub mod schemes;
pub mod verify;

pub use error::{Error, Result};
pub use schemes::{ChannelParams, SchemeVariant};
