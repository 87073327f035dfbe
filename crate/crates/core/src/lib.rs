//! Hybrid analog-digital precoding for mmWave MIMO with models of the
//! microwave network that realizes the analog stage.
//!
//! The crate is organized bottom-up: [`channel`] draws clustered
//! channels, [`rfpn`] builds the divider / phase-shifter / combiner
//! networks, [`precoding`] designs precoders on top of them, [`metrics`]
//! scores them and [`harness`] runs seeded Monte Carlo sweeps.

pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod precoding;
pub mod rfpn;

pub use error::{Error, Result};
pub use harness::{derive_seed, run_sweep, run_trial, RateCurve, RatePoint, SimConfig, Simulator, SweepResult};
pub use precoding::{Method, Precoder};
