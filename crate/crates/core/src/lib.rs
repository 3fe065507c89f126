//! Analytical model and Monte Carlo simulator for an M2M access protocol in
//! which machine-type devices (MTDs) reserve mini-slots with framed slotted
//! ALOHA, hand their packets to a cellular user over D2D links, and the user
//! trunks the aggregate to the base station under truncated channel
//! inversion power control.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: configuration, unit conversion and frame layout.
//! * [`occupancy`]: distribution of singly occupied mini-slots.
//! * [`link`]: fading, SNR, Shannon rate inversion, TCI and `E1`.
//! * [`analytics`]: closed-form protocol metrics.
//! * [`sim`]: deterministic parallel Monte Carlo replication.
//! * [`cli`]: sweeps, CSV output, validation and SVG plots.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod link;
pub mod occupancy;
pub mod params;
pub mod sim;

pub use error::{Error, Result};
pub use params::{build_params, frame_layout, AccessMode, FrameLayout, RawConfig, SystemParams};
