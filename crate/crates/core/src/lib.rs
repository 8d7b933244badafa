//! Bath engineering of a driven transmon behind a microwave photonic crystal.
//!
//! A transmission-line model of the stepped-impedance filter sets the density
//! of states seen by the qubit. The qubit's dressed-state master equation then
//! samples that density at the Mollow sidebands.

pub mod config;
pub mod dos;
pub mod dressed;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lindblad;
pub mod network;
pub mod table;
pub mod tomography;

pub use error::{Error, Result};
