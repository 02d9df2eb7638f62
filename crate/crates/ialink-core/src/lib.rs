//! Link-level model of an interference-aligned underlay cognitive radio
//! network in which an energy-constrained decode-and-forward relay powers
//! itself by splitting the received RF signal between an energy harvester
//! and its information decoder.
//!
//! The crate is `no_std` (with `alloc`) and fully deterministic: every
//! random quantity is drawn from an explicitly seeded counter-derived
//! stream, so results do not depend on scheduling or worker count. The
//! companion CLI crate adds configuration files, CSV output and a thread
//! pool on top of this core.
//!
//! Layout:
//! - [`matrix`]: dense complex linear algebra (multiply, inverse,
//!   eigendecomposition, SVD, null spaces) sized for small MIMO matrices.
//! - [`rng`]: seedable xoshiro256++ streams with Gaussian sampling.
//! - [`channel`]: Rayleigh channel draws with path loss and the
//!   estimated/residual/actual split of the imperfect-CSI model.
//! - [`ia`]: interference-alignment precoders and suppression matrices for
//!   both transmission slots, plus the alignment verifier.
//! - [`link`]: harvested relay power and the per-receiver SINR budgets.
//! - [`ber`]: Gaussian-Q mapping, per-trial semi-analytic BER, Monte Carlo
//!   accumulation and a bit-level validation oracle.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod fp;

pub mod ber;
pub mod channel;
pub mod ia;
pub mod link;
pub mod matrix;
pub mod rng;

pub use matrix::{C64, Matrix};
