//! Constructive synthesis of feedforward networks with Sobolev certificates.
//!
//! Everything here is training-free. Networks are built by writing down
//! explicit weights: two-layer gadgets that realize monomials, products and
//! approximate identities from finite differences of a smooth activation,
//! partition-of-unity bump families from shifted activation pairs, and a
//! localization pipeline that stitches per-patch Taylor polynomials into a
//! single network approximating a target function in W^{k,p} on the unit
//! cube. Each stage returns a certificate with measured (not just claimed)
//! error bounds, so the classical approximation-rate statements can be
//! checked empirically: network size against the predicted complexity
//! exponent, weight magnitudes against their growth exponent, and the
//! rounded weights against a finite codebook whose bit length matches the
//! entropy argument.
//!
//! The crate is `no_std`-compatible (with `alloc`); all transcendentals go
//! through `libm` so results are identical with and without `std`.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod act;
pub mod codec;
pub mod corpus;
pub mod error;
pub mod gadgets;
pub mod jet;
pub mod localize;
pub mod math;
pub mod metrics;
pub mod net;
pub mod pu;

pub use act::{Activation, ActivationClass, AdmissibilityReport};
pub use error::Error;
pub use net::{Layer, Network, NetworkStats};
