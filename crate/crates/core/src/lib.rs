//! A deterministic laboratory for prime constellations built on the
//! `N = 2n + 3m` generator: structural primality, window certification by a
//! composite signal over a prime basis, exact residue-class correlations,
//! Fourier checks of the local survival functions and reproduction of the
//! associated numerical tables.

pub mod arith;
pub mod constellation;
pub mod correlation;
pub mod diophantine;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod signal;
pub mod sum;

pub use constellation::{Constellation, DensityConstants};
pub use diophantine::{canonical_seed, structural_is_prime, CanonicalSeed, Gear};
pub use error::{Error, Result};
pub use signal::{
    build_basis, certify, composite_signal, CertifiedResult, HitRule, SieveBasis, SignalTrace,
    Window,
};
