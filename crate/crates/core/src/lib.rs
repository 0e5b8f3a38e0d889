//! Biregular irreducible (BRI) functions as security components of modular
//! wiretap codes.
//!
//! The crate builds BRI functions from Ramanujan graph decompositions or
//! from seeded coset hashing in GF(2^ℓ), certifies their regularity and
//! spectral gaps, and evaluates exact leakage and error of the resulting
//! wiretap schemes on small discrete channels together with the matching
//! upper bounds.

pub mod bri;
pub mod channels;
pub mod coset;
pub mod gf2e;
pub mod graphs;
pub mod infodiv;
pub mod spectra;
pub mod wiretap;
