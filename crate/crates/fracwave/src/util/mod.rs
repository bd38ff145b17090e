//! Shared numerical utilities: quadrature rules, special functions,
//! interpolation tables, least-squares fits, deterministic RNG, and
//! byte-stable number formatting.

pub mod fitting;
pub mod fmt;
pub mod gauss;
pub mod interp;
pub mod quad;
pub mod rng;
pub mod special;
