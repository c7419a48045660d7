//! Numerical laboratory for special flows built over irrational circle
//! rotations, with roof functions carrying asymmetric logarithmic
//! singularities.
//!
//! The crate is organized bottom-up:
//!
//! * [`interval`] / [`scalar`] - arbitrary-precision dyadic interval
//!   arithmetic and the exact-or-enclosed scalar type everything else
//!   computes with.
//! * [`numeration`] - continued fractions, convergents, Ostrowski digit
//!   expansions and finite-depth Diophantine classification.
//! * [`circle`] - error-bounded points on the unit circle, rotation
//!   orbits, orbit distances and the named exclusion sets.
//! * [`roof`] - roof functions with logarithmic singularities, Birkhoff
//!   sums and their derivatives.
//! * [`flow`] - the special flow under a roof function: evaluation,
//!   return times, the flow metric and sampling of the roof measure.
//! * [`shear`] - shearing constants, pair classification and the small
//!   and large shearing searches.
//! * [`harness`] - seedable experiment suites with deterministic
//!   reports, plus the fixtures they run on.
//!
//! Exact integer and rational arithmetic is used wherever a quantity is
//! rational in the inputs; logarithms and powers go through outward
//! rounded interval arithmetic so every reported inequality is certified
//! at the stated precision.

pub mod circle;
pub mod flow;
pub mod harness;
pub mod interval;
pub mod numeration;
pub mod roof;
pub mod scalar;
pub mod shear;
pub mod stats;
