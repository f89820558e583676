//! Sharp modulus of uniform convexity of `L^p` through Bellman functions.
//!
//! The Bellman function of the modulus problem is the minimal concave
//! function on the moment cone `Λ` dominating its boundary data. This crate
//! computes the modulus in closed and implicit form, builds the
//! tangent-plane majorants that certify it, and reproduces the Bellman
//! function from below with two independent oracles: a brute-force search
//! over step functions and an LP concavification of sampled boundary data.

pub mod bellman;
pub mod certificates;
pub mod domain;
pub mod envelope;
pub mod moduli;
pub mod numerics;

pub use domain::{BoundaryFace, BoundaryProfile, Exponent, LambdaPoint, Theta};
pub use moduli::{ModulusQuery, SStar};
