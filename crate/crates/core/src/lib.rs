//! Analysis of planar mass-action reaction networks.
//!
//! A reaction network lives on two species, so every complex is a point
//! `(a, b)` in the plane and the mass-action differential equation is a sum
//! of monomial terms. This crate computes:
//!
//! * structural invariants: deficiency, linkage classes, weak reversibility
//!   ([`network`]),
//! * existence and location of the unique positive equilibrium, plus the
//!   rescaling that moves it to `(1, 1)` ([`equilibrium`]),
//! * Jacobian data, Taylor expansions and focal values `L1..L4` at a weak
//!   focus ([`local`]),
//! * global tests that exclude or force periodic orbits: monomial
//!   Bendixson-Dulac search, reversibility detection, the Lienard center
//!   identity ([`global`]),
//! * numerical dynamics: adaptive integration restricted to the open positive
//!   quadrant, Poincare return maps and limit-cycle detection ([`dynamics`]).
//!
//! The built-in parameterized families used throughout the test suite live in
//! [`families`].
//!
//! ```
//! use crn_planar::network::parse_network;
//!
//! let net = parse_network(
//!     "0 1 -> 1 0 @ 1\n1 0 -> 1 2 @ 1\n1 2 -> 0 3 @ 1\n0 3 -> 0 1 @ 1",
//! )
//! .unwrap();
//! assert_eq!(net.deficiency(), 1);
//! assert!(net.reversibility_class().weakly_reversible);
//! ```

pub mod dynamics;
pub mod equilibrium;
pub mod families;
pub mod field;
pub mod global;
pub mod local;
pub mod network;

pub use equilibrium::{Equilibrium, ScaledSystem};
pub use field::VectorField;
pub use local::{FocalValues, JacobianData, TaylorField};
pub use network::{Complex, Reaction, ReactionNetwork};
