//! Symbolic-numeric engine for Jacobi structures on coordinate charts of
//! low-dimensional Lie groups.
//!
//! The library builds exact expression trees over chart coordinates and
//! parameters, an exterior algebra of multivector fields with two
//! independent Schouten-Nijenhuis bracket implementations, Jacobi-structure
//! verification and Hamiltonian mechanics on top of it, time-dependent Lie
//! systems with structure-constant recovery and RK4 integration, and a
//! versioned catalog of two- and three-dimensional structures with worked
//! example systems.
//!
//! Identities are decided probabilistically: seeded sampling on boxes that
//! respect every component's domain, with witnesses on failure.

pub mod catalog;
pub mod error;
pub mod expr;
pub mod jacobi;
pub mod liesys;
pub mod multivec;

pub use error::{Error, Result};
pub use expr::{Exclusion, Expression, ParseCtx, Point, Rational, SamplingBox, ZeroTest};
pub use jacobi::{JacobiStructure, VerificationReport};
pub use liesys::{LieSystemSpec, StructureConstants, Trajectory};
pub use multivec::{Chart, ChartRef, MultiVectorField, OneForm};
