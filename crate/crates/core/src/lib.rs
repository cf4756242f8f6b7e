//! Finite-rank superconnection calculus and spectral-cutoff index cocycles.
//!
//! The crate is organized bottom-up:
//!
//! - [`ring`]: a truncated, supercommutative differential graded coefficient
//!   ring (polynomial jets, `dx_i`, auxiliary odd parameters) standing in for
//!   differential forms on a base.
//! - [`clifford`]: Clifford algebras `Cl_{±n}`, their star structures, graded
//!   modules, supertraces and Atiyah–Bott–Shapiro classes.
//! - [`opform`]: endomorphism-valued forms and first-order differential
//!   operators over the ring.
//! - [`funcalc`]: matrix functions of a hermitian body plus a nilpotent
//!   perturbation, via divided differences.
//! - [`superconn`]: superconnections, heat operators, super-semigroup
//!   representations and the structural checks on them.
//! - [`chern`]: Chern forms, transgressions, Pfaffian-section data and the
//!   Witten index.
//! - [`family`]: sampled families over a grid, energy cutoffs, gluing data,
//!   eta forms and differential cocycle assembly.
//! - [`examples`] and [`oracles`]: canonical example families and slow
//!   brute-force reference implementations.

pub mod chern;
pub mod clifford;
pub mod error;
pub mod examples;
pub mod family;
pub mod funcalc;
pub mod json;
pub mod linalg;
pub mod opform;
pub mod oracles;
pub mod quad;
pub mod ring;
pub mod superconn;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use clifford::{AbsClass, AbsGroup, CliffordAlgebra, CliffordElement, GradedCliffordModule};
pub use opform::{DiffOp, OpForm};
pub use ring::{Monomial, RingElement, RingSignature, ScalarField};
pub use superconn::{SemigroupRep, SuperBundle, Superconnection};
