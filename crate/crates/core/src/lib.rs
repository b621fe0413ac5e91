//! Primitive substitution tilings of the plane, their separated nets, and
//! empirical checks of lattice equivalence: spectral constants, counting
//! discrepancy on squares and cube unions, and bounded-displacement
//! matchings to a scaled integer lattice.

pub mod discrepancy;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod matching;
pub mod net;
pub mod seeding;
pub mod spectral;
pub mod subst;

pub use error::{Error, Result};
