//! Substitution rules over polygonal basic tiles, and patch generation by
//! iterated inflation.

pub mod builtin;
mod isometry;
mod patch;
mod rule;
mod validate;

pub use builtin::{builtin, chair, penrose, BUILTIN_NAMES, PHI};
pub use isometry::{Isometry, Orientation, FIT_TOL};
pub use patch::{
    inflate, inflate_with_limit, supertile, supertile_with_limit, Address, Hierarchy, Patch,
    PlacedTile, TileIndex, DEFAULT_CAPACITY,
};
pub use rule::{BasicTile, Child, SubstitutionRule};
pub use validate::{validate_rule, AreaResidual, Overlap, ValidationReport, AREA_TOL};
