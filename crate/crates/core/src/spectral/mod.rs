//! Substitution matrices, Perron–Frobenius data, density constants and the
//! eigen-decay probes.

mod eigen;
mod matrix;
mod probe;

pub use eigen::{
    characteristic_polynomial, perron_data, polynomial_roots, SpectralReport, MAX_ITERATIONS,
};
pub use matrix::{is_primitive, substitution_matrix, SubstMatrix};
pub use probe::{
    check_xi_consistency, decay_probe, envelope_constant, fit_c2_empirical, predict_patch_stats,
    DecayProbe, PatchPrediction, XiConsistency,
};

use crate::error::Result;
use crate::subst::SubstitutionRule;

/// Matrix and spectral report of a rule with the default slack.
pub fn analyze_rule(rule: &SubstitutionRule) -> Result<(SubstMatrix, SpectralReport)> {
    let a = substitution_matrix(rule);
    let report = perron_data(&a, &rule.areas(), None)?;
    Ok((a, report))
}
