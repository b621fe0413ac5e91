use super::safe::SafeRegion;
use crate::error::{Error, Result};
use crate::net::{extract_net, NetWindow, Provenance};
use crate::subst::{Hierarchy, SubstitutionRule};
use std::sync::Arc;

/// A master supertile in the frame used for counting: its hierarchy, safe
/// region and net, all multiplied by `scale`, and the density in that frame.
#[derive(Debug, Clone)]
pub struct MasterPatch {
    pub hierarchy: Hierarchy,
    pub safe: SafeRegion,
    pub net: NetWindow,
    pub scale: f64,
    /// Points per unit area after scaling, `α / scale²`.
    pub alpha: f64,
}

impl MasterPatch {
    /// `alpha` is the density of the unscaled net.
    pub fn new(
        rule: &Arc<SubstitutionRule>,
        root_type: usize,
        level: u32,
        scale: f64,
        alpha: f64,
    ) -> Result<Self> {
        let hierarchy = Hierarchy::build(rule, root_type, level)?.scaled(scale);
        let safe = SafeRegion::of_hierarchy(&hierarchy);
        let net = extract_net(&hierarchy.patch(0))?.with_provenance(Provenance {
            rule: rule.name().to_string(),
            root_type: root_type + 1,
            root_level: level,
        });
        Ok(MasterPatch {
            hierarchy,
            safe,
            net,
            scale,
            alpha: alpha / (scale * scale),
        })
    }

    /// Scale for dyadic squares up to `2^jmax`: the largest safe square of the
    /// unscaled root, enlarged to `fit · 2^jmax` when smaller.
    pub fn bk_scale(rule: &Arc<SubstitutionRule>, root_type: usize, level: u32, jmax: u32, fit: f64) -> Result<f64> {
        let h = Hierarchy::build(rule, root_type, level)?;
        let edge = SafeRegion::of_hierarchy(&h)
            .largest_square()
            .ok_or(Error::WindowTooSmall((1u64 << jmax) as f64))?
            .edge;
        Ok((fit * (1u64 << jmax) as f64 / edge).max(1.0))
    }

    /// Scale making the smallest tile inradius equal to one.
    pub fn unit_inradius_scale(rule: &SubstitutionRule) -> f64 {
        1.0 / rule.min_inradius()
    }
}
