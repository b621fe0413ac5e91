//! Rule files, CSV tables, SVG rendering and TOML reports.

mod expr;
mod rulefile;
mod svg;
mod tables;

pub use expr::eval_expr;
pub use rulefile::{format_rule, parse_rule, parse_rule_file};
pub use svg::{render_match, render_net, render_patch, render_svg, Scene, SvgStyle};
pub use tables::{
    match_pairs_from_csv, match_to_csv, net_from_csv, net_to_csv, patch_from_csv, patch_to_csv,
    rows_to_csv,
};

use crate::error::{Error, Result};
use serde::Serialize;

/// Serializes a report as TOML.
pub fn to_toml<T: Serialize>(report: &T) -> Result<String> {
    toml::to_string(report).map_err(|e| Error::Io(format!("toml: {e}")))
}
