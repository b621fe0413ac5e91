use crate::spectral::SubstMatrix;
use serde::Serialize;

/// `#(T ∩ Y) - α μ(T)` for the level-`m` supertile of type `i`, with
/// `#(T ∩ Y) = 1ᵗ Aᵐ e_i` and `μ(T) = ξ^{2m} s_i`. `None` on integer overflow.
pub fn signed_tile_discrepancy(
    a: &SubstMatrix,
    xi: f64,
    areas: &[f64],
    i: usize,
    m: u32,
    alpha: f64,
) -> Option<f64> {
    let counts = a.column_of_power(i, m)?;
    let total: u128 = counts.iter().sum();
    let area = xi.powi(2 * m as i32) * areas[i];
    Some(total as f64 - alpha * area)
}

pub fn tile_discrepancy(
    a: &SubstMatrix,
    xi: f64,
    areas: &[f64],
    i: usize,
    m: u32,
    alpha: f64,
) -> Option<f64> {
    signed_tile_discrepancy(a, xi, areas, i, m, alpha).map(f64::abs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileSeries {
    /// 1-based tile type.
    pub tile: usize,
    pub m: Vec<u32>,
    pub values: Vec<f64>,
    /// `exp` of the fitted log-slope, when every value is positive.
    pub rate: Option<f64>,
}

/// `|d_i(m)|` for `m` in `ms` with the fitted geometric rate.
pub fn tile_series(
    a: &SubstMatrix,
    xi: f64,
    areas: &[f64],
    i: usize,
    ms: &[u32],
    alpha: f64,
) -> TileSeries {
    let values: Vec<f64> = ms
        .iter()
        .map(|&m| tile_discrepancy(a, xi, areas, i, m, alpha).unwrap_or(f64::NAN))
        .collect();
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let rate = if values.iter().all(|&v| v > 0.0) {
        crate::fit::log_slope(&xs, &values).map(|f| f.slope.exp())
    } else {
        None
    };
    TileSeries {
        tile: i + 1,
        m: ms.to_vec(),
        values,
        rate,
    }
}
