//! Counting discrepancy of a net against its density: Burago–Kleiner ratios
//! on dyadic squares, Laczkovich ratios on unions of unit cells, per-tile
//! discrepancy and the greedy layer partition of a cell union.

mod laczkovich;
mod layers;
mod master;
mod safe;
mod squares;
mod tiles;

pub use laczkovich::{
    binned_maxima, laczkovich_ratio, laczkovich_ratio_for_net, laczkovich_scan, polyomino_windows,
    random_polyomino, CellBins, LaczkovichReport, WindowRatio,
};
pub use layers::{layer_decay_rate, layer_decomposition, Layer, LayerDecomposition};
pub use master::MasterPatch;
pub use safe::SafeRegion;
pub use squares::{
    admissible_corners, alignment_sweep, bk_scan, e_alpha, e_alpha_sup, e_ratio, AlignmentStat,
    BkReport, CellCounts, ScaleStat, SquareSampler, DEFAULT_MAX_SQUARES,
};
pub use tiles::{signed_tile_discrepancy, tile_discrepancy, tile_series, TileSeries};
