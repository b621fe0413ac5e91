//! Bottleneck matching between a net and a scaled square lattice.
//!
//! The threshold graph for a candidate distance `t` joins every net point to
//! every lattice point within `t`. Feasibility of `t` means a matching exists
//! that covers all mandatory points on both sides; the optimum is the least
//! feasible pairwise distance, found by binary search.

use crate::discrepancy::SafeRegion;
use crate::error::{Error, Result};
use crate::fit::log_log_slope;
use crate::geometry::{bbox, GridIndex, Vec2, Window, COORD_TOL};
use crate::net::{extract_net, NetWindow};
use crate::subst::{Hierarchy, SubstitutionRule};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;
use std::sync::Arc;

const NONE: u32 = u32::MAX;

/// Points `corner + phase + β(i, j)` inside the closed window.
pub fn lattice_points_anchored(beta: f64, w: &Window, phase: Vec2) -> Vec<Vec2> {
    assert!(beta > 0.0, "lattice scale must be positive");
    let origin = w.corner + phase;
    let r = w.rect();
    let i0 = ((r.min.x - origin.x - COORD_TOL) / beta).ceil() as i64;
    let i1 = ((r.max.x - origin.x + COORD_TOL) / beta).floor() as i64;
    let j0 = ((r.min.y - origin.y - COORD_TOL) / beta).ceil() as i64;
    let j1 = ((r.max.y - origin.y + COORD_TOL) / beta).floor() as i64;
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = origin + Vec2::new(i as f64 * beta, j as f64 * beta);
            if w.contains(p, COORD_TOL) {
                out.push(p);
            }
        }
    }
    out
}

/// Points of `βZ²` inside the closed window.
pub fn lattice_points(beta: f64, w: &Window) -> Vec<Vec2> {
    lattice_points_anchored(beta, w, Vec2::ZERO - w.corner)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    /// `(net point, lattice point)`, ordered by net index.
    pub pairs: Vec<(Vec2, Vec2)>,
    /// Indices behind `pairs`.
    pub indices: Vec<(usize, usize)>,
    pub bottleneck: f64,
    pub unmatched_net: usize,
    pub unmatched_lattice: usize,
    pub window_edge: f64,
    pub beta: Option<f64>,
}

impl MatchResult {
    pub fn displacements(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|(a, b)| a.dist(*b))
    }
}

struct Csr {
    start: Vec<u32>,
    adj: Vec<u32>,
}

impl Csr {
    fn new(n: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) -> Csr {
        let mut start = vec![0u32; n + 1];
        for (a, _) in edges.clone() {
            start[a as usize + 1] += 1;
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut adj = vec![0u32; *start.last().unwrap() as usize];
        for (a, b) in edges {
            adj[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
        }
        Csr { start, adj }
    }

    fn row(&self, u: usize) -> &[u32] {
        &self.adj[self.start[u] as usize..self.start[u + 1] as usize]
    }
}

/// Layered augmenting phases from free sources with `active` set. A target is
/// terminal when free, or when `release` is given and its mate is not flagged
/// there; in the latter case that mate is unmatched by the flip.
fn augment(
    g: &Csr,
    mate_s: &mut [u32],
    mate_t: &mut [u32],
    active: &[bool],
    release: Option<&[bool]>,
) {
    let n = mate_s.len();
    let terminal = |w: u32| w == NONE || release.is_some_and(|keep| !keep[w as usize]);
    let mut dist = vec![u32::MAX; n];
    let mut it = vec![0u32; n];
    let mut via = vec![NONE; n];
    loop {
        let mut queue = VecDeque::new();
        for u in 0..n {
            if active[u] && mate_s[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &t in g.row(u) {
                let w = mate_t[t as usize];
                if terminal(w) {
                    found = true;
                } else if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u] + 1;
                    queue.push_back(w as usize);
                }
            }
        }
        if !found {
            return;
        }
        for u in 0..n {
            it[u] = g.start[u];
        }
        let mut augmented = 0;
        for root in 0..n {
            if !(active[root] && mate_s[root] == NONE) || dist[root] != 0 {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&u) = stack.last() {
                if it[u] < g.start[u + 1] {
                    let t = g.adj[it[u] as usize];
                    it[u] += 1;
                    let w = mate_t[t as usize];
                    if terminal(w) {
                        if w != NONE {
                            mate_s[w as usize] = NONE;
                        }
                        via[u] = t;
                        for &s in &stack {
                            let t = via[s];
                            mate_s[s] = t;
                            mate_t[t as usize] = s as u32;
                        }
                        for &s in &stack {
                            dist[s] = u32::MAX;
                        }
                        augmented += 1;
                        break;
                    } else if dist[w as usize] == dist[u].wrapping_add(1) {
                        via[u] = t;
                        stack.push(w as usize);
                    }
                } else {
                    dist[u] = u32::MAX;
                    stack.pop();
                }
            }
        }
        if augmented == 0 {
            return;
        }
    }
}

struct Feasible {
    mate_l: Vec<u32>,
    mate_r: Vec<u32>,
}

struct Threshold<'a> {
    net: &'a [Vec2],
    lat: &'a GridIndex,
    must_l: &'a [bool],
    must_r: &'a [bool],
}

impl Threshold<'_> {
    /// Left-to-right adjacency of pairs within `t`.
    fn graph(&self, t: f64) -> (Csr, Csr) {
        let rows: Vec<Vec<u32>> = self
            .net
            .par_iter()
            .map(|&p| {
                let mut v: Vec<u32> = self.lat.within(p, t).into_iter().map(|j| j as u32).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let pairs = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&j| (i as u32, j)));
        let lr = Csr::new(self.net.len(), pairs.clone());
        let rl = Csr::new(self.must_r.len(), pairs.map(|(i, j)| (j, i)));
        (lr, rl)
    }

    /// Matching within `t` covering both mandatory sets, if one exists.
    fn feasible(&self, t: f64) -> Option<Feasible> {
        let (nl, nr) = (self.must_l.len(), self.must_r.len());
        let (lr, rl) = self.graph(t);
        let mut mate_l = vec![NONE; nl];
        let mut mate_r = vec![NONE; nr];
        augment(&lr, &mut mate_l, &mut mate_r, self.must_l, None);
        if (0..nl).any(|i| self.must_l[i] && mate_l[i] == NONE) {
            return None;
        }
        augment(&rl, &mut mate_r, &mut mate_l, self.must_r, Some(self.must_r));
        if (0..nr).any(|j| self.must_r[j] && mate_r[j] == NONE) {
            return None;
        }
        debug_assert!((0..nl).all(|i| !self.must_l[i] || mate_l[i] != NONE));
        let all = vec![true; nl];
        augment(&lr, &mut mate_l, &mut mate_r, &all, None);
        Some(Feasible { mate_l, mate_r })
    }

    /// Sorted distinct pair distances in `(lo, hi]`.
    fn distances_between(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut d: Vec<f64> = self
            .net
            .par_iter()
            .flat_map_iter(|&p| {
                self.lat
                    .within(p, hi)
                    .into_iter()
                    .map(move |j| p.dist(self.lat.points()[j]))
                    .filter(move |&d| d > lo && d <= hi)
            })
            .collect();
        d.par_sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        d.dedup();
        d
    }
}

const GROWTH: f64 = 1.25;

/// Minimum-bottleneck matching covering every point flagged in `must_net`
/// and `must_lattice`, extended to a maximum matching of the optimal
/// threshold graph. Only pairs within `cap` are considered.
pub fn bottleneck_match_constrained(
    net: &[Vec2],
    lattice: &[Vec2],
    must_net: &[bool],
    must_lattice: &[bool],
    cap: f64,
) -> Result<MatchResult> {
    assert_eq!(must_net.len(), net.len());
    assert_eq!(must_lattice.len(), lattice.len());
    let edge = window_edge_of(net, lattice);
    if net.is_empty() || lattice.is_empty() {
        if must_net.iter().chain(must_lattice).any(|&m| m) {
            return Err(Error::NoPerfectMatchingUnderCap(cap));
        }
        return Ok(MatchResult {
            pairs: Vec::new(),
            indices: Vec::new(),
            bottleneck: 0.0,
            unmatched_net: net.len(),
            unmatched_lattice: lattice.len(),
            window_edge: edge,
            beta: None,
        });
    }
    let bucket = (edge / (net.len().max(lattice.len()) as f64).sqrt()).max(COORD_TOL);
    let lat_index = GridIndex::new(lattice, bucket);
    let net_index = GridIndex::new(net, bucket);
    // every mandatory point needs at least its nearest neighbour
    let lb_net = (0..net.len())
        .filter(|&i| must_net[i])
        .map(|i| lat_index.nearest(net[i]).map_or(0.0, |(_, d)| d))
        .fold(0.0, f64::max);
    let lb_lat = (0..lattice.len())
        .filter(|&j| must_lattice[j])
        .map(|j| net_index.nearest(lattice[j]).map_or(0.0, |(_, d)| d))
        .fold(0.0, f64::max);
    let th = Threshold {
        net,
        lat: &lat_index,
        must_l: must_net,
        must_r: must_lattice,
    };
    let lb = lb_net.max(lb_lat);
    if lb > cap {
        return Err(Error::NoPerfectMatchingUnderCap(cap));
    }
    // bracket: everything below `lo` is infeasible, `hi` is feasible
    let (mut lo, mut hi) = (f64::NEG_INFINITY, lb);
    let mut best = loop {
        if let Some(f) = th.feasible(hi) {
            break f;
        }
        if hi >= cap {
            return Err(Error::NoPerfectMatchingUnderCap(cap));
        }
        lo = hi;
        hi = (hi * GROWTH).max(bucket).min(cap);
    };
    // the optimum is a pair distance in (lo, hi]
    let cands = th.distances_between(lo, hi);
    if !cands.is_empty() {
        let (mut a, mut b) = (0usize, cands.len() - 1);
        while a < b {
            let mid = (a + b) / 2;
            match th.feasible(cands[mid]) {
                Some(f) => {
                    best = f;
                    b = mid;
                }
                None => a = mid + 1,
            }
        }
    }
    let mut indices = Vec::new();
    for (i, &j) in best.mate_l.iter().enumerate() {
        if j != NONE {
            indices.push((i, j as usize));
        }
    }
    let pairs: Vec<(Vec2, Vec2)> = indices.iter().map(|&(i, j)| (net[i], lattice[j])).collect();
    let bottleneck = pairs.iter().map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);
    Ok(MatchResult {
        unmatched_net: net.len() - indices.len(),
        unmatched_lattice: best.mate_r.iter().filter(|&&m| m == NONE).count(),
        pairs,
        indices,
        bottleneck,
        window_edge: edge,
        beta: None,
    })
}

fn window_edge_of(a: &[Vec2], b: &[Vec2]) -> f64 {
    let pts: Vec<Vec2> = a.iter().chain(b).copied().collect();
    if pts.is_empty() {
        return 0.0;
    }
    let r = bbox(&pts);
    r.width().max(r.height())
}

/// Bottleneck matching that fully matches the smaller side (both sides when
/// equal). `cap` defaults to the diagonal of the bounding square, which
/// admits every pairing.
pub fn bottleneck_match(net: &[Vec2], lattice: &[Vec2], cap: Option<f64>) -> Result<MatchResult> {
    let must_net = vec![net.len() <= lattice.len(); net.len()];
    let must_lat = vec![lattice.len() <= net.len(); lattice.len()];
    let cap = cap.unwrap_or_else(|| window_edge_of(net, lattice) * std::f64::consts::SQRT_2 + COORD_TOL);
    bottleneck_match_constrained(net, lattice, &must_net, &must_lat, cap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMatchOptions {
    pub beta: f64,
    /// Lattice offset from the window corner.
    pub phase: Vec2,
    /// Covering radius of the net, used for the boundary band.
    pub covering_radius: f64,
    /// Defaults to the window edge.
    pub cap: Option<f64>,
}

/// Matches the net points in `w` to the anchored lattice in `w`.
///
/// The smaller side is matched completely. Points of the larger side deeper
/// than `2β + 2R` inside the window must be matched as well, so that surplus
/// is only absorbed near the boundary.
pub fn match_window(net: &NetWindow, w: &Window, opts: &WindowMatchOptions) -> Result<MatchResult> {
    let net_pts: Vec<Vec2> = net
        .index()
        .range(&w.rect().expand(COORD_TOL))
        .into_iter()
        .map(|i| net.points()[i])
        .filter(|&p| w.contains(p, COORD_TOL))
        .collect();
    let lat = lattice_points_anchored(opts.beta, w, opts.phase);
    let band = boundary_band(opts.beta, opts.covering_radius);
    let net_smaller = net_pts.len() <= lat.len();
    let lat_smaller = lat.len() <= net_pts.len();
    let must_net: Vec<bool> = net_pts.iter().map(|&p| net_smaller || w.depth(p) > band).collect();
    let must_lat: Vec<bool> = lat.iter().map(|&p| lat_smaller || w.depth(p) > band).collect();
    let mut r = bottleneck_match_constrained(
        &net_pts,
        &lat,
        &must_net,
        &must_lat,
        opts.cap.unwrap_or(w.edge),
    )?;
    r.window_edge = w.edge;
    r.beta = Some(opts.beta);
    Ok(r)
}

pub fn boundary_band(beta: f64, covering_radius: f64) -> f64 {
    2.0 * beta + 2.0 * covering_radius
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub level: u32,
    pub window: Window,
    pub net_points: usize,
    pub lattice_points: usize,
    pub bottleneck: f64,
    pub unmatched_net: usize,
    pub unmatched_lattice: usize,
    pub covering_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementProfile {
    pub rule: String,
    /// 1-based.
    pub root_type: usize,
    pub beta: f64,
    pub phase: Vec2,
    pub rows: Vec<ProfileRow>,
    /// Log-log slope of bottleneck against window edge.
    pub exponent: Option<f64>,
}

/// For each level, matches the net of the level-`m` supertile inside its
/// largest safe square against the lattice and fits the growth exponent.
pub fn displacement_profile(
    rule: &Arc<SubstitutionRule>,
    root_type: usize,
    levels: &[u32],
    beta: f64,
    phase: Vec2,
    cap: Option<f64>,
) -> Result<DisplacementProfile> {
    let rows: Vec<ProfileRow> = levels
        .par_iter()
        .map(|&m| profile_row(rule, root_type, m, beta, phase, cap))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.window.edge).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.bottleneck).collect();
    Ok(DisplacementProfile {
        rule: rule.name().to_string(),
        root_type: root_type + 1,
        beta,
        phase,
        exponent: log_log_slope(&xs, &ys).map(|f| f.slope),
        rows,
    })
}

fn profile_row(
    rule: &Arc<SubstitutionRule>,
    root_type: usize,
    m: u32,
    beta: f64,
    phase: Vec2,
    cap: Option<f64>,
) -> Result<ProfileRow> {
    match_level(rule, root_type, m, beta, phase, cap).map(|(_, row)| row)
}

/// The matching behind one profile row, with the row itself.
pub fn match_level(
    rule: &Arc<SubstitutionRule>,
    root_type: usize,
    m: u32,
    beta: f64,
    phase: Vec2,
    cap: Option<f64>,
) -> Result<(MatchResult, ProfileRow)> {
    let h = Hierarchy::build(rule, root_type, m)?;
    let safe = SafeRegion::of_hierarchy(&h);
    let w = safe.largest_square().ok_or(Error::WindowTooSmall(0.0))?;
    let net = extract_net(&h.patch(0))?;
    let covering_radius = net.delone_params()?.big_r;
    let r = match_window(
        &net,
        &w,
        &WindowMatchOptions {
            beta,
            phase,
            covering_radius,
            cap,
        },
    )?;
    let row = ProfileRow {
        level: m,
        window: w,
        net_points: r.indices.len() + r.unmatched_net,
        lattice_points: r.indices.len() + r.unmatched_lattice,
        bottleneck: r.bottleneck,
        unmatched_net: r.unmatched_net,
        unmatched_lattice: r.unmatched_lattice,
        covering_radius,
    };
    Ok((r, row))
}

/// Unmatched points of a window matching, split by side, with their depth
/// inside the window.
pub fn unmatched_depths(
    net: &[Vec2],
    lattice: &[Vec2],
    r: &MatchResult,
    w: &Window,
) -> (Vec<f64>, Vec<f64>) {
    let mut used_n = vec![false; net.len()];
    let mut used_l = vec![false; lattice.len()];
    for &(i, j) in &r.indices {
        used_n[i] = true;
        used_l[j] = true;
    }
    let side = |pts: &[Vec2], used: &[bool]| -> Vec<f64> {
        pts.iter()
            .zip(used)
            .filter(|(_, &u)| !u)
            .map(|(&p, _)| w.depth(p))
            .collect()
    };
    (side(net, &used_n), side(lattice, &used_l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(a: &[Vec2], b: &[Vec2]) -> f64 {
        // injective maps from the smaller side
        let (s, l) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        fn go(k: usize, s: &[Vec2], l: &[Vec2], used: &mut Vec<bool>, cur: f64, best: &mut f64) {
            if cur >= *best {
                return;
            }
            if k == s.len() {
                *best = cur;
                return;
            }
            for j in 0..l.len() {
                if !used[j] {
                    used[j] = true;
                    go(k + 1, s, l, used, cur.max(s[k].dist(l[j])), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(0, s, l, &mut vec![false; l.len()], 0.0, &mut best);
        best
    }

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec2> {
        (0..n).map(|_| Vec2::new(rng.gen(), rng.gen())).collect()
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_points(1.0, &Window::new(Vec2::ZERO, 2.0)).len(), 9);
        assert_eq!(lattice_points(0.5, &Window::new(Vec2::ZERO, 1.0)).len(), 9);
        let w = Window::new(Vec2::new(0.3, -0.2), 1.0);
        assert_eq!(lattice_points(1.0, &w).len(), 1);
        assert_eq!(lattice_points_anchored(1.0, &w, Vec2::ZERO).len(), 4);
    }

    #[test]
    fn identical_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random(30, &mut rng);
        let r = bottleneck_match(&p, &p, None).unwrap();
        assert_eq!(r.bottleneck, 0.0);
        assert!(r.indices.iter().all(|&(i, j)| i == j));
    }

    #[test]
    fn shifted_lattice() {
        let w = Window::new(Vec2::ZERO, 10.0);
        let a = lattice_points(1.0, &w);
        let v = Vec2::new(0.2, 0.1);
        let b: Vec<Vec2> = a.iter().map(|&p| p + v).collect();
        let r = bottleneck_match(&a, &b, None).unwrap();
        assert!((r.bottleneck - v.norm()).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let (n, m) = (rng.gen_range(1..=7), rng.gen_range(1..=7));
            let a = random(n, &mut rng);
            let b = random(m, &mut rng);
            let r = bottleneck_match(&a, &b, None).unwrap();
            assert_eq!(r.bottleneck, brute(&a, &b));
            assert_eq!(r.indices.len(), n.min(m));
        }
    }

    #[test]
    fn cap_too_small() {
        let a = vec![Vec2::ZERO];
        let b = vec![Vec2::new(5.0, 0.0)];
        assert!(matches!(
            bottleneck_match(&a, &b, Some(1.0)),
            Err(Error::NoPerfectMatchingUnderCap(_))
        ));
    }

    #[test]
    fn mandatory_larger_side() {
        // 0 ... 1 ... 10: the single lattice point must take the far net point
        let net = vec![Vec2::ZERO, Vec2::new(10.0, 0.0)];
        let lat = vec![Vec2::new(1.0, 0.0)];
        let r = bottleneck_match_constrained(&net, &lat, &[false, true], &[true], 100.0).unwrap();
        assert_eq!(r.indices, vec![(1, 0)]);
        assert_eq!(r.bottleneck, 9.0);
        let r = bottleneck_match(&net, &lat, None).unwrap();
        assert_eq!(r.bottleneck, 1.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_valid(seed in 0u64..10_000, n in 1usize..7, m in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random(n, &mut rng);
            let b = random(m, &mut rng);
            let r = bottleneck_match(&a, &b, None).unwrap();
            let s = bottleneck_match(&b, &a, None).unwrap();
            prop_assert_eq!(r.bottleneck, s.bottleneck);
            let mut seen_a = vec![false; n];
            let mut seen_b = vec![false; m];
            for &(i, j) in &r.indices {
                prop_assert!(!seen_a[i] && !seen_b[j]);
                seen_a[i] = true;
                seen_b[j] = true;
            }
            let max = r.displacements().fold(0.0, f64::max);
            prop_assert_eq!(max, r.bottleneck);
            prop_assert!(n.abs_diff(m) <= r.unmatched_net + r.unmatched_lattice);
            prop_assert!(r.bottleneck <= r.window_edge * std::f64::consts::SQRT_2 + 1e-12);
        }
    }
}
