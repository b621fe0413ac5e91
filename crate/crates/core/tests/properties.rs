use proptest::prelude::*;
use std::sync::Arc;
use tilenet::discrepancy::{
    bk_scan, e_alpha, layer_decomposition, laczkovich_scan, polyomino_windows, CellCounts,
    MasterPatch, SafeRegion, SquareSampler,
};
use tilenet::geometry::{contains_point, CubeUnion, Rect, Vec2, Window, COORD_TOL};
use tilenet::io::{format_rule, net_from_csv, net_to_csv, parse_rule};
use tilenet::net::extract_net;
use tilenet::spectral::analyze_rule;
use tilenet::subst::{chair, penrose, supertile, Hierarchy, SubstitutionRule};

fn rules() -> [Arc<SubstitutionRule>; 2] {
    [Arc::new(penrose()), Arc::new(chair())]
}

fn lattice(n: i64) -> Vec<Vec2> {
    (0..n)
        .flat_map(|i| (0..n).map(move |j| Vec2::new(i as f64 + 0.5, j as f64 + 0.5)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn counts_follow_the_matrix(r in 0usize..2, i in 0usize..2, m in 0u32..8) {
        let rule = &rules()[r];
        let i = i % rule.n();
        let (a, _) = analyze_rule(rule).unwrap();
        let p = supertile(rule, i, m).unwrap();
        let expect: Vec<u64> = a.column_of_power(i, m).unwrap().into_iter().map(|x| x as u64).collect();
        prop_assert_eq!(p.count_types(), expect);
        // area is conserved by inflation
        let area = rule.areas()[i] * rule.xi().powi(2 * m as i32);
        prop_assert!((p.total_area() - area).abs() <= 1e-9 * area);
    }

    #[test]
    fn net_points_lie_in_their_tiles(r in 0usize..2, m in 1u32..6) {
        let rule = &rules()[r];
        let p = supertile(rule, 0, m).unwrap();
        let net = extract_net(&p).unwrap();
        prop_assert_eq!(net.len(), p.len());
        for (k, q) in net.points().iter().enumerate() {
            prop_assert!(contains_point(&p.polygon(k), *q, COORD_TOL));
        }
    }

    #[test]
    fn lattice_squares_are_exact(x in 0i64..40, y in 0i64..40, e in 1i64..24) {
        let net = tilenet::net::NetWindow::from_points(lattice(64)).unwrap();
        let w = Window::new(Vec2::new(x as f64, y as f64), e as f64);
        prop_assert_eq!(e_alpha(&w, &net, 1.0, None).unwrap(), 1.0);
        let counts = CellCounts::new(net.points(), Vec2::ZERO);
        prop_assert_eq!(counts.count_square(x, y, e), (e * e) as u64);
    }

    #[test]
    fn layers_partition_the_union(seed in 0u64..1000, cells in 50usize..600) {
        let rule = Arc::new(chair());
        let h = Hierarchy::build(&rule, 0, 6).unwrap();
        let shape = tilenet::discrepancy::random_polyomino(cells, seed);
        let b = shape.bounds().unwrap();
        let u = shape.translate(40 - b.min.x as i64, 40 - b.min.y as i64);
        let d = layer_decomposition(&u, &h, 0, 1.0 / 3.0);
        prop_assert!(d.partition_error < 1e-9);
        // every layer tile is counted exactly
        for l in &d.layers {
            prop_assert!((l.count as f64 - l.area / 3.0).abs() < 1e-9);
        }
    }
}

#[test]
fn chair_squares_vs_lattice() {
    // density scales with the inverse square of the factor
    let rule = Arc::new(chair());
    let master = MasterPatch::new(&rule, 0, 7, 3f64.sqrt(), 1.0 / 3.0).unwrap();
    assert!((master.alpha - 1.0 / 9.0).abs() < 1e-15);
    let rep = bk_scan(&master.net, master.alpha, &master.safe, 4..=6, &SquareSampler::new(1)).unwrap();
    assert!(rep.per_scale.iter().all(|s| s.max_e >= 1.0));
}

#[test]
fn net_csv_reproduces_statistics() {
    let rule = Arc::new(penrose());
    let (_, r) = analyze_rule(&rule).unwrap();
    let master = MasterPatch::new(&rule, 0, 8, 3.0, r.alpha).unwrap();
    let back = net_from_csv(&net_to_csv(&master.net).unwrap()).unwrap();
    assert_eq!(back.points(), master.net.points());
    assert_eq!(back.tile_ids(), master.net.tile_ids());
    assert_eq!(back.provenance, master.net.provenance);

    let sampler = SquareSampler::new(3);
    let a = bk_scan(&master.net, master.alpha, &master.safe, 2..=5, &sampler).unwrap();
    let b = bk_scan(&back, master.alpha, &master.safe, 2..=5, &sampler).unwrap();
    assert_eq!(a, b);

    let c = master.safe.largest_square().unwrap().center();
    let windows = polyomino_windows(20, 10, 500, &master.safe, c, 5).unwrap();
    let la = laczkovich_scan(&windows, &master.net, master.alpha, Some(&master.safe)).unwrap();
    let lb = laczkovich_scan(&windows, &back, master.alpha, Some(&master.safe)).unwrap();
    assert_eq!(la, lb);
}

#[test]
fn rule_text_round_trip() {
    for rule in rules() {
        let text = format_rule(&rule);
        let back = parse_rule(&text).unwrap();
        assert_eq!(format_rule(&back), text);
        assert_eq!(back.areas(), rule.areas());
    }
}

#[test]
fn safe_region_excludes_the_rim() {
    let rule = Arc::new(penrose());
    let h = Hierarchy::build(&rule, 0, 7).unwrap();
    let safe = SafeRegion::of_hierarchy(&h);
    let w = safe.largest_square().unwrap();
    assert!(safe.contains_window(&w));
    let outer = Rect::new(w.corner - Vec2::new(1e3, 1e3), w.corner + Vec2::new(1e3, 1e3));
    assert!(!safe.contains_rect(&outer));
    let u = CubeUnion::block(0, 0, 1, 1).translate(-10_000, -10_000);
    assert!(!safe.contains_cells(&u));
}
