use geomac::asymptotics::{
    alpha_inf_range, alpha_inf_table, beta_inf_range, beta_inf_table, tail_estimate, voronoi_limit_check,
    write_table_csv, LatticeSumConfig,
};
use geomac::reception::TracerConfig;
use geomac::{Error, Extent, GridKind, GridSpec};

#[test]
fn large_threshold_table() {
    let rows = beta_inf_table(4.0, 200.0).unwrap();
    let frozen = [0.6382312847758856, 0.5549049206477018, 0.40945227124904443, 0.6098562136804786, 0.6448444357772937];
    let printed = [0.638232, 0.554905, 0.409452, 0.609856, 0.644845];
    for ((row, f), p) in rows.iter().zip(frozen).zip(printed) {
        assert!((row.value - f).abs() < 1e-9, "{row:?}");
        assert!((row.value - p).abs() < 1e-3);
    }
    // triangular > square > hexagonal > rect 1:2 > rect 1:4
    let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
    assert!(v[4] > v[0] && v[0] > v[3] && v[3] > v[1] && v[1] > v[2]);
}

#[test]
fn large_threshold_single_entries() {
    for (spec, want) in [
        (GridSpec::square(25.0), 0.638232),
        (GridSpec::triangular(3.0), 0.644845),
        (GridSpec::rectangular(1.0, 1.0, 4.0), 0.409452),
    ] {
        let s = beta_inf_range(&LatticeSumConfig::new(spec, 4.0)).unwrap();
        assert!((s.value - want).abs() < 1e-4, "{:?}: {}", spec.kind, s.value);
        assert!((s.interference - (s.direct + s.tail)).abs() < 1e-12);
    }
}

#[test]
fn large_exponent_table() {
    let rows = alpha_inf_table().unwrap();
    let want = [
        std::f64::consts::FRAC_1_SQRT_2,
        0.5 * (1.25f64 / 0.5).sqrt(),
        0.5 * (1.0625f64 / 0.25).sqrt(),
        2.0 / (3.0 * 3f64.sqrt()).sqrt(),
        (2.0 / (3.0 * 3f64.sqrt())).sqrt(),
    ];
    for (row, w) in rows.iter().zip(want) {
        assert!((row.value - w).abs() < 1e-15, "{row:?}");
    }
    assert!((rows[1].value - 0.7906).abs() < 1e-4);
    assert!((rows[3].value - 0.8774).abs() < 1e-4);
    assert!(alpha_inf_range(GridKind::Rectangular, 0.0, 1.0).is_err());
}

#[test]
fn doubling_the_radius_stays_within_the_tail_bound() {
    for spec in [GridSpec::square(1.0), GridSpec::hexagonal(1.0), GridSpec::rectangular(1.0, 1.0, 4.0)] {
        for alpha in [3.0, 4.0, 6.0] {
            let r = 200.0;
            let a = beta_inf_range(&LatticeSumConfig { truncation_radius: r, ..LatticeSumConfig::new(spec, alpha) })
                .unwrap();
            let b = beta_inf_range(&LatticeSumConfig {
                truncation_radius: 2.0 * r,
                ..LatticeSumConfig::new(spec, alpha)
            })
            .unwrap();
            assert!((b.interference - a.interference).abs() < tail_estimate(r, alpha), "{:?} {alpha}", spec.kind);
            assert!((b.direct - a.direct) > 0.0);
        }
    }
}

#[test]
fn richardson_levels_agree_with_plain_sum() {
    let spec = GridSpec::triangular(1.0);
    let plain = beta_inf_range(&LatticeSumConfig::new(spec, 3.0)).unwrap();
    let extra = beta_inf_range(&LatticeSumConfig { richardson_levels: 2, ..LatticeSumConfig::new(spec, 3.0) }).unwrap();
    assert!((plain.value - extra.value).abs() < 1e-5, "{} vs {}", plain.value, extra.value);
}

#[test]
fn flatter_rectangles_have_smaller_limits() {
    let mut prev = f64::INFINITY;
    for k2 in [1.0, 1.5, 2.0, 3.0, 4.0, 6.0] {
        let s = beta_inf_range(&LatticeSumConfig::new(GridSpec::rectangular(1.0, 1.0, k2), 4.0)).unwrap();
        assert!(s.value < prev, "k2 {k2}");
        prev = s.value;
    }
}

#[test]
fn invalid_sums() {
    assert!(matches!(
        beta_inf_range(&LatticeSumConfig::new(GridSpec::square(1.0), 2.0)),
        Err(Error::DivergentSum { .. })
    ));
    let short = LatticeSumConfig { truncation_radius: 50.0, ..LatticeSumConfig::new(GridSpec::square(1.0), 4.0) };
    assert!(beta_inf_range(&short).is_err());
}

#[test]
fn voronoi_limits_at_large_exponent() {
    for spec in [
        GridSpec::square(1.0),
        GridSpec::triangular(1.0),
        GridSpec::rectangular(1.0, 1.0, 2.0),
        GridSpec::hexagonal(1.0),
    ] {
        let rep = voronoi_limit_check(&spec, 100.0, Extent::new(8.0).unwrap(), &TracerConfig::default()).unwrap();
        assert!(rep.rel_deviation.abs() < 0.02, "{rep:?}");
    }
    assert!(voronoi_limit_check(&GridSpec::square(1.0), 20.0, Extent::new(8.0).unwrap(), &TracerConfig::default())
        .is_err());
}

#[test]
fn table_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_table_csv(&alpha_inf_table().unwrap(), &path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pattern,k1_over_k2,value"));
    assert_eq!(lines.next(), Some("square,1,0.7071067811865476"));
    assert_eq!(lines.count(), 4);
}
