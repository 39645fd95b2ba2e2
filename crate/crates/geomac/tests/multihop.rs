use geomac::multihop::{
    progress, run_simulation, write_hop_log, write_hop_log_csv, write_summary_json, Network, Scheme, SimConfig,
};
use geomac::{ChannelModel, Extent, Fading, GridSpec, Point2};

const SQUARE_R: f64 = 0.33357;

fn grid_cfg(nu: f64, extent: f64, beta: f64) -> SimConfig {
    let model = ChannelModel::no_fading(4.0, beta).unwrap();
    SimConfig::new(nu, Extent::new(extent).unwrap(), Scheme::Grid(GridSpec::square(1.0)), model)
}

#[test]
fn progress_examples() {
    let o = Point2::ORIGIN;
    let dest = Point2::new(10.0, 0.0);
    assert_eq!(progress(o, Point2::new(3.0, 0.0), dest).unwrap(), 3.0);
    assert_eq!(progress(o, Point2::new(0.0, 2.0), dest).unwrap(), 0.0);
    assert!(progress(o, Point2::new(-1.0, 0.5), dest).unwrap() < 0.0);
    let diag = progress(Point2::new(1.0, 1.0), Point2::new(2.0, 2.0), Point2::new(5.0, 5.0)).unwrap();
    assert!((diag - 2f64.sqrt()).abs() < 1e-15);
    assert!(progress(dest, o, dest).is_err());
}

#[test]
fn config_validation() {
    let ok = grid_cfg(10.0, 12.0, 10.0);
    assert!(ok.validate().is_ok());
    assert!(SimConfig { node_density: 0.5, ..ok }.validate().is_err());
    assert!(SimConfig { snap_radius: 0.3, ..ok }.validate().is_err());
    assert!(SimConfig { slots: 0, ..ok }.validate().is_err());
    assert!(SimConfig { packet_distance: 20.0, ..ok }.validate().is_err());
    assert!(Network::new(SimConfig { node_density: 0.5, ..ok }).is_err());
}

#[test]
fn aloha_thinning_fraction() {
    let q = 0.1;
    let model = ChannelModel::no_fading(4.0, 10.0).unwrap();
    let cfg = SimConfig {
        packet_distance: 5.0,
        ..SimConfig::new(1.0, Extent::new(30.0).unwrap(), Scheme::Aloha { lambda: q }, model)
    };
    let net = Network::new(cfg).unwrap();
    let n = net.nodes().len();
    let slots = 20;
    let total: usize = (0..slots).map(|s| net.select_transmitters(s).unwrap().nodes.len()).sum();
    let trials = (n * slots) as f64;
    let se = (q * (1.0 - q) / trials).sqrt();
    assert!((total as f64 / trials - q).abs() < 4.0 * se, "{total} of {trials}");
}

#[test]
fn dense_snapping_reproduces_the_grid_density() {
    let net = Network::new(grid_cfg(400.0, 10.0, 10.0)).unwrap();
    let mut prev: Option<Vec<usize>> = None;
    for slot in 0..4 {
        let sched = net.select_transmitters(slot).unwrap();
        let inner = sched.set.points().iter().filter(|p| p.x.abs() < 8.0 && p.y.abs() < 8.0).count();
        let density = inner as f64 / 256.0;
        assert!((density - 1.0).abs() < 0.02, "slot {slot}: {density}");
        assert_eq!(sched.unmatched, 0);
        let snap = net.config().snap_radius;
        for &k in &sched.nodes {
            assert!(sched.set.points().contains(&net.nodes().points()[k]));
        }
        let mut nodes = sched.nodes.clone();
        nodes.sort_unstable();
        if let Some(p) = &prev {
            assert_ne!(p, &nodes, "consecutive slots share a pose");
        }
        prev = Some(nodes);
        assert!(snap > 0.0);
    }
}

#[test]
fn short_packets_arrive_in_one_hop() {
    let cfg = SimConfig { packet_distance: 0.1, seed: 4, ..grid_cfg(100.0, 8.0, 10.0) };
    let out = run_simulation(&cfg, 12).unwrap();
    assert_eq!(out.summary.delivered, 12);
    assert!(out.packets.iter().all(|p| p.hops.len() == 1));
    assert_eq!(out.summary.mean_hops, Some(1.0));
}

#[test]
fn identical_seeds_give_identical_logs() {
    let cfg = SimConfig { packet_distance: 4.0 * SQUARE_R, seed: 9, ..grid_cfg(50.0, 8.0, 10.0) };
    let export = |cfg: &SimConfig| {
        let out = run_simulation(cfg, 10).unwrap();
        let mut buf = Vec::new();
        write_hop_log(&out.log, &mut buf).unwrap();
        (buf, serde_json::to_string(&out.packets).unwrap())
    };
    let a = export(&cfg);
    assert_eq!(a, export(&cfg));
    assert_ne!(a.0, export(&SimConfig { seed: 10, ..cfg }).0);
    assert!(String::from_utf8(a.0).unwrap().starts_with("packet_id,slot,hop,from_x,from_y,to_x,to_y,progress\n"));
}

#[test]
fn hops_pass_the_sir_audit_and_the_projection_bound() {
    let l = 5.0 * SQUARE_R;
    let cfg = SimConfig { packet_distance: l, seed: 2, ..grid_cfg(100.0, 8.0, 10.0) };
    let out = run_simulation(&cfg, 20).unwrap();
    assert!(out.summary.audit_checked > 0);
    assert_eq!(out.summary.audit_violations, 0);
    assert_eq!(out.summary.delivered, 20);
    for p in &out.packets {
        let d0 = p.source.dist(p.destination);
        let total: f64 = p.progress_per_hop.iter().sum();
        assert!(total >= d0 - SQUARE_R, "packet {}", p.id);
        // each hop's progress bounds the drop in remaining distance
        assert!(total >= d0 * (1.0 - 1e-12));
        assert!(p.progress_per_hop.iter().all(|&x| x > 0.0));
        assert_eq!(p.hops.len(), p.progress_per_hop.len());
        assert!((p.hops.last().unwrap().dist(p.destination)) < 1e-12);
    }
}

#[test]
fn higher_threshold_never_delivers_more() {
    let mut prev = f64::INFINITY;
    for beta in [1.5, 10.0, 100.0] {
        let cfg = SimConfig { packet_distance: 3.0, slots: 40, seed: 6, ..grid_cfg(50.0, 8.0, beta) };
        let out = run_simulation(&cfg, 30).unwrap();
        assert!(out.summary.delivery_fraction <= prev, "beta {beta}");
        prev = out.summary.delivery_fraction;
    }
    assert!(prev < 1.0);
}

#[test]
fn fading_lowers_fixed_link_success_but_lengthens_best_hops() {
    // any fixed receiver inside the no-fading area loses reliability ...
    let s = geomac::spatial::gen_grid(&GridSpec::square(1.0), Extent::new(8.0).unwrap()).unwrap();
    let i = s.nearest(Point2::ORIGIN).unwrap();
    let faded_model = ChannelModel::new(4.0, 10.0, Fading::Exponential).unwrap();
    let rx = Point2::new(0.8 * SQUARE_R, 0.0);
    let p = geomac::reception::grid_success_prob_fading(i, rx, &s, &faded_model).unwrap();
    let plain = ChannelModel::no_fading(4.0, 10.0).unwrap();
    assert_eq!(geomac::reception::grid_success_prob_nofading(i, rx, &s, &plain).unwrap(), 1.0);
    assert!(p < 0.75, "{p}");

    // ... yet with many candidate relays the best one gains from fading
    let base = SimConfig { packet_distance: 3.0, seed: 8, ..grid_cfg(100.0, 8.0, 10.0) };
    let faded = SimConfig { model: faded_model, ..base };
    let a = run_simulation(&base, 30).unwrap().summary;
    let b = run_simulation(&faded, 30).unwrap().summary;
    assert_eq!(a.delivered, 30);
    assert_eq!(b.delivered, 30);
    assert!(b.mean_progress.unwrap() > a.mean_progress.unwrap(), "{a:?} {b:?}");
    assert_eq!(b.audit_checked, 0);
}

#[test]
fn aloha_relaying_delivers() {
    let model = ChannelModel::no_fading(4.0, 10.0).unwrap();
    let cfg = SimConfig {
        packet_distance: 2.0,
        seed: 3,
        ..SimConfig::new(20.0, Extent::new(8.0).unwrap(), Scheme::Aloha { lambda: 1.0 }, model)
    };
    let out = run_simulation(&cfg, 10).unwrap();
    assert_eq!(out.summary.delivered, 10);
    assert_eq!(out.summary.audit_violations, 0);
    assert!(out.summary.mean_hops.unwrap() >= 2.0 / 0.5);
}

#[test]
fn exports() {
    let cfg = SimConfig { packet_distance: 1.0, ..grid_cfg(30.0, 6.0, 10.0) };
    let out = run_simulation(&cfg, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_hop_log_csv(&out.log, dir.path().join("h.csv")).unwrap();
    write_summary_json(&out.summary, dir.path().join("s.json")).unwrap();
    let text = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    assert_eq!(text.lines().count(), out.log.len() + 1);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["packets"], 3);
    let mut empty = Vec::new();
    write_hop_log(&[], &mut empty).unwrap();
    assert_eq!(String::from_utf8(empty).unwrap(), "packet_id,slot,hop,from_x,from_y,to_x,to_y,progress\n");
}
