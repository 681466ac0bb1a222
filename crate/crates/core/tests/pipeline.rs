use std::path::PathBuf;

use qradar_core::channel::survival_probability;
use qradar_core::correlator::export;
use qradar_core::{run_scenario, Classification, DetectorConfig, Facet, Scenario, Target};

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    Scenario::load(path).unwrap()
}

fn quiet(mut sc: Scenario) -> Scenario {
    sc.detectors.reference = DetectorConfig::with_efficiency(0.53);
    sc.detectors.receive = DetectorConfig::with_efficiency(0.55);
    sc.channel.background_rate = 0.0;
    sc
}

#[test]
fn bundled_scenarios_parse() {
    for name in [
        "stationary_10m.toml",
        "mach8_approach.toml",
        "decoy_vs_target/decoy.toml",
        "decoy_vs_target/target.toml",
    ] {
        scenario(name);
    }
}

#[test]
fn stationary_scenario_ranges_to_ten_metres() {
    let (_, a) = run_scenario(&scenario("stationary_10m.toml")).unwrap();
    let r = a.report.range_m.unwrap();
    assert!((9.9..=10.1).contains(&r), "range {r}");
    // peak within a tick of 2·10 m / c_a
    assert!((a.report.delay_ps.unwrap() - 66_732.83).abs() <= 81.0);
    assert_eq!(a.report.velocity_mps, Some(0.0));
    assert!(a.report.counts.coincidences > 0.0);
}

#[test]
fn decoy_and_target_are_labelled() {
    let (_, d) = run_scenario(&scenario("decoy_vs_target/decoy.toml")).unwrap();
    let (_, t) = run_scenario(&scenario("decoy_vs_target/target.toml")).unwrap();
    assert_eq!(d.report.classification, Some(Classification::Decoy));
    assert_eq!(t.report.classification, Some(Classification::Target));
}

#[test]
fn point_target_width_is_at_most_two_bins() {
    let (_, a) = run_scenario(&quiet(scenario("stationary_10m.toml"))).unwrap();
    let p = a.profile.unwrap();
    assert!(p.width_ps <= 2 * p.tau_step_ps, "width {}", p.width_ps);
}

#[test]
fn two_facets_ten_metres_apart() {
    let mut sc = quiet(scenario("stationary_10m.toml"));
    sc.target.facets = vec![
        Facet {
            depth_m: 0.0,
            weight: 1.0,
        },
        Facet {
            depth_m: 10.0,
            weight: 1.0,
        },
    ];
    let (_, a) = run_scenario(&sc).unwrap();
    let p = a.profile.unwrap();
    // 2·10 m / c_a
    let expected = 66_732.83;
    assert!(
        (p.width_ps as f64 - expected).abs() <= 2.0 * 81.0,
        "width {}",
        p.width_ps
    );
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let sc = scenario("decoy_vs_target/decoy.toml");
    let render = || {
        let (s, a) = run_scenario(&sc).unwrap();
        let mut csv = Vec::new();
        export::write_csv(&a.outcome.correlogram, &mut csv).unwrap();
        (s.reference, s.received, csv, format!("{:?}", a.report))
    };
    assert_eq!(render(), render());
    let mut other = sc.clone();
    other.seed += 1;
    let (s, _) = run_scenario(&other).unwrap();
    assert_ne!(s.reference, render().0);
}

#[test]
fn doubling_range_quarters_the_return() {
    let sc = quiet(scenario("stationary_10m.toml"));
    let near = survival_probability(&sc.target, &sc.channel).unwrap();
    let mut far = sc.clone();
    far.target = Target {
        base_range_m: 20.0,
        ..sc.target.clone()
    };
    far.grid.tau_max_ps = 300_000;
    let p_far = survival_probability(&far.target, &far.channel).unwrap();
    assert!((near / p_far - 4.0).abs() < 1e-12);
    let (_, a) = run_scenario(&sc).unwrap();
    let (_, b) = run_scenario(&far).unwrap();
    let (n1, n2) = (
        a.report.counts.received_singles as f64,
        b.report.counts.received_singles as f64,
    );
    let sigma = (n1 / 16.0 + n2).sqrt() * 4.0;
    assert!((n1 - 4.0 * n2).abs() < 5.0 * sigma.max(1.0), "{n1} vs {n2}");
}

#[test]
fn weak_return_is_not_a_detection() {
    let mut sc = scenario("stationary_10m.toml");
    sc.target.absorptivity = 1.0;
    let (_, a) = run_scenario(&sc).unwrap();
    assert!(!a.report.detected);
    assert!(a.report.range_m.is_none());
}

#[test]
fn jammer_sweep_keeps_delay_and_lowers_significance() {
    let base = scenario("stationary_10m.toml");
    let mut last: Option<(usize, f64)> = None;
    for rate in [0.0, 1e3, 1e5, 1e7] {
        let mut sc = base.clone();
        sc.channel.jammer_rate = rate;
        let (_, a) = run_scenario(&sc).unwrap();
        let p = a.outcome.peak.unwrap();
        if let Some((k, sig)) = last {
            assert!(p.tau_idx.abs_diff(k) <= 1);
            assert!(p.significance < sig, "{rate}: {} !< {sig}", p.significance);
        }
        last = Some((p.tau_idx, p.significance));
    }
}
