use nlcurv::curvature::Representation;
use nlcurv_cli::config::{PointSpec, Suite};
use nlcurv_cli::scene::SceneSpec;
use nlcurv_cli::RunConfig;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = RunConfig> {
    (
        prop::collection::vec(0.01f64..0.99, 1..5),
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 0..4),
        any::<bool>(),
        1usize..600,
        any::<u64>(),
        prop::sample::subsequence(Suite::ALL.to_vec(), 1..=Suite::ALL.len()),
        prop::option::of(0.5f64..1e5),
    )
        .prop_map(|(sigmas, pts, extrapolate, n_dir, seed, suites, r_max)| {
            let mut c = RunConfig { sigmas, extrapolate, ..Default::default() };
            c.points = if pts.is_empty() { PointSpec::Rule(format!("grid-on-surface {n_dir}")) } else { PointSpec::List(pts) };
            c.representations = vec![Representation::Fullspace];
            c.quadrature.n_dir = n_dir;
            c.quadrature.rng_seed = seed;
            c.quadrature.r_max = r_max;
            c.verify.suites = suites;
            c
        })
}

proptest! {
    #[test]
    fn run_config_round_trips(c in config()) {
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn sphere_strings_parse_to_their_parameters(r in 0.01f64..100.0, cx in -5.0f64..5.0, inward in any::<bool>()) {
        let s = format!("sphere:r={r},cx={cx}{}", if inward { ",inward" } else { "" });
        let spec: SceneSpec = s.parse().unwrap();
        prop_assert_eq!(spec.sphere_radius(), Some(r));
        prop_assert_eq!(spec.inward, inward);
    }

    #[test]
    fn scene_parser_never_panics(s in "[a-z:=,.0-9-]{0,24}") {
        let _ = s.parse::<SceneSpec>();
    }
}
