use fracheat_cli::config::{Command, Format, GridSpec, KernelName};
use fracheat_cli::RunConfig;
use proptest::prelude::*;

proptest! {
    #[test]
    fn uniform_grid_lies_in_half_open_interval(a in -5.0f64..5.0, len in 1e-3f64..10.0, n in 0usize..60) {
        let b = a + len;
        let GridSpec::Times(t) = GridSpec::parse(&format!("{a}:{b}:{n}")).unwrap() else { panic!() };
        prop_assert_eq!(t.len(), n);
        prop_assert!(t.iter().all(|&x| x > a && x <= b));
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        if n > 0 {
            prop_assert_eq!(*t.last().unwrap(), b);
        }
    }

    #[test]
    fn config_json_round_trip(
        h in proptest::collection::vec(0.5f64..1.0, 1..4),
        seed in any::<u64>(),
        nt in proptest::option::of(2usize..1000),
        json in any::<bool>(),
    ) {
        let cfg = RunConfig {
            command: Some(Command::Verify),
            kernel: Some(KernelName::Rz),
            h: Some(h),
            seed: Some(seed),
            nt,
            format: Some(if json { Format::Json } else { Format::Csv }),
            grid: Some("0:1:10".into()),
            ..Default::default()
        };
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
