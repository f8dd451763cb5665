use paracalc_harness::{ExperimentConfig, ExperimentKind};

#[test]
fn toml_and_json_resolve_to_the_same_config() {
    let toml = r#"
        kind = "crossval"
        seed = 3
        [solver]
        n = 32
        horizon = 0.02
        [noise]
        eps = 0.5
        mollifier = "sharp"
        [initial]
        kind = "constant"
        value = 0.2
    "#;
    let json = r#"{"kind": "crossval", "seed": 3, "solver": {"n": 32, "horizon": 0.02},
        "noise": {"eps": 0.5, "mollifier": "sharp"}, "initial": {"kind": "constant", "value": 0.2}}"#;
    let a = ExperimentConfig::parse(toml, false).unwrap();
    let b = ExperimentConfig::parse(json, true).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.hash(), b.hash());
    assert_eq!(a.kind, Some(ExperimentKind::Crossval));
    assert_eq!(a.solver.dt, 1e-3);
    a.validate().unwrap();
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ExperimentConfig::parse("sed = 3", false).is_err());
    assert!(ExperimentConfig::parse("[noise]\nepsilon = 0.1", false).is_err());
    assert!(ExperimentConfig::parse(r#"{"ladder": {"levels": 3, "extra": true}}"#, true).is_err());
}

#[test]
fn hash_tracks_every_field() {
    let a = ExperimentConfig::default();
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.ladder.levels += 1;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn validation_catches_bad_values() {
    let bad = |edit: fn(&mut ExperimentConfig)| {
        let mut c = ExperimentConfig::default();
        edit(&mut c);
        c.validate().is_err()
    };
    assert!(bad(|c| c.noise.eps = 0.0));
    assert!(bad(|c| c.ladder.levels = 0));
    assert!(bad(|c| c.wick.samples = 1));
    assert!(bad(|c| c.wick.etas = vec![0.2]));
    assert!(bad(|c| c.norms.alpha = 1.0));
    assert!(bad(|c| c.solver.n = 48));
    ExperimentConfig::default().validate().unwrap();
}

#[test]
fn default_round_trips_through_both_formats() {
    let c = ExperimentConfig::default();
    let json = serde_json::to_string(&c).unwrap();
    assert_eq!(ExperimentConfig::parse(&json, true).unwrap(), c);
    let toml = toml::to_string(&c).unwrap();
    assert_eq!(ExperimentConfig::parse(&toml, false).unwrap(), c);
}
