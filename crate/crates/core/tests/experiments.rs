use std::f64::consts::TAU;
use std::path::PathBuf;

use capax_core::experiments::{
    cmd_duality, cmd_symmetrize_with, normalize_about_axis, parse_number, run, Command, ExperimentConfig, SymmetrizeOptions,
};
use capax_core::geometry::{Curve3, Vec3};
use proptest::prelude::*;

fn small_duality(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Command::Duality);
    cfg.seed = seed;
    cfg.cases = Some(3);
    cfg
}

#[test]
fn config_hash_tracks_inputs_but_not_output_path() {
    let a = small_duality(1);
    let mut b = a.clone();
    b.out = Some(PathBuf::from("elsewhere/report.json"));
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), small_duality(2).hash());
    let mut c = a.clone();
    c.h = Some(parse_number("1/32").unwrap());
    assert_ne!(a.hash(), c.hash());
    assert_eq!(a.hash().len(), 16);
}

#[test]
fn reports_are_reproducible_and_stamped() {
    let cfg = small_duality(11);
    let first = cmd_duality(&cfg).unwrap();
    let second = run(&cfg).unwrap();
    assert_eq!(first.to_json(), second.to_json());
    assert!(first.records.iter().all(|r| r.config_hash == cfg.hash() && !r.criteria.is_empty()));
    assert!(first.checks.iter().all(|c| c.config_hash == cfg.hash()));
    assert_ne!(first.to_json(), cmd_duality(&small_duality(12)).unwrap().to_json());
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/duality.json");
    let rep = cmd_duality(&small_duality(3)).unwrap();
    rep.write(&path).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["config_hash"], rep.config_hash.as_str());
    let text = std::fs::read_to_string(path.with_extension("txt")).unwrap();
    assert!(text.contains("modulus axioms"));
}

#[test]
fn coarse_chain_keeps_the_link() {
    let mut cfg = ExperimentConfig::new(Command::Symmetrize);
    cfg.h = Some(1.0 / 8.0);
    cfg.cases = Some(2);
    let rep = cmd_symmetrize_with(&cfg, &SymmetrizeOptions { sweep_cases: 50, terminal: None }).unwrap();
    assert!(rep.check_for(7).all(|c| c.passed));
    let chains: Vec<_> = rep.records.iter().filter(|r| r.case.starts_with("chain")).collect();
    assert_eq!(chains.len(), 2);
    for r in chains {
        assert!(r.error.is_none(), "{:?}", r.error);
        let links = r.values["linking"].as_array().unwrap();
        assert!(links.iter().all(|l| l.as_i64().unwrap().abs() == 1));
        assert!(r.values["surrogate_deviation"].as_f64().unwrap() < 1e-9);
        assert!(r.values["e_surrogate"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn bad_configs_are_rejected() {
    let mut cfg = ExperimentConfig::new(Command::Hopf);
    cfg.h = Some(-1.0);
    assert!(run(&cfg).is_err());
    let mut cfg = ExperimentConfig::new(Command::Theorem);
    cfg.bounds = Some((-1.0, 2.0));
    assert!(run(&cfg).is_err());
    assert!("nonsense".parse::<Command>().is_err());
}

proptest! {
    #[test]
    fn coaxial_circles_normalize_to_the_unit_circle(r in 0.1..5.0f64, z in -3.0..3.0f64, phase in 0.0..TAU) {
        let pts = (0..64).map(|k| {
            let t = phase + TAU * k as f64 / 64.0;
            Vec3::new(r * t.cos(), r * t.sin(), z)
        }).collect();
        let c = normalize_about_axis(&Curve3::new(pts, true).unwrap());
        for v in c.vertices() {
            prop_assert!((v.xy().norm() - 1.0).abs() < 1e-12 && v.z.abs() < 1e-12);
        }
    }
}
