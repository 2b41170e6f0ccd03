use std::collections::BTreeSet;

use fairpoi::fairness::{ExposureFamily, FairnessWeights};
use fairpoi::recommenders::ModelKind;
use fairpoi::runner::{
    combos, evaluate_stage, prepare, run_sweep, sweep_partial, ExperimentConfig, SingleRun,
    MANIFEST_FILE,
};

fn small(out: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.synthetic.n_users = 50;
    cfg.synthetic.n_pois = 100;
    cfg.synthetic.min_poi_checkins = 6;
    cfg.synthetic.mean_checkins_per_user = 40.0;
    cfg.filter.min_users_per_poi = 3;
    cfg.filter.min_pois_per_user = 5;
    cfg.sweep.alpha_grid = vec![0.0, 0.5, 1.0];
    cfg.sweep.beta_grid = vec![0.0, 1.0];
    cfg.sweep.k_list = vec![5, 10];
    cfg.run.out = out.to_path_buf();
    cfg
}

#[test]
fn every_configured_combination_appears_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let r = run_sweep(&cfg, false).unwrap();
    let keys: BTreeSet<(String, String, u64, u64, usize)> = r
        .rows
        .iter()
        .map(|x| {
            (
                x.model.clone(),
                x.exposure_family.clone(),
                x.alpha.to_bits(),
                x.beta.to_bits(),
                x.k,
            )
        })
        .collect();
    assert_eq!(keys.len(), r.rows.len(), "duplicate rows");
    let expected = ModelKind::ALL.len() * combos(&cfg).len() * cfg.sweep.k_list.len();
    assert_eq!(r.rows.len(), expected);
    for kind in ModelKind::ALL {
        for family in ExposureFamily::ALL {
            for &a in &cfg.sweep.alpha_grid {
                for &b in &cfg.sweep.beta_grid {
                    for &k in &cfg.sweep.k_list {
                        let key = (
                            kind.name().to_string(),
                            family.name().to_string(),
                            a.to_bits(),
                            b.to_bits(),
                            k,
                        );
                        assert!(keys.contains(&key), "{key:?} missing");
                    }
                }
            }
        }
    }
}

#[test]
fn sweep_and_single_evaluation_agree_at_zero_weights() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let r = run_sweep(&cfg, false).unwrap();
    for kind in ModelKind::ALL {
        let run = SingleRun {
            model: kind,
            weights: FairnessWeights::new(0.0, 0.0, ExposureFamily::Linear),
            k: 10,
        };
        let single = evaluate_stage(&cfg, run).unwrap();
        let row = r
            .rows
            .iter()
            .find(|x| {
                x.model == kind.name()
                    && x.exposure_family == "linear"
                    && x.alpha == 0.0
                    && x.beta == 0.0
                    && x.k == 10
            })
            .unwrap();
        assert_eq!(&single, row);
    }
}

#[test]
fn cached_models_give_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let first = run_sweep(&cfg, false).unwrap();
    assert!(dir.path().join("models/usg.json").exists());
    assert!(dir.path().join("exposure/powerlaw.json").exists());
    let second = run_sweep(&cfg, false).unwrap();
    assert_eq!(first.rows, second.rows);
    assert_eq!(first.samples, second.samples);
}

#[test]
fn failures_leave_an_incomplete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    // every user is removed by the filter
    cfg.filter.min_pois_per_user = 10_000;
    let err = run_sweep(&cfg, false).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap())
            .unwrap();
    assert_eq!(m["status"], "incomplete");
    assert!(m["error"].as_str().unwrap().contains("filter"));
}

#[test]
fn samples_cover_every_test_user() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.run.cache = false;
    let prepared = prepare(&cfg).unwrap();
    let full = sweep_partial(&cfg, &prepared, None);
    assert!(full.error.is_none());
    assert_eq!(
        full.result.sample_users.len(),
        full.result.samples[0].user_precision.len()
    );
    for s in &full.result.samples {
        assert_eq!(
            s.poi_exposure.iter().sum::<u64>() as usize,
            full.result.sample_users.len() * s.k
        );
    }
}
