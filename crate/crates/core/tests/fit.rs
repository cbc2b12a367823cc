use pointmatch::{
    fit_from, fit_points, generate_scene, init_proposals, match_points, run_ablation, AblationSpec,
    Distribution, FitConfig, LossConfig, LossVariant, NoiseSpec,
};

#[test]
fn fitting_is_deterministic() {
    let scene = generate_scene(128, 128, 20, Distribution::Uniform, 2);
    let cfg = FitConfig {
        steps: 300,
        init: pointmatch::Init::Random,
        seed: 5,
        ..FitConfig::default()
    };
    let a = fit_points(&scene, &LossConfig::default(), &cfg).unwrap();
    let b = fit_points(&scene, &LossConfig::default(), &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 301);
}

#[test]
fn confidences_stay_projected_and_loss_drops() {
    let loss_cfg = LossConfig::default();
    let scene = generate_scene(128, 128, 25, Distribution::Uniform, 8);
    let cfg = FitConfig {
        steps: 400,
        ..FitConfig::default()
    };
    let trace = fit_points(&scene, &loss_cfg, &cfg).unwrap();
    let lo = loss_cfg.confidence_clamp;
    assert!(trace
        .final_proposals
        .iter()
        .all(|p| p.confidence >= lo && p.confidence <= 1.0 - lo));
    assert!(trace.last().total < trace.first().total);
}

#[test]
fn single_step_never_moves_unmatched_coordinates() {
    let loss_cfg = LossConfig::default();
    let scene = generate_scene(128, 128, 10, Distribution::Uniform, 1);
    let base = FitConfig::default();
    let start = init_proposals(&scene, &base);
    let matching = match_points(&scene.gt, &start, &loss_cfg).unwrap();
    for variant in LossVariant::ablation_grid() {
        let cfg = FitConfig {
            steps: 1,
            variant,
            ..base
        };
        let trace = fit_from(&scene.gt, start.clone(), &loss_cfg, &cfg).unwrap();
        for &j in matching.unmatched() {
            assert_eq!(
                trace.final_proposals.proposals()[j].point,
                start.proposals()[j].point,
                "{variant}"
            );
        }
    }
}

#[test]
fn frozen_classification_reduces_to_pair_regression() {
    let loss_cfg = LossConfig::default();
    for seed in 0..3 {
        let scene = generate_scene(256, 256, 50, Distribution::Uniform, seed);
        let cfg = FitConfig {
            proposal_factor: 1.0,
            freeze_confidence: true,
            variant: "HSL1+WCE+none".parse().unwrap(),
            ..FitConfig::default()
        };
        let trace = fit_points(&scene, &loss_cfg, &cfg).unwrap();
        assert!(
            trace.last().mean_distance < 0.5,
            "{}",
            trace.last().mean_distance
        );
        assert!(trace.final_proposals.iter().all(|p| p.confidence == 0.5));
    }
}

#[test]
fn clean_scene_ttc_count_is_close() {
    let scene = generate_scene(256, 256, 40, Distribution::Uniform, 77);
    let trace = fit_points(&scene, &LossConfig::default(), &FitConfig::default()).unwrap();
    assert!(trace.last().count.abs_diff(40) <= 2);
}

#[test]
fn ablation_report_has_one_row_per_variant() {
    let scenes = vec![generate_scene(96, 96, 12, Distribution::Uniform, 1)];
    let spec = AblationSpec {
        scenes,
        noise: NoiseSpec::default(),
        seeds: vec![0],
        variants: LossVariant::ablation_grid(),
    };
    let cfg = FitConfig {
        steps: 600,
        ..FitConfig::default()
    };
    let report = run_ablation(&spec, &LossConfig::default(), &cfg).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert_eq!(report.rows[9].variant, "HSL1+WCE+HRC");
    assert!(report.rows[9].mae <= 2.0);
    assert!(report
        .rows
        .iter()
        .all(|r| r.fits == 1 && r.mae <= r.mse + 1e-12));
}

#[test]
fn ablation_rejects_empty_inputs() {
    let spec = AblationSpec {
        scenes: vec![],
        noise: NoiseSpec::default(),
        seeds: vec![0],
        variants: vec![LossVariant::TTC],
    };
    assert!(run_ablation(&spec, &LossConfig::default(), &FitConfig::default()).is_err());
}
