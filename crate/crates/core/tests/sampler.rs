use ellsum::identities::IdentityId;
use ellsum::record::InstanceRecord;
use ellsum::sampler::{rejection_report, sample_instance, Cell, SampleConfig, SampleError};
use ellsum::{IdentityInstance, Scalar};

#[test]
fn gr_sum_samples_are_balanced() {
    let cfg = SampleConfig::default();
    let cell = Cell::new(IdentityId::GrSum, 3, 3, Scalar::new(0.05, 0.0));
    for t in 0..100 {
        let s = sample_instance(&cell, t, &cfg).unwrap();
        assert!(
            s.instance.residual() <= 1e-13,
            "trial {t}: {:e}",
            s.instance.residual()
        );
        assert!(s.lhs.min_denominator >= cfg.pole_floor);
        assert!(s.condition() <= cfg.condition_cap);
    }
}

#[test]
fn trigonometric_cells_use_plain_factors() {
    let cfg = SampleConfig::default();
    let s = sample_instance(
        &Cell::new(IdentityId::GrSum, 2, 2, Scalar::new(0.0, 0.0)),
        0,
        &cfg,
    )
    .unwrap();
    let nome = s.instance.nome;
    assert!(nome.is_trigonometric());
    let z = Scalar::new(0.3, -1.7);
    assert_eq!(nome.theta(z).unwrap(), Scalar::new(1.0, 0.0) - z);
}

#[test]
fn seed_changes_instances() {
    let cell = Cell::new(IdentityId::BcTransform, 2, 2, Scalar::new(0.2, 0.0));
    let a = sample_instance(&cell, 0, &SampleConfig::default()).unwrap();
    let b = sample_instance(
        &cell,
        0,
        &SampleConfig {
            seed: 1,
            ..SampleConfig::default()
        },
    )
    .unwrap();
    assert_ne!(a.instance, b.instance);
}

#[test]
fn disabled_gates_never_reject() {
    let cell = Cell::new(IdentityId::GrSum, 4, 4, Scalar::new(0.2, 0.0));
    let no_poles = SampleConfig {
        pole_floor: 0.0,
        ..SampleConfig::default()
    };
    assert_eq!(
        rejection_report(&cell, &no_poles, 100)
            .unwrap()
            .rejections
            .pole,
        0
    );
    let no_condition = SampleConfig {
        condition_cap: f64::INFINITY,
        ..SampleConfig::default()
    };
    assert_eq!(
        rejection_report(&cell, &no_condition, 100)
            .unwrap()
            .rejections
            .condition,
        0
    );
}

#[test]
fn default_pass_rate_for_largest_gr_sum_cell() {
    let cell = Cell::new(IdentityId::GrSum, 4, 4, Scalar::new(0.2, 0.0));
    let report = rejection_report(&cell, &SampleConfig::default(), 100).unwrap();
    assert_eq!(report.exhausted, 0);
    assert!(report.pass_rate() > 0.2, "{report:?}");
}

#[test]
fn exhaustion_reports_histogram() {
    let cfg = SampleConfig {
        dependent_range: (1e-300, 1e-299),
        max_resamples: 5,
        ..SampleConfig::default()
    };
    let cell = Cell::new(IdentityId::GrCorollary, 3, 3, Scalar::new(0.2, 0.0));
    match sample_instance(&cell, 0, &cfg) {
        Err(SampleError::Exhausted {
            attempts,
            rejections,
        }) => {
            assert_eq!(attempts, 5);
            assert_eq!(rejections.magnitude, 5);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}

#[test]
fn config_reads_all_complex_forms() {
    let cfg: SampleConfig = serde_json::from_str(
        r#"{"seed": 4, "p_values": [0.1, {"re": 0.0, "im": 0.2}, "0.1-0.1i"]}"#,
    )
    .unwrap();
    assert_eq!(cfg.seed, 4);
    assert_eq!(cfg.p_scalars()[2], Scalar::new(0.1, -0.1));
    assert_eq!(cfg.max_resamples, 200);
}

#[test]
fn records_replay_exactly() {
    let cfg = SampleConfig::default();
    for id in IdentityId::ALL {
        let s = sample_instance(&Cell::new(id, 3, 2, Scalar::new(0.05, 0.0)), 0, &cfg).unwrap();
        let json = serde_json::to_string(&InstanceRecord::from(&s.instance)).unwrap();
        let back: InstanceRecord = serde_json::from_str(&json).unwrap();
        let inst = IdentityInstance::try_from(&back).unwrap();
        assert_eq!(inst, s.instance, "{id}");
    }
}
