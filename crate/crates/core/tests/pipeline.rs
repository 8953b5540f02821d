use labelrank::pipeline::{
    build_dataset, build_labels, generate_synthetic, Demographics, EventGroup, EventLog,
    EventTuple, FeatureLayout, PipelineConfig, SyntheticConfig,
};
use labelrank::RankedDataset;

fn ev(user: u64, timestamp: i64, group: EventGroup, category: usize) -> EventTuple {
    EventTuple {
        user,
        timestamp,
        group,
        category,
    }
}

#[test]
fn labels_rank_clicks_inside_the_window() {
    use EventGroup::Adc;
    let log = EventLog::new(
        5,
        vec![
            ev(1, 5, Adc, 4),
            ev(1, 11, Adc, 0),
            ev(1, 12, Adc, 2),
            ev(1, 12, Adc, 2),
            ev(1, 20, Adc, 1),
            ev(1, 21, Adc, 3),
            ev(2, 15, Adc, 0),
        ],
    )
    .unwrap();
    let labels = build_labels(&log, 10, 20, 0.5, 3).unwrap();
    assert_eq!(labels.len(), 1);
    // Intensities at t=20: label 2 has 2·0.5^8, label 0 has 0.5^9, label 1 has 1.
    assert_eq!(labels[&1].labels(), &[1, 2, 0]);
    assert!(build_labels(&log, 20, 20, 0.5, 3).is_err());
}

#[test]
fn event_and_dataset_files_round_trip() {
    let cfg = SyntheticConfig {
        n_users: 300,
        num_labels: 9,
        seed: 3,
        ..Default::default()
    };
    let (log, demo) = generate_synthetic(&cfg).unwrap();
    let log_back = EventLog::read(log.to_text().as_bytes(), None).unwrap();
    let demo_back = Demographics::read(demo.to_text().as_bytes()).unwrap();
    assert_eq!(log_back.events, log.events);
    let (tf, tl) = cfg.default_times();
    let pcfg = PipelineConfig::new(tf, tl);
    let (ds, users) = build_dataset(&log_back, &demo_back, &pcfg).unwrap();
    let (ref_ds, ref_users) = build_dataset(&log, &demo, &pcfg).unwrap();
    assert_eq!(users, ref_users);
    assert_eq!(ds.to_text(), ref_ds.to_text());
    assert_eq!(
        RankedDataset::parse_str(&ds.to_text()).unwrap().to_text(),
        ds.to_text()
    );
    assert_eq!(ds.dim(), FeatureLayout::new(9, false).dim());
    assert!(ds.instances().iter().all(|i| i.truth.len() >= 3));
}

#[test]
fn normalized_features_have_unit_norm() {
    let cfg = SyntheticConfig {
        n_users: 200,
        num_labels: 6,
        seed: 9,
        ..Default::default()
    };
    let (log, demo) = generate_synthetic(&cfg).unwrap();
    let (tf, tl) = cfg.default_times();
    let (ds, _) = build_dataset(&log, &demo, &PipelineConfig::new(tf, tl)).unwrap();
    for inst in ds.instances() {
        assert!((inst.features.squared_norm() - 1.0).abs() < 1e-12);
    }
}
