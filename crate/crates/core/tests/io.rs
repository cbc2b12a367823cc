use std::io::Write;

use pointmatch::io::{
    load_config, parse_ground_truth, parse_predictions, write_records, AnnotationRecord,
};
use pointmatch::{Error, Point, PointSet, Proposal, ProposalSet};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn annotations_round_trip_bit_for_bit(
        gt in proptest::collection::vec((finite(), finite()), 0..20),
        pred in proptest::collection::vec((finite(), finite(), 0.0f64..=1.0), 0..20),
    ) {
        let gt_set = PointSet::new(gt.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap();
        let pred_set = ProposalSet::new(
            pred.iter().map(|&(x, y, t)| Proposal::new(Point::new(x, y), t).unwrap()).collect(),
        ).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let gt_path = dir.path().join("gt.jsonl");
        let pred_path = dir.path().join("pred.jsonl");
        write_records(std::fs::File::create(&gt_path).unwrap(), &[AnnotationRecord::ground_truth("img", &gt_set)]).unwrap();
        write_records(std::fs::File::create(&pred_path).unwrap(), &[AnnotationRecord::prediction("img", &pred_set)]).unwrap();

        let back_gt = parse_ground_truth(&gt_path).unwrap();
        let back_pred = parse_predictions(&pred_path).unwrap();
        for (a, b) in back_gt[0].points.iter().zip(gt_set.iter()) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        prop_assert_eq!(back_gt[0].points.len(), gt_set.len());
        let (id, set) = &back_pred[0];
        prop_assert_eq!(id, "img");
        for (a, b) in set.iter().zip(pred_set.iter()) {
            prop_assert_eq!(a.point.x.to_bits(), b.point.x.to_bits());
            prop_assert_eq!(a.point.y.to_bits(), b.point.y.to_bits());
            prop_assert_eq!(a.confidence.to_bits(), b.confidence.to_bits());
        }
    }
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(
        parse_ground_truth("/nonexistent/gt.jsonl"),
        Err(Error::Io(_))
    ));
}

#[test]
fn config_file_round_trip() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "gamma = 0.2\nsteps = 12\nwce_mode = literal").unwrap();
    let (loss, fit) = load_config(f.path()).unwrap();
    assert_eq!(loss.gamma, 0.2);
    assert_eq!(fit.steps, 12);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "gammma = 0.1").unwrap();
    match load_config(bad.path()) {
        Err(Error::Validation { key, .. }) => assert_eq!(key, "gammma"),
        other => panic!("{other:?}"),
    }
}
