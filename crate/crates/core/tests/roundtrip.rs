use nalgebra::DMatrix;
use proptest::prelude::*;

use nystrom_coding::data::{load_csv, parse_csv, save_csv, write_csv, DataMatrix, LabeledDataset, Labels};
use nystrom_coding::harness::{run_curve, ExperimentConfig, ExperimentReport};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(
        d in 1usize..6,
        n in 1usize..12,
        seed_vals in prop::collection::vec(finite(), 72),
        raw in prop::collection::vec(-3i64..40, 12),
    ) {
        let vals: Vec<f64> = (0..d * n).map(|i| seed_vals[i % seed_vals.len()]).collect();
        let data = DataMatrix::new(DMatrix::from_vec(d, n, vals)).unwrap();
        let ds = LabeledDataset::new(data, Some(Labels::from_raw(&raw[..n]))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        save_csv(&ds, &path).unwrap();
        let back = load_csv(&path, true, false).unwrap();
        let bits = |m: &DMatrix<f64>| m.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.data.as_matrix()), bits(ds.data.as_matrix()));
        prop_assert_eq!(back.labels, ds.labels);
    }
}

#[test]
fn csv_with_header_and_blank_lines() {
    let text = "a,b,label\n1.5, 2 ,7\n\n-3,4e-3,-1\n";
    let ds = parse_csv(text.as_bytes(), true, true).unwrap();
    assert_eq!(ds.data.as_matrix(), &DMatrix::from_column_slice(2, 2, &[1.5, 2.0, -3.0, 4e-3]));
    let labels = ds.labels.as_ref().unwrap();
    assert_eq!(labels.ids, [1, 0]);
    let mut out = Vec::new();
    write_csv(&ds, &mut out).unwrap();
    let again = parse_csv(out.as_slice(), true, false).unwrap();
    assert_eq!(again, ds);
}

#[test]
fn report_json_round_trip() {
    let cfg = ExperimentConfig {
        n: 160,
        num_seeds: 2,
        c_grid: vec![4, 8, 16],
        ..ExperimentConfig::default()
    };
    let report = run_curve(&cfg).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn config_json_round_trip() {
    let cfg = ExperimentConfig {
        lambda: Some(0.3),
        fit_c: Some([16, 64]),
        ..ExperimentConfig::default()
    };
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
}
