//! Accuracy versus codebook size on labeled synthetic data, with two-point
//! saturation predictions for the sizes not used in the fit.
//!
//!     cargo run --release --example accuracy_curve [-- kmeans]

use nystrom_coding::harness::{run_curve, DictionaryKind, ExperimentConfig};

fn main() -> nystrom_coding::Result<()> {
    let mut cfg = ExperimentConfig::default();
    if std::env::args().any(|a| a == "kmeans") {
        cfg.dictionary = DictionaryKind::KMeans;
    }
    let report = run_curve(&cfg)?;
    println!(
        "{:?} dictionaries, {} seeds, {} train / {} test, lambda {:.3}",
        cfg.dictionary,
        report.seeds.len(),
        report.train_samples,
        report.test_samples,
        report.lambda
    );
    println!("{:>5} {:>14} {:>10} {:>10}", "c", "test acc", "predicted", "code err");
    for p in &report.curve {
        println!(
            "{:>5} {:>7.4} ±{:.3} {:>10.4} {:>10}{}",
            p.c,
            p.test_acc,
            p.test_acc_std,
            p.pred_test,
            p.code_err.map(|e| format!("{e:.2}")).unwrap_or_else(|| "-".into()),
            if p.fit_point { "  (fit)" } else { "" }
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
