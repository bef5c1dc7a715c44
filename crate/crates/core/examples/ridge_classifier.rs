//! Encode labeled data with a sampled dictionary and classify the codes with
//! one-vs-rest ridge regression.
//!
//!     cargo run --release --example ridge_classifier

use nystrom_coding::classifier::{accuracy, predict, train_ridge};
use nystrom_coding::coding::{encode, Dictionary};
use nystrom_coding::data::{normalize_columns, synth_labeled, train_test_split, Normalization, SynthSpec};
use nystrom_coding::dictionary::sample_indices;

fn main() -> nystrom_coding::Result<()> {
    let spec = SynthSpec { d: 32, k: 4, n: 1000, noise: 0.05, classes: 4, prototypes_per_class: 6 };
    let ds = synth_labeled(&spec, 1)?;
    let labels = ds.labels.as_ref().expect("labeled");
    let (train_idx, test_idx) = train_test_split(ds.data.len(), 0.8, 1)?;
    let x = normalize_columns(&ds.data, Normalization::UnitL2).data;
    let (train, test) = (x.select(&train_idx)?, x.select(&test_idx)?);
    let (y_train, y_test) = (labels.select(&train_idx).ids, labels.select(&test_idx).ids);

    let lambda = 1e-3 * train.len() as f64;
    for c in [8, 32, 128, 512] {
        let dict = Dictionary::sampled(&train, &sample_indices(train.len(), c, 2)?)?;
        let f_train = encode(&train, &dict, 0.25)?.values;
        let f_test = encode(&test, &dict, 0.25)?.values;
        let model = train_ridge(&f_train, &y_train, labels.num_classes, lambda)?;
        println!(
            "c = {c:>3}: train {:.3}, test {:.3}",
            accuracy(&predict(&model, &f_train)?, &y_train)?,
            accuracy(&predict(&model, &f_test)?, &y_test)?
        );
    }
    Ok(())
}
