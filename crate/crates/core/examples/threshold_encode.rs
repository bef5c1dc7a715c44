//! Threshold-encode synthetic manifold data against a sampled dictionary and
//! watch code sparsity respond to the threshold.
//!
//!     cargo run --example threshold_encode

use nystrom_coding::coding::{encode, Dictionary};
use nystrom_coding::data::{normalize_columns, synth_manifold, Normalization};
use nystrom_coding::dictionary::sample_indices;

fn main() -> nystrom_coding::Result<()> {
    let x = synth_manifold(32, 4, 500, 0.05, 7)?;
    let x = normalize_columns(&x, Normalization::UnitL2).data;
    let dict = Dictionary::sampled(&x, &sample_indices(x.len(), 64, 7)?)?;

    println!("{} samples, {} atoms of dim {}", x.len(), dict.size(), dict.dim());
    println!("{:>6} {:>10} {:>12}", "alpha", "nonzero", "mean code");
    for alpha in [0.0, 0.1, 0.25, 0.5, 0.75] {
        let codes = encode(&x, &dict, alpha)?;
        let v = &codes.values;
        let nnz = v.iter().filter(|&&c| c > 0.0).count() as f64 / v.len() as f64;
        println!("{alpha:>6.2} {:>9.1}% {:>12.4}", 100.0 * nnz, v.mean());
    }
    Ok(())
}
