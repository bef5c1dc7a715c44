//! K-means dictionary learning and farthest-first selection.
//!
//!     cargo run --release --example kmeans_kcenters

use nalgebra::DMatrix;
use nystrom_coding::data::{normalize_columns, synth_manifold, Normalization};
use nystrom_coding::dictionary::{covering_radius, kcenters, kmeans};

fn main() -> nystrom_coding::Result<()> {
    let x = synth_manifold(16, 3, 600, 0.1, 5)?;
    let x = normalize_columns(&x, Normalization::UnitL2).data;

    let fit = kmeans(&x, 24, 100, 5)?;
    println!("k-means: {} iterations, objective {:.4}", fit.iterations, fit.objective);
    let trace: Vec<String> = fit.history.iter().take(8).map(|v| format!("{v:.3}")).collect();
    println!("  first objectives: {}", trace.join(" > "));
    let dict = fit.dictionary();
    println!("  {} unit-norm atoms", dict.size());

    // Rows are the items for farthest-first traversal.
    let items: DMatrix<f64> = x.as_matrix().transpose();
    let picks = kcenters(&items, 32, 5)?;
    for c in [1, 2, 4, 8, 16, 32] {
        println!("covering radius with {c:>2} centers: {:.4}", covering_radius(&items, &picks[..c]));
    }
    Ok(())
}
