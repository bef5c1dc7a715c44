//! Pooling-aware dictionary learning on stripe textures, against plain
//! K-means of the same final size.
//!
//!     cargo run --release --example pdl_textures

use nystrom_coding::harness::{run_pdl_compare, ExperimentConfig};

fn main() -> nystrom_coding::Result<()> {
    let cfg = ExperimentConfig { overshoots: vec![1, 2, 4], ..ExperimentConfig::default() };
    let report = run_pdl_compare(&cfg)?;
    println!(
        "{} images of {}x{}, patch {} stride {}, {}x{} {:?} pooling, {} seeds",
        cfg.images,
        cfg.image_size,
        cfg.image_size,
        cfg.patch,
        cfg.stride,
        cfg.pool_rows,
        cfg.pool_cols,
        cfg.pool_op,
        report.seeds.len()
    );
    println!("{:>7} {:>9} {:>14} {:>8}", "final c", "overshoot", "test acc", "delta");
    for r in &report.rows {
        println!(
            "{:>7} {:>9} {:>7.4} ±{:.3} {:>+8.4}",
            r.final_c, r.overshoot, r.test_acc, r.test_acc_std, r.delta_test
        );
    }
    Ok(())
}
