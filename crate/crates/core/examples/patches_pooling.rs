//! Patch extraction, encoding and spatial pooling for a single image.
//!
//!     cargo run --example patches_pooling

use nystrom_coding::coding::Dictionary;
use nystrom_coding::data::{extract_patches, normalize_columns, synth_textures, Normalization};
use nystrom_coding::dictionary::sample_indices;
use nystrom_coding::pooling::{encode_pool, PoolConfig, PoolOp};

fn main() -> nystrom_coding::Result<()> {
    let (images, labels) = synth_textures(2, 16, 0.1, 4)?;
    let mut grid = extract_patches(&images[0], 4, 2)?;
    grid.patches = normalize_columns(&grid.patches, Normalization::Both).data;
    println!(
        "class {} image -> {}x{} grid of {}-dim patches",
        labels.ids[0],
        grid.grid_rows,
        grid.grid_cols,
        grid.patches.dim()
    );

    let dict = Dictionary::sampled(&grid.patches, &sample_indices(grid.patches.len(), 6, 4)?)?;
    for op in [PoolOp::Average, PoolOp::Max] {
        let cfg = PoolConfig { region_rows: 2, region_cols: 2, op };
        let pooled = encode_pool(&grid, &dict, 0.25, &cfg)?;
        println!("{op:?} pooling: {} regions x {} atoms", pooled.regions, pooled.atoms());
        for r in 0..pooled.regions {
            let vals: Vec<String> = (0..pooled.atoms())
                .map(|a| format!("{:.3}", pooled.values[(0, r * pooled.atoms() + a)]))
                .collect();
            println!("  region {r}: {}", vals.join(" "));
        }
    }
    Ok(())
}
