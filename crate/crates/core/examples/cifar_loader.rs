//! Load a CIFAR-10 binary batch and cut its first image into patches.
//!
//!     cargo run --example cifar_loader -- path/to/data_batch_1.bin
//!
//! Without a path, two in-memory records are parsed instead.

use nystrom_coding::data::cifar::{load_cifar10_binary, parse_cifar10, to_image, RECORD_LEN};
use nystrom_coding::data::extract_patches;

fn main() -> nystrom_coding::Result<()> {
    let ds = match std::env::args().nth(1) {
        Some(path) => load_cifar10_binary(path)?,
        None => {
            let mut bytes = vec![0u8; 2 * RECORD_LEN];
            bytes[0] = 3;
            bytes[RECORD_LEN] = 8;
            for (i, b) in bytes[1..RECORD_LEN].iter_mut().enumerate() {
                *b = (i % 256) as u8;
            }
            parse_cifar10(&bytes)?
        }
    };
    let labels = ds.labels.as_ref().expect("CIFAR records carry labels");
    println!("{} images, labels of the first few: {:?}", ds.data.len(), &labels.ids[..labels.ids.len().min(8)]);

    let img = to_image(ds.data.sample(0))?;
    let grid = extract_patches(&img, 6, 4)?;
    println!(
        "first image {}x{}x{} -> {}x{} patches of dim {}",
        img.height,
        img.width,
        img.channels,
        grid.grid_rows,
        grid.grid_cols,
        grid.patches.dim()
    );
    Ok(())
}
