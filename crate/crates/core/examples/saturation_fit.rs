//! Fit the `O + M·c^(-1/4)` saturation model through two codebook sizes and
//! extrapolate.
//!
//!     cargo run --example saturation_fit

use nystrom_coding::bounds::{fit_two_point, ModelForm};

fn main() -> nystrom_coding::Result<()> {
    let err = fit_two_point((16.0, 3.0), (256.0, 2.0), ModelForm::Error)?;
    println!("error form: O = {}, M = {}", err.offset, err.slope);
    for c in [16.0, 256.0, 4096.0, 65536.0] {
        println!("  c = {c:>6}: {:.4}", err.predict(c));
    }

    // Accuracy rises toward an asymptote A with deficit B·c^(-1/4).
    let acc = fit_two_point((8.0, 0.52), (16.0, 0.595), ModelForm::Accuracy)?;
    println!(
        "accuracy form: A = {:.4}, B = {:.4}, saturates from below: {}",
        acc.offset,
        acc.slope,
        acc.saturates_from_below()
    );
    for c in [32.0, 64.0, 128.0, 1024.0] {
        println!("  c = {c:>6}: {:.4}", acc.predict(c));
    }
    Ok(())
}
