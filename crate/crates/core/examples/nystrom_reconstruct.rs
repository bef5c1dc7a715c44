//! Treat a sampled dictionary as Nyström column sampling of the full code
//! matrix and compare the reconstruction errors against the bound.
//!
//!     cargo run --release --example nystrom_reconstruct

use nystrom_coding::bounds::{epsilon_min, eval_eq1_bound};
use nystrom_coding::coding::full_code;
use nystrom_coding::data::{normalize_columns, synth_manifold, Normalization};
use nystrom_coding::dictionary::sample_indices;
use nystrom_coding::nystrom::{approximation_errors, NystromFactors};
use nystrom_coding::spectra::SpectralReport;

fn main() -> nystrom_coding::Result<()> {
    let x = synth_manifold(32, 4, 400, 0.05, 3)?;
    let x = normalize_columns(&x, Normalization::UnitL2).data;
    let c_full = full_code(&x, 0.25).values;
    let sv = SpectralReport::compute(&c_full, 0.95)?;
    println!(
        "N = {}, effective rank k = {}, ||C - C_k||_F = {:.3}, N max C_ii = {:.1}",
        x.len(),
        sv.k,
        sv.rank_k_residual,
        sv.scaled_diag_max
    );
    println!("{:>5} {:>8} {:>10} {:>10} {:>10}", "c", "eps", "code err", "kern err", "bound");
    for c in [16, 32, 64, 128, 256] {
        let idx = sample_indices(x.len(), c, 11)?;
        let f = NystromFactors::decompose(&c_full, &idx)?;
        let e = approximation_errors(&c_full, &f);
        println!(
            "{c:>5} {:>8.3} {:>10.3} {:>10.1} {:>10.1}",
            epsilon_min(c, sv.k),
            e.code_err,
            e.kernel_err,
            eval_eq1_bound(&sv, c)
        );
    }
    Ok(())
}
