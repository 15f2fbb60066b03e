//! Forward and inverse spherical harmonic transforms on the Gauss–Legendre grid.

use slepian::sphere::{forward_sht, inverse_sht, make_grid};
use slepian::synthetic::earthlike_coeffs;

fn main() -> slepian::Result<()> {
    let lmax = 32;
    let grid = make_grid(lmax)?;
    let a = earthlike_coeffs(lmax, 1);
    let field = inverse_sht(&a, &grid)?;
    let back = forward_sht(&field)?;

    let err: f64 = a
        .as_slice()
        .iter()
        .zip(back.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    println!(
        "L={lmax}: {} x {} samples, total weight {:.12} (4π = {:.12})",
        grid.n_theta(),
        grid.n_phi(),
        grid.total_weight(),
        4.0 * std::f64::consts::PI
    );
    println!("round-trip error {err:.2e}, reality defect {:.2e}", back.reality_defect());
    Ok(())
}
