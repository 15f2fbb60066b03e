//! A cap away from the pole, and a cap restricted to where a field is positive.

use slepian::basis::build_basis;
use slepian::region::Region;
use slepian::sphere::{inverse_sht, make_grid};
use slepian::synthetic::earthlike_coeffs;

fn main() -> slepian::Result<()> {
    let lmax = 12;
    let tilted = Region::polar_cap(30f64.to_radians(), 1.2, 4.5)?;
    let basis = build_basis(&tilted, lmax)?;
    println!(
        "tilted cap: N = {:.3}, mu_1 = {:.9}, mu_N = {:.4}",
        basis.shannon_number(),
        basis.eigenvalues()[0],
        basis.eigenvalues()[basis.shannon_truncation() - 1]
    );

    let grid = make_grid(lmax)?;
    let topography = inverse_sht(&earthlike_coeffs(lmax, 3), &grid)?;
    let heights: Vec<f64> = topography.values.iter().map(|v| v.re).collect();
    let land = Region::thresholded_cap(&grid, 40f64.to_radians(), 1.8, 5.2, &heights)?;
    let land_basis = build_basis(&land, lmax)?;
    println!(
        "thresholded cap: area {:.4} sr, N = {:.3}, mu_1 = {:.6}",
        land.area(),
        land_basis.shannon_number(),
        land_basis.eigenvalues()[0]
    );
    Ok(())
}
