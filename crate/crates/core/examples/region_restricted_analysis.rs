//! Slepian coefficients estimated from data inside the region only.

use slepian::basis::{build_basis, harmonic_to_slepian_first, region_restricted_analysis, DEFAULT_MU_FLOOR};
use slepian::region::Region;
use slepian::sphere::{inverse_sht, make_grid};
use slepian::synthetic::earthlike_coeffs;

fn main() -> slepian::Result<()> {
    let lmax = 16;
    let basis = build_basis(&Region::polar_cap(50f64.to_radians(), 0.0, 0.0)?, lmax)?;
    let a = earthlike_coeffs(lmax, 4);
    let field = inverse_sht(&a, &make_grid(lmax)?)?;

    let restricted = region_restricted_analysis(&field, &basis, DEFAULT_MU_FLOOR)?;
    let exact = harmonic_to_slepian_first(&a, &basis, basis.len())?;
    let worst = restricted
        .coeffs
        .values
        .iter()
        .zip(&exact.values)
        .enumerate()
        .filter(|(p, _)| !restricted.skipped.contains(p))
        .map(|(_, (r, e))| (r - e).norm())
        .fold(0.0, f64::max);
    println!(
        "{} coefficients recovered, {} skipped below mu = {DEFAULT_MU_FLOOR:e}, max error {worst:.2e}",
        basis.len() - restricted.skipped.len(),
        restricted.skipped.len()
    );
    Ok(())
}
