//! Slepian wavelet analysis and exact synthesis of a band-limited field.

use slepian::basis::{build_basis, harmonic_to_slepian_first};
use slepian::region::Region;
use slepian::synthetic::earthlike_coeffs;
use slepian::wavelets::{build_filter_bank, wavelet_analysis, wavelet_synthesis, TilingParams};

fn main() -> slepian::Result<()> {
    let lmax = 24;
    let basis = build_basis(&Region::polar_cap(40f64.to_radians(), 0.0, 0.0)?, lmax)?;
    let p_max = basis.shannon_truncation();
    let f = harmonic_to_slepian_first(&earthlike_coeffs(lmax, 3), &basis, p_max)?;
    let bank = build_filter_bank(TilingParams::new(3.0, 2, p_max)?)?;

    let w = wavelet_analysis(&f, &bank)?;
    for id in bank.ids() {
        let energy: f64 = w.get(id).iter().map(|c| c.norm_sqr()).sum();
        println!("{id:>12}: energy {:.4}", energy / f.energy());
    }
    let back = wavelet_synthesis(&w, &bank)?;
    let err: f64 = f
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    println!("P = {p_max}, reconstruction error {:.2e}", err / f.energy().sqrt());
    Ok(())
}
