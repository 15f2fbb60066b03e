//! Sifting convolution in the harmonic and the Slepian basis.

use num_complex::Complex64;
use slepian::basis::build_basis;
use slepian::region::Region;
use slepian::sifting::{sift_convolve, translate_coeffs, BasisHandle};

fn main() -> slepian::Result<()> {
    let basis = build_basis(&Region::polar_cap(35f64.to_radians(), 0.0, 0.0)?, 10)?;
    let handle = BasisHandle::slepian(&basis, basis.shannon_truncation())?;
    let n = handle.len();

    // a kernel concentrated on the first few Slepian functions
    let g: Vec<Complex64> = (0..n).map(|p| Complex64::new((-(p as f64) / 4.0).exp(), 0.0)).collect();
    let f: Vec<Complex64> = (0..n).map(|p| Complex64::new(1.0 / (1.0 + p as f64), 0.0)).collect();
    let h = sift_convolve(&f, &g, &handle)?;
    println!("Slepian convolution of {n} coefficients, |h_1| = {:.4}", h[0].norm());

    let moved = translate_coeffs(&g, 0.3, 1.0, &handle)?;
    let value: Complex64 = handle.evaluate(0.3, 1.0).iter().zip(&moved).map(|(b, c)| b * c).sum();
    println!("translated kernel evaluated at its centre: {value:.4}");

    let harmonic = BasisHandle::harmonic(4);
    let ones = vec![Complex64::new(1.0, 0.0); harmonic.len()];
    let same = sift_convolve(&ones, &ones, &harmonic)?;
    println!("harmonic identity kernel preserved: {}", same == ones);
    Ok(())
}
