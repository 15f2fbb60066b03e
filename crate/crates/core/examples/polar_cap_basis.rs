//! Slepian functions of a 40° polar cap: eigenvalues and the Shannon number.

use slepian::basis::{build_basis, shannon_number};
use slepian::region::Region;

fn main() -> slepian::Result<()> {
    let lmax = 16;
    let region = Region::polar_cap(40f64.to_radians(), 0.0, 0.0)?;
    let basis = build_basis(&region, lmax)?;
    let n = shannon_number(&region, lmax);
    let sum: f64 = basis.eigenvalues().iter().sum();
    println!("N = {n:.4}, sum of eigenvalues = {sum:.4}");
    for (p, mu) in basis.eigenvalues().iter().enumerate().step_by(5).take(12) {
        println!("mu_{:<3} = {mu:.6}", p + 1);
    }
    let well = basis.eigenvalues().iter().filter(|&&m| m > 0.5).count();
    println!("{well} functions are more than half concentrated");
    Ok(())
}
