//! Writing and re-reading every file format, plus a CSV dump for plotting.

use slepian::basis::build_basis;
use slepian::io;
use slepian::region::Region;
use slepian::sphere::{inverse_sht, make_grid};
use slepian::synthetic::earthlike_coeffs;
use slepian::wavelets::{build_filter_bank, TilingParams};

fn main() -> slepian::Result<()> {
    let dir = std::env::temp_dir().join("slepian-file-formats");
    let lmax = 8;
    let a = earthlike_coeffs(lmax, 5);
    io::write_coeffs(dir.join("coeffs.txt"), &a)?;
    assert_eq!(io::read_coeffs(dir.join("coeffs.txt"))?, a);

    let field = inverse_sht(&a, &make_grid(lmax)?)?;
    io::write_field(dir.join("field.txt"), &field)?;
    io::write_grid_csv(dir.join("field.csv"), &field)?;

    let region = Region::polar_cap(0.6, 0.0, 0.0)?;
    let basis = build_basis(&region, lmax)?;
    io::write_basis(dir.join("basis.txt"), &basis)?;
    let cached = io::read_basis(dir.join("basis.txt"), &region)?;
    assert_eq!(cached.eigenvalues(), basis.eigenvalues());

    let bank = build_filter_bank(TilingParams::new(2.0, 1, 40)?)?;
    io::write_filter_bank(dir.join("bank.txt"), &bank)?;
    assert_eq!(io::read_filter_bank(dir.join("bank.txt"))?, bank);

    println!("wrote and re-read files in {}", dir.display());
    Ok(())
}
