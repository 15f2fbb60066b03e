//! Tiling of the Slepian index line by scaling function and wavelets.

use slepian::wavelets::{build_filter_bank, TilingParams};

fn main() -> slepian::Result<()> {
    let bank = build_filter_bank(TilingParams::new(3.0, 2, 690)?)?;
    println!(
        "lambda=3 J0=2 Pmax=690: scales {}..={}, admissibility residual {:.1e}",
        bank.j0(),
        bank.j_max(),
        bank.admissibility_residual()
    );
    for id in bank.ids() {
        let filter = bank.filter(id);
        let support: Vec<usize> = (0..filter.len()).filter(|&p| filter[p] > 1e-12).collect();
        let peak = (0..filter.len())
            .max_by(|&a, &b| filter[a].total_cmp(&filter[b]))
            .unwrap_or(0);
        println!(
            "{id:>12}: support p = {}..={}, peak at p = {}",
            support.first().map_or(0, |p| p + 1),
            support.last().map_or(0, |p| p + 1),
            peak + 1
        );
    }
    Ok(())
}
