//! Hard-threshold denoising of a smooth signal in a 40° polar cap.

use slepian::basis::build_basis;
use slepian::denoise::{add_white_noise, snr, target_snr_sigma, Denoiser, NoiseModel};
use slepian::region::Region;
use slepian::synthetic::smooth_slepian_signal;
use slepian::wavelets::{build_filter_bank, TilingParams};

fn main() -> slepian::Result<()> {
    let basis = build_basis(&Region::polar_cap(40f64.to_radians(), 0.0, 0.0)?, 32)?;
    let p_max = basis.shannon_truncation();
    let bank = build_filter_bank(TilingParams::new(3.0, 2, p_max)?)?;

    let s = smooth_slepian_signal(&basis, p_max, 11)?;
    let model = NoiseModel::new(target_snr_sigma(&s, 4.0)?, 12)?;
    let x = add_white_noise(&s, &model);
    let denoiser = Denoiser::new(&bank, &basis, &model)?;
    println!("input SNR {:.2} dB", snr(&x, &s)?);
    for n_sigma in [2.0, 3.0, 5.0] {
        let outcome = denoiser.denoise(&x, n_sigma)?;
        let kept: Vec<String> = outcome
            .stats
            .iter()
            .map(|st| format!("{}={:.2}", st.filter, st.kept_fraction))
            .collect();
        println!(
            "N_sigma={n_sigma}: SNR {:.2} dB, kept {}",
            snr(&outcome.denoised, &s)?,
            kept.join(" ")
        );
    }
    Ok(())
}
