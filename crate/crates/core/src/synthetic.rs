//! Seeded synthetic signals standing in for geophysical datasets.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::basis::{harmonic_to_slepian_first, SlepianBasis, SlepianCoeffs};
use crate::error::Result;
use crate::sphere::{flat_index, HarmonicCoeffs};

/// Real Gaussian random field with angular power spectrum `power(l)`.
pub fn random_real_field(bandlimit: usize, seed: u64, power: impl Fn(usize) -> f64) -> HarmonicCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut c = HarmonicCoeffs::zeros(bandlimit);
    for l in 0..bandlimit {
        let amp = power(l).max(0.0).sqrt();
        c.as_mut_slice()[flat_index(l, 0)] = Complex64::new(amp * normal(), 0.0);
        for m in 1..=l as i64 {
            let v = Complex64::new(normal(), normal()) * (amp / 2f64.sqrt());
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            c.as_mut_slice()[flat_index(l, m)] = v;
            c.as_mut_slice()[flat_index(l, -m)] = v.conj() * sign;
        }
    }
    c
}

/// Earth-like topography: red band power `C_l ∝ (l + 1)^-2`.
pub fn earthlike_coeffs(bandlimit: usize, seed: u64) -> HarmonicCoeffs {
    random_real_field(bandlimit, seed, |l| 1.0 / ((l + 1) as f64).powi(2))
}

/// Smooth real field whose power falls off as a Gaussian in `l` with
/// width `L / 4`.
pub fn smooth_coeffs(bandlimit: usize, seed: u64) -> HarmonicCoeffs {
    let width = (bandlimit as f64 / 4.0).max(1.0);
    random_real_field(bandlimit, seed, |l| (-((l * l) as f64) / (2.0 * width * width)).exp())
}

/// The first `count` Slepian coefficients of [`smooth_coeffs`].
pub fn smooth_slepian_signal(basis: &SlepianBasis, count: usize, seed: u64) -> Result<SlepianCoeffs> {
    harmonic_to_slepian_first(&smooth_coeffs(basis.bandlimit(), seed), basis, count)
}
