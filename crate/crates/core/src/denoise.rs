//! White noise in Slepian space, the position-dependent noise level of
//! wavelet coefficients, and hard-thresholding denoising.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::basis::{harmonic_to_slepian_first, slepian_synthesis, SlepianBasis, SlepianCoeffs};
use crate::error::{Error, Result};
use crate::sphere::{forward_sht, make_grid, GridSpec, SampledField};
use crate::wavelets::{filter_coeffs, wavelet_analysis, wavelet_synthesis, FilterBank, FilterId};

/// Zero-mean white Gaussian noise with per-coefficient standard deviation `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("noise sigma must be positive, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }
}

/// `x_p = s_p + n_p`. Real coefficient vectors receive real noise; complex
/// ones receive circular noise with `E|n_p|² = σ²`.
pub fn add_white_noise(s: &SlepianCoeffs, model: &NoiseModel) -> SlepianCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let real = s.values.iter().all(|v| v.im == 0.0);
    let values = if real {
        let normal = Normal::new(0.0, model.sigma).expect("validated sigma");
        s.values
            .iter()
            .map(|v| v + normal.sample(&mut rng))
            .collect()
    } else {
        let normal = Normal::new(0.0, model.sigma / 2f64.sqrt()).expect("validated sigma");
        s.values
            .iter()
            .map(|v| v + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect()
    };
    SlepianCoeffs::new(s.bandlimit, values)
}

/// `σ` giving an expected input SNR of `snr_db`: `σ² = ‖s‖² / (P 10^{snr/10})`.
pub fn target_snr_sigma(s: &SlepianCoeffs, snr_db: f64) -> Result<f64> {
    let energy = s.energy();
    if energy == 0.0 || s.is_empty() {
        return Err(Error::Domain("cannot target an SNR for a zero signal".into()));
    }
    Ok((energy / (s.len() as f64 * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// `10 log10(‖s‖² / ‖x - s‖²)` in dB; `+∞` when `x == s`.
pub fn snr(x: &SlepianCoeffs, s: &SlepianCoeffs) -> Result<f64> {
    if x.len() != s.len() {
        return Err(Error::Mismatch(format!("SNR of {} vs {} coefficients", x.len(), s.len())));
    }
    let err: f64 = x.values.iter().zip(&s.values).map(|(a, b)| (a - b).norm_sqr()).sum();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (s.energy() / err).log10())
}

fn rendered_moduli(basis: &SlepianBasis, count: usize, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
    Ok(basis
        .render(count, grid)?
        .into_iter()
        .map(|f| f.values.iter().map(|v| v.norm_sqr()).collect())
        .collect())
}

fn std_from_moduli(sigma: f64, filter: &[f64], moduli: &[Vec<f64>], grid: &GridSpec) -> SampledField {
    let mut var = vec![0.0; grid.len()];
    for (h, m) in filter.iter().zip(moduli) {
        let h2 = h * h;
        if h2 == 0.0 {
            continue;
        }
        for (v, s) in var.iter_mut().zip(m) {
            *v += h2 * s;
        }
    }
    SampledField {
        grid: grid.clone(),
        values: var.iter().map(|v| Complex64::new(sigma * v.sqrt(), 0.0)).collect(),
    }
}

/// `σ^φ(ω) = σ √(Σ_p |φ_p|² |S_p(ω)|²)`, the standard deviation of the
/// filtered noise at each grid node.
pub fn wavelet_noise_std(
    model: &NoiseModel,
    filter: &[f64],
    basis: &SlepianBasis,
    grid: &GridSpec,
) -> Result<SampledField> {
    if filter.len() > basis.len() {
        return Err(Error::Mismatch(format!(
            "filter of length {} exceeds {} basis functions",
            filter.len(),
            basis.len()
        )));
    }
    let moduli = rendered_moduli(basis, filter.len(), grid)?;
    Ok(std_from_moduli(model.sigma, filter, &moduli, grid))
}

/// Thresholds `T^φ(ω) = N_σ σ^φ(ω)`, one field per filter.
#[derive(Debug, Clone)]
pub struct ThresholdField {
    pub n_sigma: f64,
    pub fields: Vec<(FilterId, SampledField)>,
}

/// Zeroes every sample with `|X^φ(ω)| < T^φ(ω)`; other samples pass unchanged.
pub fn hard_threshold(x: &[SampledField], t: &ThresholdField) -> Result<Vec<SampledField>> {
    if x.len() != t.fields.len() {
        return Err(Error::Mismatch(format!(
            "{} coefficient fields for {} thresholds",
            x.len(),
            t.fields.len()
        )));
    }
    x.iter()
        .zip(&t.fields)
        .map(|(field, (_, threshold))| threshold_one(field, threshold))
        .collect()
}

fn threshold_one(x: &SampledField, t: &SampledField) -> Result<SampledField> {
    if x.grid != t.grid {
        return Err(Error::Mismatch("threshold and coefficient grids differ".into()));
    }
    let values = x
        .values
        .iter()
        .zip(&t.values)
        .map(|(v, th)| if v.norm() < th.re { Complex64::new(0.0, 0.0) } else { *v })
        .collect();
    SampledField::new(x.grid.clone(), values)
}

/// Per-filter thresholding statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleStats {
    pub filter: FilterId,
    pub mean_threshold: f64,
    pub kept_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub denoised: SlepianCoeffs,
    pub stats: Vec<ScaleStats>,
    /// surviving samples per filter, for support comparisons
    pub support: Vec<Vec<bool>>,
}

/// Hard-thresholding denoiser with the noise levels of every filter
/// precomputed on the basis grid.
#[derive(Debug)]
pub struct Denoiser<'a> {
    bank: &'a FilterBank,
    basis: &'a SlepianBasis,
    grid: GridSpec,
    noise_std: Vec<(FilterId, SampledField)>,
}

impl<'a> Denoiser<'a> {
    pub fn new(bank: &'a FilterBank, basis: &'a SlepianBasis, model: &NoiseModel) -> Result<Self> {
        if bank.p_max() > basis.len() {
            return Err(Error::Mismatch(format!(
                "tiling covers {} indices but the basis has {}",
                bank.p_max(),
                basis.len()
            )));
        }
        let grid = make_grid(basis.bandlimit())?;
        let moduli = rendered_moduli(basis, bank.p_max(), &grid)?;
        let noise_std = bank
            .ids()
            .into_iter()
            .map(|id| (id, std_from_moduli(model.sigma, bank.filter(id), &moduli, &grid)))
            .collect();
        Ok(Self {
            bank,
            basis,
            grid,
            noise_std,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn noise_std(&self) -> &[(FilterId, SampledField)] {
        &self.noise_std
    }

    pub fn thresholds(&self, n_sigma: f64) -> ThresholdField {
        ThresholdField {
            n_sigma,
            fields: self
                .noise_std
                .iter()
                .map(|(id, f)| {
                    let values = f.values.iter().map(|v| v * n_sigma).collect();
                    (*id, SampledField { grid: f.grid.clone(), values })
                })
                .collect(),
        }
    }

    /// Analysis, spatial rendering, thresholding at `N_σ σ^φ(ω)`, projection
    /// back to Slepian space and synthesis.
    pub fn denoise(&self, x: &SlepianCoeffs, n_sigma: f64) -> Result<DenoiseOutcome> {
        if !(n_sigma >= 0.0 && n_sigma.is_finite()) {
            return Err(Error::Domain(format!("N_sigma must be non-negative, got {n_sigma}")));
        }
        let p_max = self.bank.p_max();
        let mut w = wavelet_analysis(x, self.bank)?;
        let ids = self.bank.ids();
        let rendered = ids
            .iter()
            .map(|&id| {
                let c = SlepianCoeffs::new(self.basis.bandlimit(), w.get(id).to_vec());
                slepian_synthesis(&c, self.basis, &self.grid)
            })
            .collect::<Result<Vec<_>>>()?;
        let thresholds = self.thresholds(n_sigma);
        let kept = hard_threshold(&rendered, &thresholds)?;
        let mut stats = Vec::with_capacity(ids.len());
        let mut support = Vec::with_capacity(ids.len());
        for ((&id, field), (_, t)) in ids.iter().zip(&kept).zip(&thresholds.fields) {
            let mask: Vec<bool> = field
                .values
                .iter()
                .zip(&t.values)
                .map(|(v, th)| v.norm() >= th.re)
                .collect();
            stats.push(ScaleStats {
                filter: id,
                mean_threshold: t.values.iter().map(|v| v.re).sum::<f64>() / t.values.len() as f64,
                kept_fraction: mask.iter().filter(|&&b| b).count() as f64 / mask.len() as f64,
            });
            support.push(mask);
            let projected = harmonic_to_slepian_first(&forward_sht(field)?, self.basis, p_max)?;
            *w.get_mut(id) = projected.values;
        }
        Ok(DenoiseOutcome {
            denoised: wavelet_synthesis(&w, self.bank)?,
            stats,
            support,
        })
    }
}

/// One-shot denoising of `x` at threshold multiplier `n_sigma`.
pub fn denoise_pipeline(
    x: &SlepianCoeffs,
    bank: &FilterBank,
    basis: &SlepianBasis,
    model: &NoiseModel,
    n_sigma: f64,
) -> Result<SlepianCoeffs> {
    Ok(Denoiser::new(bank, basis, model)?.denoise(x, n_sigma)?.denoised)
}

/// Samples a filter on a grid.
pub fn render_filter(filter: &[f64], basis: &SlepianBasis, grid: &GridSpec) -> Result<SampledField> {
    slepian_synthesis(&filter_coeffs(filter, basis.bandlimit()), basis, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(v: &[f64]) -> SlepianCoeffs {
        SlepianCoeffs::new(4, v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    #[test]
    fn snr_definition() {
        let s = coeffs(&[1.0, 2.0]);
        let x = coeffs(&[1.0 + 5f64.sqrt(), 2.0]);
        assert!(snr(&x, &s).unwrap().abs() < 1e-12);
        let x = coeffs(&[1.0 + 0.5f64.sqrt(), 2.0]);
        assert!((snr(&x, &s).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(snr(&s, &s).unwrap(), f64::INFINITY);
        assert!(snr(&coeffs(&[1.0]), &s).is_err());
    }

    #[test]
    fn sigma_for_target() {
        let s = coeffs(&[1.0, -1.0, 1.0, -1.0]);
        assert!((target_snr_sigma(&s, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(target_snr_sigma(&s, 300.0).unwrap() < 1e-14);
        assert!(target_snr_sigma(&coeffs(&[0.0, 0.0]), 3.0).is_err());
    }

    #[test]
    fn noise_determinism_and_limit() {
        let s = coeffs(&[1.0, 2.0, 3.0]);
        let m = NoiseModel::new(0.3, 9).unwrap();
        assert_eq!(add_white_noise(&s, &m), add_white_noise(&s, &m));
        let tiny = NoiseModel::new(1e-300, 9).unwrap();
        assert_eq!(add_white_noise(&s, &tiny), s);
        assert!(NoiseModel::new(0.0, 1).is_err());
        assert!(NoiseModel::new(-1.0, 1).is_err());
    }

    #[test]
    fn real_signal_gets_real_noise() {
        let s = coeffs(&[1.0; 8]);
        let x = add_white_noise(&s, &NoiseModel::new(1.0, 4).unwrap());
        assert!(x.values.iter().all(|v| v.im == 0.0));
        let mut c = s.clone();
        c.values[0].im = 1.0;
        let x = add_white_noise(&c, &NoiseModel::new(1.0, 4).unwrap());
        assert!(x.values[1..].iter().any(|v| v.im != 0.0));
    }

    #[test]
    fn empirical_noise_variance() {
        let s = SlepianCoeffs::zeros(4, 10_000);
        let sigma = 0.7;
        let x = add_white_noise(&s, &NoiseModel::new(sigma, 1).unwrap());
        let var = x.energy() / x.len() as f64;
        assert!((var - sigma * sigma).abs() / (sigma * sigma) < 0.05);
    }

    #[test]
    fn thresholding_rules() {
        let g = make_grid(3).unwrap();
        let vals: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new(if i % 3 == 0 { 2.0 } else if i % 3 == 1 { -2.0 } else { 0.5 }, 0.0))
            .collect();
        let x = SampledField::new(g.clone(), vals.clone()).unwrap();
        let ones = SampledField::new(g.clone(), vec![Complex64::new(1.0, 0.0); g.len()]).unwrap();
        let t = ThresholdField {
            n_sigma: 1.0,
            fields: vec![(FilterId::Scaling, ones)],
        };
        let out = hard_threshold(std::slice::from_ref(&x), &t).unwrap();
        for (o, v) in out[0].values.iter().zip(&vals) {
            if v.re.abs() >= 1.0 {
                assert_eq!(o, v);
            } else {
                assert_eq!(o.norm(), 0.0);
            }
        }
        let zero = ThresholdField {
            n_sigma: 0.0,
            fields: vec![(FilterId::Scaling, SampledField::zeros(&g))],
        };
        assert_eq!(hard_threshold(std::slice::from_ref(&x), &zero).unwrap()[0], x);
        let huge = ThresholdField {
            n_sigma: 1.0,
            fields: vec![(
                FilterId::Scaling,
                SampledField::new(g.clone(), vec![Complex64::new(1e300, 0.0); g.len()]).unwrap(),
            )],
        };
        let out = hard_threshold(std::slice::from_ref(&x), &huge).unwrap();
        assert!(out[0].values.iter().all(|v| v.norm() == 0.0));
        let other = SampledField::zeros(&make_grid(4).unwrap());
        assert!(hard_threshold(&[other], &zero).is_err());
    }
}
