//! Scale-discretised wavelets on the Slepian line.
//!
//! The generating functions tile the index line `p = 1, 2, …` so that the
//! scaling filter and the wavelet filters satisfy
//! `Φ_p² + Σ_j (Ψ^j_p)² = 1` for every `p`, which makes analysis followed
//! by synthesis the identity.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::basis::{SlepianBasis, SlepianCoeffs};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

const K_QUAD_TOL: f64 = 1e-13;
/// Largest admissibility residual accepted when building a bank.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

/// `exp(1/(t²-1))` on `(-1, 1)`, zero elsewhere.
pub fn schwartz_s(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 / (t * t - 1.0)).exp()
    } else {
        0.0
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("lambda must exceed 1, got {lambda}")))
    }
}

fn s_lambda_unchecked(t: f64, lambda: f64) -> f64 {
    schwartz_s(2.0 * lambda / (lambda - 1.0) * (t - 1.0 / lambda) - 1.0)
}

/// The Schwartz bump moved onto `[1/λ, 1]`.
pub fn s_lambda(t: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(s_lambda_unchecked(t, lambda))
}

/// Evaluator for `k_λ` that keeps the normalising integral and memoises
/// values, since a filter bank only ever asks for `p / λ^j`.
#[derive(Debug, Clone)]
pub struct KLambda {
    lambda: f64,
    norm: f64,
    memo: HashMap<u64, f64>,
}

impl KLambda {
    pub fn new(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let norm = integrate_adaptive(
            |t| s_lambda_unchecked(t, lambda).powi(2) / t,
            1.0 / lambda,
            1.0,
            K_QUAD_TOL,
        )
        .filter(|v| *v > 0.0)
        .ok_or_else(|| Error::Numerical(format!("k_lambda normalisation failed for lambda={lambda}")))?;
        Ok(Self {
            lambda,
            norm,
            memo: HashMap::new(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eval(&mut self, t: f64) -> Result<f64> {
        if t <= 1.0 / self.lambda {
            return Ok(1.0);
        }
        if t >= 1.0 {
            return Ok(0.0);
        }
        if let Some(v) = self.memo.get(&t.to_bits()) {
            return Ok(*v);
        }
        let lambda = self.lambda;
        let upper = integrate_adaptive(
            |x| s_lambda_unchecked(x, lambda).powi(2) / x,
            t,
            1.0,
            K_QUAD_TOL,
        )
        .ok_or_else(|| Error::Numerical(format!("k_lambda quadrature failed at t={t}")))?;
        let v = (upper / self.norm).clamp(0.0, 1.0);
        self.memo.insert(t.to_bits(), v);
        Ok(v)
    }
}

/// Smooth step: 1 below `1/λ`, 0 above 1.
pub fn k_lambda(t: f64, lambda: f64) -> Result<f64> {
    KLambda::new(lambda)?.eval(t)
}

/// Wavelet generating function `√(k_λ(t/λ) - k_λ(t))`.
pub fn kappa_lambda(t: f64, lambda: f64) -> Result<f64> {
    let mut k = KLambda::new(lambda)?;
    Ok((k.eval(t / lambda)? - k.eval(t)?).max(0.0).sqrt())
}

/// Scaling generating function `√(k_λ(t))`.
pub fn eta_lambda(t: f64, lambda: f64) -> Result<f64> {
    Ok(k_lambda(t, lambda)?.sqrt())
}

/// Tiling parameters: dilation `λ`, lowest wavelet scale `J0`, and the
/// length of the tiled index line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TilingParams {
    pub lambda: f64,
    pub j0: u32,
    pub p_max: usize,
}

impl TilingParams {
    pub fn new(lambda: f64, j0: u32, p_max: usize) -> Result<Self> {
        check_lambda(lambda)?;
        if p_max == 0 {
            return Err(Error::Domain("tiling domain is empty".into()));
        }
        let params = Self { lambda, j0, p_max };
        let j = params.j_max();
        if j0 >= j {
            return Err(Error::Domain(format!(
                "J0 = {j0} must be below J = {j} for lambda={lambda}, P_max={p_max}"
            )));
        }
        Ok(params)
    }

    /// `J = ⌈log_λ P_max⌉`, the smallest `J` with `λ^J ≥ P_max`.
    pub fn j_max(&self) -> u32 {
        let mut j = 0u32;
        let mut power = 1.0;
        while power < self.p_max as f64 {
            power *= self.lambda;
            j += 1;
        }
        j
    }
}

/// Which filter of a bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterId {
    Scaling,
    Wavelet(u32),
}

impl fmt::Display for FilterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterId::Scaling => f.write_str("scaling"),
            FilterId::Wavelet(j) => write!(f, "wavelet_j{j}"),
        }
    }
}

/// Real Slepian-space filters `Φ_p` and `Ψ^j_p`, `p = 1..P_max` stored at `p - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    params: TilingParams,
    j_max: u32,
    scaling: Vec<f64>,
    wavelets: Vec<Vec<f64>>,
}

impl FilterBank {
    pub fn params(&self) -> TilingParams {
        self.params
    }
    pub fn j0(&self) -> u32 {
        self.params.j0
    }
    pub fn j_max(&self) -> u32 {
        self.j_max
    }
    pub fn p_max(&self) -> usize {
        self.params.p_max
    }
    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }
    pub fn wavelet(&self, j: u32) -> &[f64] {
        &self.wavelets[(j - self.params.j0) as usize]
    }
    pub fn scales(&self) -> impl Iterator<Item = u32> {
        self.params.j0..=self.j_max
    }
    pub fn filter(&self, id: FilterId) -> &[f64] {
        match id {
            FilterId::Scaling => &self.scaling,
            FilterId::Wavelet(j) => self.wavelet(j),
        }
    }
    /// Scaling filter followed by every wavelet scale.
    pub fn ids(&self) -> Vec<FilterId> {
        std::iter::once(FilterId::Scaling)
            .chain(self.scales().map(FilterId::Wavelet))
            .collect()
    }

    /// Largest `|Φ_p² + Σ_j (Ψ^j_p)² - 1|` over the tiling domain.
    pub fn admissibility_residual(&self) -> f64 {
        (0..self.params.p_max)
            .map(|i| {
                let total = self.scaling[i].powi(2)
                    + self.wavelets.iter().map(|w| w[i].powi(2)).sum::<f64>();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Rebuilds a bank from dumped filters, checking shape and admissibility.
    pub fn from_parts(params: TilingParams, scaling: Vec<f64>, wavelets: Vec<Vec<f64>>) -> Result<Self> {
        let j_max = params.j_max();
        if scaling.len() != params.p_max
            || wavelets.len() != (j_max - params.j0 + 1) as usize
            || wavelets.iter().any(|w| w.len() != params.p_max)
        {
            return Err(Error::Mismatch("filter bank dump does not match its header".into()));
        }
        let bank = Self {
            params,
            j_max,
            scaling,
            wavelets,
        };
        let residual = bank.admissibility_residual();
        if residual > ADMISSIBILITY_TOL {
            return Err(Error::Numerical(format!("admissibility residual {residual:e}")));
        }
        Ok(bank)
    }
}

/// Tiles `p = 1..P_max` with `Φ_p = η_λ(p/λ^{J0})` and `Ψ^j_p = κ_λ(p/λ^j)`.
pub fn build_filter_bank(params: TilingParams) -> Result<FilterBank> {
    let params = TilingParams::new(params.lambda, params.j0, params.p_max)?;
    let j_max = params.j_max();
    let mut k = KLambda::new(params.lambda)?;
    let powers: Vec<f64> = (0..=j_max + 1).map(|j| params.lambda.powi(j as i32)).collect();
    let n_scales = (j_max - params.j0 + 1) as usize;
    let mut scaling = vec![0.0; params.p_max];
    let mut wavelets = vec![vec![0.0; params.p_max]; n_scales];
    for p in 1..=params.p_max {
        let pf = p as f64;
        // k(p / λ^j) for j = J0..=J+1, shared between neighbouring scales
        let ks = (params.j0..=j_max + 1)
            .map(|j| k.eval(pf / powers[j as usize]))
            .collect::<Result<Vec<f64>>>()?;
        scaling[p - 1] = ks[0].sqrt();
        for s in 0..n_scales {
            wavelets[s][p - 1] = (ks[s + 1] - ks[s]).max(0.0).sqrt();
        }
    }
    let bank = FilterBank {
        params,
        j_max,
        scaling,
        wavelets,
    };
    let residual = bank.admissibility_residual();
    if residual > ADMISSIBILITY_TOL {
        return Err(Error::Numerical(format!(
            "admissibility residual {residual:e} exceeds {ADMISSIBILITY_TOL:e}"
        )));
    }
    Ok(bank)
}

/// Scaling and wavelet coefficients in Slepian space.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients {
    pub bandlimit: usize,
    pub j0: u32,
    pub j_max: u32,
    pub scaling: Vec<Complex64>,
    /// one vector per scale `J0..=J`
    pub wavelets: Vec<Vec<Complex64>>,
    /// input coefficients beyond `P_max` that were left out
    pub discarded: usize,
}

impl WaveletCoefficients {
    pub fn get(&self, id: FilterId) -> &[Complex64] {
        match id {
            FilterId::Scaling => &self.scaling,
            FilterId::Wavelet(j) => &self.wavelets[(j - self.j0) as usize],
        }
    }
    pub fn get_mut(&mut self, id: FilterId) -> &mut Vec<Complex64> {
        match id {
            FilterId::Scaling => &mut self.scaling,
            FilterId::Wavelet(j) => &mut self.wavelets[(j - self.j0) as usize],
        }
    }
}

/// `W^Φ_p = Φ_p conj(f_p)` and `W^{Ψj}_p = Ψ^j_p conj(f_p)`.
///
/// Inputs shorter than `P_max` are zero padded; entries past `P_max` are
/// dropped and counted in [`WaveletCoefficients::discarded`].
pub fn wavelet_analysis(f: &SlepianCoeffs, bank: &FilterBank) -> Result<WaveletCoefficients> {
    let p_max = bank.p_max();
    let discarded = f.len().saturating_sub(p_max);
    let coeff = |p: usize| f.values.get(p).copied().unwrap_or_default();
    let apply = |filter: &[f64]| -> Vec<Complex64> {
        filter.iter().enumerate().map(|(p, &h)| coeff(p).conj() * h).collect()
    };
    Ok(WaveletCoefficients {
        bandlimit: f.bandlimit,
        j0: bank.j0(),
        j_max: bank.j_max(),
        scaling: apply(bank.scaling()),
        wavelets: bank.scales().map(|j| apply(bank.wavelet(j))).collect(),
        discarded,
    })
}

/// `f_p = conj(W^Φ_p) Φ_p + Σ_j conj(W^{Ψj}_p) Ψ^j_p` for `p ≤ P_max`.
pub fn wavelet_synthesis(w: &WaveletCoefficients, bank: &FilterBank) -> Result<SlepianCoeffs> {
    if w.j0 != bank.j0()
        || w.j_max != bank.j_max()
        || w.wavelets.len() != (bank.j_max() - bank.j0() + 1) as usize
    {
        return Err(Error::Mismatch(format!(
            "coefficients cover scales {}..={} but bank has {}..={}",
            w.j0,
            w.j_max,
            bank.j0(),
            bank.j_max()
        )));
    }
    let p_max = bank.p_max();
    if w.scaling.len() != p_max || w.wavelets.iter().any(|v| v.len() != p_max) {
        return Err(Error::Mismatch("coefficient length differs from P_max".into()));
    }
    let values = (0..p_max)
        .map(|p| {
            let mut acc = w.scaling[p].conj() * bank.scaling()[p];
            for (s, j) in bank.scales().enumerate() {
                acc += w.wavelets[s][p].conj() * bank.wavelet(j)[p];
            }
            acc
        })
        .collect();
    Ok(SlepianCoeffs::new(w.bandlimit, values))
}

/// `‖φ‖² = Σ_p |φ_p|²`, the spatial energy of a filter by orthonormality.
pub fn wavelet_energy(filter: &[f64], basis: &SlepianBasis) -> Result<f64> {
    if filter.len() > basis.len() {
        return Err(Error::Mismatch(format!(
            "filter of length {} exceeds {} basis functions",
            filter.len(),
            basis.len()
        )));
    }
    Ok(filter.iter().map(|v| v * v).sum())
}

/// A filter as Slepian coefficients, ready for spatial rendering.
pub fn filter_coeffs(filter: &[f64], bandlimit: usize) -> SlepianCoeffs {
    SlepianCoeffs::new(
        bandlimit,
        filter.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
    )
}
