//! Sampling grid, spherical harmonics and the forward/inverse spherical
//! harmonic transforms.
//!
//! Harmonics are orthonormal with the Condon–Shortley phase, so that
//! `conj(Y_lm) = (-1)^m Y_l(-m)`. Coefficients are stored flat at index
//! `l² + l + m`.
//!
//! The grid places `L` Gauss–Legendre nodes in `cos θ` and `2L - 1`
//! equispaced longitudes. The resulting quadrature integrates every product
//! of two bandlimit-`L` functions exactly, which is what both transforms and
//! the concentration-matrix quadrature rely on.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Flat index of `(l, m)`.
#[inline]
pub fn flat_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Inverse of [`flat_index`].
#[inline]
pub fn degree_order(index: usize) -> (usize, i64) {
    let mut l = (index as f64).sqrt() as usize;
    // float sqrt can be off by one near perfect squares
    while l * l > index {
        l -= 1;
    }
    while (l + 1) * (l + 1) <= index {
        l += 1;
    }
    (l, index as i64 - (l * l + l) as i64)
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Orthonormalised associated Legendre values `P̄_l^m(cos θ)` for `0 ≤ m ≤ l < L`,
/// laid out at `l(l+1)/2 + m`. Includes the `1/√(4π)` factor and the
/// Condon–Shortley phase, so `Y_lm = P̄_l^m e^{imφ}` for `m ≥ 0`.
pub fn normalized_legendre(bandlimit: usize, theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; bandlimit * (bandlimit + 1) / 2];
    if bandlimit == 0 {
        return out;
    }
    let x = theta.cos();
    let s = theta.sin().abs();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..bandlimit {
        if m > 0 {
            let mf = m as f64;
            pmm *= -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[tri(m, m)] = pmm;
        if m + 1 < bandlimit {
            let mf = m as f64;
            out[tri(m + 1, m)] = x * (2.0 * mf + 3.0).sqrt() * pmm;
        }
        for l in (m + 2)..bandlimit {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
    out
}

#[inline]
fn legendre_signed(table: &[f64], l: usize, m: i64) -> f64 {
    let v = table[tri(l, m.unsigned_abs() as usize)];
    if m < 0 && m % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Evaluates `Y_lm(θ, φ)`.
pub fn ylm_eval(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::Domain(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, π]")));
    }
    let table = normalized_legendre(l + 1, theta);
    Ok(Complex64::from_polar(legendre_signed(&table, l, m), m as f64 * phi))
}

/// All `L²` harmonics at one point, in flat order.
pub fn ylm_all(bandlimit: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let table = normalized_legendre(bandlimit, theta);
    let mut out = vec![Complex64::new(0.0, 0.0); bandlimit * bandlimit];
    let phases: Vec<Complex64> = (0..bandlimit)
        .map(|m| Complex64::from_polar(1.0, m as f64 * phi))
        .collect();
    for l in 0..bandlimit {
        for m in 0..=l {
            let v = table[tri(l, m)];
            let y = phases[m] * v;
            out[l * l + l + m] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[l * l + l - m] = y.conj() * sign;
            }
        }
    }
    out
}

/// Sampling grid with its quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    bandlimit: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    /// steradian weight of one sample on each θ-ring
    weights: Vec<f64>,
}

impl GridSpec {
    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }
    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }
    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }
    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta
    }
    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi
    }
    /// Per-sample weight on each θ-ring.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// `(θ, φ, weight)` of the sample at flat position `i * n_phi + k`.
    pub fn node(&self, index: usize) -> (f64, f64, f64) {
        let i = index / self.n_phi();
        let k = index % self.n_phi();
        (self.theta[i], self.phi[k], self.weights[i])
    }
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.n_phi() as f64
    }
}

/// Builds the Gauss–Legendre × equiangular grid for bandlimit `L`.
pub fn make_grid(bandlimit: usize) -> Result<GridSpec> {
    if bandlimit == 0 {
        return Err(Error::Domain("bandlimit must be at least 1".into()));
    }
    let (x, w) = gauss_legendre(bandlimit);
    let n_phi = 2 * bandlimit - 1;
    let dphi = 2.0 * PI / n_phi as f64;
    Ok(GridSpec {
        bandlimit,
        theta: x.iter().map(|&c| c.clamp(-1.0, 1.0).acos()).collect(),
        phi: (0..n_phi).map(|k| k as f64 * dphi).collect(),
        weights: w.iter().map(|&v| v * dphi).collect(),
    })
}

/// Complex samples on a grid, θ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let values = grid.nodes().map(|(t, p, _)| f(t, p)).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Quadrature of `f · conj(g)` over the sphere.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Mismatch("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a * b.conj() * self.grid.weights[i / self.grid.n_phi()])
            .sum())
    }
}

/// Spherical harmonic coefficients `f_lm`, `l < L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoeffs {
    bandlimit: usize,
    coeffs: Vec<Complex64>,
}

impl HarmonicCoeffs {
    pub fn zeros(bandlimit: usize) -> Self {
        Self {
            bandlimit,
            coeffs: vec![Complex64::new(0.0, 0.0); bandlimit * bandlimit],
        }
    }

    pub fn from_vec(bandlimit: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != bandlimit * bandlimit {
            return Err(Error::Mismatch(format!(
                "{} coefficients for bandlimit {bandlimit}",
                coeffs.len()
            )));
        }
        Ok(Self { bandlimit, coeffs })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
    pub fn into_vec(self) -> Vec<Complex64> {
        self.coeffs
    }
    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[flat_index(l, m)]
    }
    pub fn set(&mut self, l: usize, m: i64, value: Complex64) {
        self.coeffs[flat_index(l, m)] = value;
    }

    /// Largest violation of `conj(f_lm) = (-1)^m f_l(-m)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for l in 0..self.bandlimit {
            for m in 0..=(l as i64) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let d = (self.get(l, m).conj() - self.get(l, -m) * sign).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Evaluates the expansion at a single point.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Complex64 {
        ylm_all(self.bandlimit, theta, phi)
            .iter()
            .zip(&self.coeffs)
            .map(|(y, c)| y * c)
            .sum()
    }

    /// Same expansion with a larger or smaller bandlimit (zero padded or truncated).
    pub fn with_bandlimit(&self, bandlimit: usize) -> Self {
        let mut out = Self::zeros(bandlimit);
        let n = bandlimit.min(self.bandlimit);
        out.coeffs[..n * n].copy_from_slice(&self.coeffs[..n * n]);
        out
    }
}

fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Projects a sampled field onto the harmonics of its grid's bandlimit.
pub fn forward_sht(field: &SampledField) -> Result<HarmonicCoeffs> {
    let grid = &field.grid;
    if field.values.len() != grid.len() {
        return Err(Error::Mismatch(format!(
            "field has {} samples, grid has {}",
            field.values.len(),
            grid.len()
        )));
    }
    let lmax = grid.bandlimit;
    let n_phi = grid.n_phi();
    let tw = twiddles(n_phi, -1.0);
    let mut out = HarmonicCoeffs::zeros(lmax);
    let mut ring = vec![Complex64::new(0.0, 0.0); 2 * lmax - 1];
    for (i, &theta) in grid.theta.iter().enumerate() {
        let row = &field.values[i * n_phi..(i + 1) * n_phi];
        for (slot, m) in ring.iter_mut().zip(-(lmax as i64 - 1)..lmax as i64) {
            let mm = m.rem_euclid(n_phi as i64) as usize;
            *slot = row
                .iter()
                .enumerate()
                .map(|(k, v)| v * tw[(mm * k) % n_phi])
                .sum::<Complex64>()
                * grid.weights[i];
        }
        let table = normalized_legendre(lmax, theta);
        for l in 0..lmax {
            for m in -(l as i64)..=(l as i64) {
                let f = ring[(m + lmax as i64 - 1) as usize];
                out.coeffs[flat_index(l, m)] += f * legendre_signed(&table, l, m);
            }
        }
    }
    Ok(out)
}

/// Synthesises coefficients onto a grid whose bandlimit is at least theirs.
pub fn inverse_sht(coeffs: &HarmonicCoeffs, grid: &GridSpec) -> Result<SampledField> {
    let lmax = coeffs.bandlimit;
    if lmax > grid.bandlimit {
        return Err(Error::Mismatch(format!(
            "coefficients at bandlimit {lmax} exceed grid bandlimit {}",
            grid.bandlimit
        )));
    }
    let n_phi = grid.n_phi();
    let tw = twiddles(n_phi, 1.0);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    if lmax == 0 {
        return SampledField::new(grid.clone(), values);
    }
    let mut ring = vec![Complex64::new(0.0, 0.0); 2 * lmax - 1];
    for (i, &theta) in grid.theta.iter().enumerate() {
        let table = normalized_legendre(lmax, theta);
        ring.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for l in 0..lmax {
            for m in -(l as i64)..=(l as i64) {
                ring[(m + lmax as i64 - 1) as usize] +=
                    coeffs.coeffs[flat_index(l, m)] * legendre_signed(&table, l, m);
            }
        }
        for k in 0..n_phi {
            let mut acc = Complex64::new(0.0, 0.0);
            for (slot, m) in ring.iter().zip(-(lmax as i64 - 1)..lmax as i64) {
                let mm = m.rem_euclid(n_phi as i64) as usize;
                acc += slot * tw[(mm * k) % n_phi];
            }
            values[i * n_phi + k] = acc;
        }
    }
    SampledField::new(grid.clone(), values)
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_coeffs(bandlimit: usize, seed: u64) -> HarmonicCoeffs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..bandlimit * bandlimit)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        HarmonicCoeffs::from_vec(bandlimit, v).unwrap()
    }

    #[test]
    fn flat_index_round_trip() {
        for idx in 0..400 {
            let (l, m) = degree_order(idx);
            assert!(m.unsigned_abs() as usize <= l);
            assert_eq!(flat_index(l, m), idx);
        }
    }

    #[test]
    fn y00_is_constant() {
        for &(t, p) in &[(0.0, 0.0), (1.0, 2.0), (PI, 5.0)] {
            let y = ylm_eval(0, 0, t, p).unwrap();
            assert!((y.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
            assert!(y.im.abs() < 1e-15);
        }
    }

    #[test]
    fn y10_at_pole() {
        let y = ylm_eval(1, 0, 0.0, 0.0).unwrap();
        assert!((y.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn closed_form_low_degrees() {
        let (t, p) = (0.7, 1.3);
        let y11 = ylm_eval(1, 1, t, p).unwrap();
        let expect = -Complex64::from_polar((3.0 / (8.0 * PI)).sqrt() * t.sin(), p);
        assert!((y11 - expect).norm() < 1e-14);
        let y20 = ylm_eval(2, 0, t, p).unwrap();
        let expect = (5.0 / (16.0 * PI)).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        assert!((y20.re - expect).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(ylm_eval(2, 3, 0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ylm_eval(2, -3, 0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ylm_eval(2, 1, -0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ylm_eval(2, 1, 4.0, 0.0), Err(Error::Domain(_))));
        assert!(make_grid(0).is_err());
    }

    #[test]
    fn conjugation_convention() {
        let (t, p) = (1.1, 0.4);
        for l in 0..8usize {
            for m in 0..=(l as i64) {
                let a = ylm_eval(l, m, t, p).unwrap().conj();
                let b = ylm_eval(l, -m, t, p).unwrap() * if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn addition_theorem_sum_of_squares() {
        for l in 0..20usize {
            let s: f64 = (-(l as i64)..=l as i64)
                .map(|m| ylm_eval(l, m, 0.9, 2.2).unwrap().norm_sqr())
                .sum();
            assert!((s - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_weights() {
        for l in [1usize, 2, 8, 33] {
            let g = make_grid(l).unwrap();
            assert!((g.total_weight() - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
            assert!(g.weights().iter().all(|&w| w > 0.0));
            assert!(g.theta_nodes().iter().all(|&t| (0.0..=PI).contains(&t)));
            assert!(g.phi_nodes().iter().all(|&p| (0.0..2.0 * PI).contains(&p)));
        }
    }

    #[test]
    fn sht_delta_and_constant() {
        let g = make_grid(6).unwrap();
        let y21 = SampledField::from_fn(&g, |t, p| ylm_eval(2, 1, t, p).unwrap());
        let c = forward_sht(&y21).unwrap();
        for (i, v) in c.as_slice().iter().enumerate() {
            let target = if i == flat_index(2, 1) { 1.0 } else { 0.0 };
            assert!((v - target).norm() < 1e-12);
        }
        let constant = SampledField::from_fn(&g, |_, _| Complex64::new(2.5, 0.0));
        let c = forward_sht(&constant).unwrap();
        assert!((c.get(0, 0).re - 2.5 * (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(c.as_slice()[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn inverse_of_delta_matches_eval() {
        let g = make_grid(7).unwrap();
        let mut a = HarmonicCoeffs::zeros(7);
        a.set(3, -2, Complex64::new(1.0, 0.0));
        let f = inverse_sht(&a, &g).unwrap();
        for (idx, (t, p, _)) in g.nodes().enumerate() {
            assert!((f.values[idx] - ylm_eval(3, -2, t, p).unwrap()).norm() < 1e-12);
        }
        let zero = inverse_sht(&HarmonicCoeffs::zeros(7), &g).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn inverse_rejects_larger_bandlimit() {
        let g = make_grid(4).unwrap();
        assert!(matches!(inverse_sht(&HarmonicCoeffs::zeros(5), &g), Err(Error::Mismatch(_))));
    }

    #[test]
    fn forward_rejects_bad_field() {
        let g = make_grid(4).unwrap();
        let f = SampledField {
            grid: g,
            values: vec![Complex64::new(0.0, 0.0); 3],
        };
        assert!(forward_sht(&f).is_err());
    }

    #[test]
    fn round_trip_random() {
        for &l in &[4usize, 16, 32] {
            let a = random_coeffs(l, l as u64);
            let g = make_grid(l).unwrap();
            let back = forward_sht(&inverse_sht(&a, &g).unwrap()).unwrap();
            let scale = a.as_slice().iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = a
                .as_slice()
                .iter()
                .zip(back.as_slice())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10 * scale, "L={l} err={err}");
        }
    }

    #[test]
    fn real_coefficients_give_real_field() {
        let mut a = random_coeffs(12, 3);
        for l in 0..12usize {
            let c = a.get(l, 0);
            a.set(l, 0, Complex64::new(c.re, 0.0));
            for m in 1..=(l as i64) {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let v = a.get(l, m).conj() * sign;
                a.set(l, -m, v);
            }
        }
        assert!(a.reality_defect() < 1e-14);
        let f = inverse_sht(&a, &make_grid(12).unwrap()).unwrap();
        let re = f.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let im = f.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(im < 1e-10 * re);
    }

    #[test]
    fn legendre_polynomial_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert!((legendre_p(2, 0.5) - (-0.125)).abs() < 1e-15);
        assert!((legendre_p(7, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn high_bandlimit_is_finite() {
        let t = normalized_legendre(129, 0.01);
        assert!(t.iter().all(|v| v.is_finite()));
    }
}
