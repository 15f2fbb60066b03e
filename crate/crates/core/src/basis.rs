//! Slepian concentration problem: the concentration matrix of a region, its
//! eigendecomposition, and conversions between harmonic, Slepian and pixel
//! representations.

use std::f64::consts::PI;

use faer::{c64, Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;
use crate::region::{Region, RegionKind};
use crate::sphere::{
    flat_index, forward_sht, inverse_sht, normalized_legendre, ylm_all, GridSpec, HarmonicCoeffs,
    SampledField,
};

/// Eigenvalues are clamped into `[EIG_EPS, 1 - EIG_EPS]`.
pub const EIG_EPS: f64 = 1e-14;
/// Raw eigenvalues further than this outside `[0, 1]` indicate a broken matrix.
pub const EIG_RANGE_TOL: f64 = 1e-10;
/// Eigenvalues within this relative distance are one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Default floor on `μ_p` for region-restricted analysis.
pub const DEFAULT_MU_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
enum Storage {
    Dense(Mat<c64>),
    /// Real symmetric block per order `m ≥ 0` over degrees `l = m..L`;
    /// the `-m` block is identical.
    OrderBlocks(Vec<Mat<f64>>),
}

/// Hermitian matrix `K_{lm,l'm'} = ∫_R Y_lm conj(Y_l'm') dΩ`.
#[derive(Debug, Clone)]
pub struct ConcentrationMatrix {
    bandlimit: usize,
    storage: Storage,
}

impl ConcentrationMatrix {
    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn dim(&self) -> usize {
        self.bandlimit * self.bandlimit
    }

    /// Entry at flat indices `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(k) => k[(i, j)],
            Storage::OrderBlocks(blocks) => {
                let (l1, m1) = crate::sphere::degree_order(i);
                let (l2, m2) = crate::sphere::degree_order(j);
                if m1 != m2 {
                    return Complex64::new(0.0, 0.0);
                }
                let m = m1.unsigned_abs() as usize;
                Complex64::new(blocks[m][(l1 - m, l2 - m)], 0.0)
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }

    /// Largest `|K - K†|` entry.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_block_diagonal_in_order(&self) -> bool {
        matches!(self.storage, Storage::OrderBlocks(_))
    }
}

/// Assembles the concentration matrix of `region` at the grid's bandlimit.
pub fn assemble_k_matrix(region: &Region, grid: &GridSpec) -> Result<ConcentrationMatrix> {
    let lmax = grid.bandlimit();
    if let RegionKind::GridMask { grid: mask_grid, .. } = region.kind() {
        if mask_grid.bandlimit() < lmax {
            return Err(Error::Mismatch(format!(
                "region mask sampled at bandlimit {} cannot resolve bandlimit {lmax}",
                mask_grid.bandlimit()
            )));
        }
    }
    if region.is_north_polar_cap() {
        let RegionKind::PolarCap { opening, .. } = region.kind() else {
            unreachable!()
        };
        return Ok(ConcentrationMatrix {
            bandlimit: lmax,
            storage: Storage::OrderBlocks(axisymmetric_blocks(lmax, *opening)),
        });
    }
    let q = region.quadrature(lmax);
    let n = lmax * lmax;
    let mut b = Mat::<c64>::zeros(q.len(), n);
    for i in 0..q.len() {
        let y = ylm_all(lmax, q.theta[i], q.phi[i]);
        let sw = q.weight[i].sqrt();
        for (j, v) in y.iter().enumerate() {
            b[(i, j)] = v.conj() * sw;
        }
    }
    let k: Mat<c64> = b.adjoint() * &b;
    let sym = Mat::<c64>::from_fn(n, n, |i, j| (k[(i, j)] + k[(j, i)].conj()) * 0.5);
    Ok(ConcentrationMatrix {
        bandlimit: lmax,
        storage: Storage::Dense(sym),
    })
}

fn axisymmetric_blocks(lmax: usize, opening: f64) -> Vec<Mat<f64>> {
    let (x, w) = gauss_legendre_on(lmax, opening.cos(), 1.0);
    let tables: Vec<Vec<f64>> = x
        .iter()
        .map(|&c| normalized_legendre(lmax, c.clamp(-1.0, 1.0).acos()))
        .collect();
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    (0..lmax)
        .map(|m| {
            let size = lmax - m;
            let mut block = Mat::<f64>::zeros(size, size);
            for a in 0..size {
                for b in 0..=a {
                    let v: f64 = tables
                        .iter()
                        .zip(&w)
                        .map(|(t, w)| w * t[tri(a + m, m)] * t[tri(b + m, m)])
                        .sum::<f64>()
                        * 2.0
                        * PI;
                    block[(a, b)] = v;
                    block[(b, a)] = v;
                }
            }
            block
        })
        .collect()
}

/// Spherical analogue of the Shannon number, `N = (A / 4π) L²`.
pub fn shannon_number(region: &Region, bandlimit: usize) -> f64 {
    region.area() / (4.0 * PI) * (bandlimit * bandlimit) as f64
}

/// Eigenvalues (descending) and eigenvectors of a concentration matrix.
#[derive(Debug, Clone)]
pub struct SlepianBasis {
    bandlimit: usize,
    region: Region,
    eigenvalues: Vec<f64>,
    /// column-major, `L²` harmonic coefficients per eigenvector
    vectors: Vec<Complex64>,
    shannon: f64,
}

impl SlepianBasis {
    /// Reassembles a basis from stored parts (used by the cache reader).
    pub fn from_parts(
        bandlimit: usize,
        region: Region,
        eigenvalues: Vec<f64>,
        vectors: Vec<Complex64>,
    ) -> Result<Self> {
        let n = bandlimit * bandlimit;
        if eigenvalues.len() > n || vectors.len() != eigenvalues.len() * n {
            return Err(Error::Mismatch(format!(
                "{} eigenvalues and {} vector entries for bandlimit {bandlimit}",
                eigenvalues.len(),
                vectors.len()
            )));
        }
        let shannon = shannon_number(&region, bandlimit);
        Ok(Self {
            bandlimit,
            region,
            eigenvalues,
            vectors,
            shannon,
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }
    pub fn region(&self) -> &Region {
        &self.region
    }
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    pub fn shannon_number(&self) -> f64 {
        self.shannon
    }
    /// Number of stored eigenpairs.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
    /// `⌈N⌉`, clamped to the number of stored eigenpairs.
    pub fn shannon_truncation(&self) -> usize {
        (self.shannon.ceil() as usize).clamp(1, self.len())
    }
    /// Harmonic coefficients of `S_{p+1}` (zero-based `p`).
    pub fn eigenvector(&self, p: usize) -> &[Complex64] {
        let n = self.bandlimit * self.bandlimit;
        &self.vectors[p * n..(p + 1) * n]
    }

    /// Keeps the `count` best-concentrated eigenpairs.
    pub fn truncated(&self, count: usize) -> Self {
        let count = count.min(self.len());
        let n = self.bandlimit * self.bandlimit;
        Self {
            bandlimit: self.bandlimit,
            region: self.region.clone(),
            eigenvalues: self.eigenvalues[..count].to_vec(),
            vectors: self.vectors[..count * n].to_vec(),
            shannon: self.shannon,
        }
    }

    /// Values `S_p(θ, φ)` for `p < count` at one point.
    pub fn evaluate(&self, count: usize, theta: f64, phi: f64) -> Vec<Complex64> {
        let y = ylm_all(self.bandlimit, theta, phi);
        (0..count)
            .map(|p| self.eigenvector(p).iter().zip(&y).map(|(s, y)| s * y).sum())
            .collect()
    }

    /// Samples of `S_p` on a grid, for `p < count`.
    pub fn render(&self, count: usize, grid: &GridSpec) -> Result<Vec<SampledField>> {
        (0..count)
            .map(|p| {
                let coeffs = HarmonicCoeffs::from_vec(self.bandlimit, self.eigenvector(p).to_vec())?;
                inverse_sht(&coeffs, grid)
            })
            .collect()
    }
}

fn phase_fix_and_dominant(v: &mut [Complex64]) -> usize {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dominant = v
        .iter()
        .position(|c| c.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let phase = v[dominant].conj() / v[dominant].norm();
    for c in v.iter_mut() {
        *c = *c * phase / norm;
    }
    dominant
}

/// Full eigendecomposition of the concentration matrix.
///
/// Eigenvalues are sorted in descending order and clamped into
/// `(0, 1)`; each eigenvector is normalised and rotated so that its
/// largest component is real and positive. Within a cluster of
/// eigenvalues lying within a relative [`DEGENERACY_TOL`] of the cluster's
/// largest value, vectors are ordered by the flat harmonic index of their
/// dominant component.
pub fn solve_eigenproblem(k: &ConcentrationMatrix, region: &Region) -> Result<SlepianBasis> {
    let lmax = k.bandlimit;
    let n = lmax * lmax;
    let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::with_capacity(n);
    match &k.storage {
        Storage::Dense(mat) => {
            let evd = mat.self_adjoint_eigen(Side::Lower).map_err(|e| {
                Error::Numerical(format!(
                    "Hermitian eigensolver failed ({e:?}) on {n}x{n} matrix with trace {:.6e}, hermitian defect {:.3e}",
                    k.trace(),
                    k.hermitian_defect()
                ))
            })?;
            let s = evd.S().column_vector();
            let u = evd.U();
            for c in 0..n {
                let v: Vec<Complex64> = (0..n).map(|r| u[(r, c)]).collect();
                pairs.push((s[c].re, v));
            }
        }
        Storage::OrderBlocks(blocks) => {
            for (m, block) in blocks.iter().enumerate() {
                let evd = block.self_adjoint_eigen(Side::Lower).map_err(|e| {
                    Error::Numerical(format!("symmetric eigensolver failed ({e:?}) on order-{m} block"))
                })?;
                let s = evd.S().column_vector();
                let u = evd.U();
                let orders: &[i64] = if m == 0 { &[0] } else { &[m as i64, -(m as i64)] };
                for &order in orders {
                    for c in 0..block.nrows() {
                        let mut v = vec![Complex64::new(0.0, 0.0); n];
                        for r in 0..block.nrows() {
                            v[flat_index(r + m, order)] = Complex64::new(u[(r, c)], 0.0);
                        }
                        pairs.push((s[c], v));
                    }
                }
            }
        }
    }

    let mut entries = Vec::with_capacity(n);
    for (mu, mut v) in pairs {
        if !(-EIG_RANGE_TOL..=1.0 + EIG_RANGE_TOL).contains(&mu) {
            return Err(Error::Numerical(format!(
                "concentration eigenvalue {mu:e} outside [0, 1]"
            )));
        }
        let dominant = phase_fix_and_dominant(&mut v);
        entries.push((mu.clamp(EIG_EPS, 1.0 - EIG_EPS), dominant, v));
    }
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    // Degenerate clusters are measured against their leading value, without
    // chaining, so the dense tail of tiny eigenvalues does not merge.
    let mut start = 0;
    while start < entries.len() {
        let head = entries[start].0;
        let mut end = start + 1;
        while end < entries.len() && head - entries[end].0 <= DEGENERACY_TOL * head {
            end += 1;
        }
        let values: Vec<f64> = entries[start..end].iter().map(|e| e.0).collect();
        entries[start..end].sort_by_key(|e| e.1);
        for (e, mu) in entries[start..end].iter_mut().zip(values) {
            e.0 = mu;
        }
        start = end;
    }

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for (mu, _, v) in entries {
        eigenvalues.push(mu);
        vectors.extend(v);
    }
    SlepianBasis::from_parts(lmax, region.clone(), eigenvalues, vectors)
}

/// Convenience: grid, concentration matrix and eigendecomposition in one go.
pub fn build_basis(region: &Region, bandlimit: usize) -> Result<SlepianBasis> {
    let grid = crate::sphere::make_grid(bandlimit)?;
    let k = assemble_k_matrix(region, &grid)?;
    solve_eigenproblem(&k, region)
}

/// Slepian coefficients `f_p` for `p = 1..P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlepianCoeffs {
    pub bandlimit: usize,
    pub values: Vec<Complex64>,
}

impl SlepianCoeffs {
    pub fn new(bandlimit: usize, values: Vec<Complex64>) -> Self {
        Self { bandlimit, values }
    }
    pub fn zeros(bandlimit: usize, count: usize) -> Self {
        Self::new(bandlimit, vec![Complex64::new(0.0, 0.0); count])
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn truncated(&self, count: usize) -> Self {
        let mut values = self.values.clone();
        values.resize(count, Complex64::new(0.0, 0.0));
        Self::new(self.bandlimit, values)
    }
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// `f_lm = Σ_p f_p (S_p)_lm`.
pub fn slepian_to_harmonic(c: &SlepianCoeffs, basis: &SlepianBasis) -> Result<HarmonicCoeffs> {
    if c.len() > basis.len() {
        return Err(Error::Mismatch(format!(
            "{} Slepian coefficients but only {} basis functions",
            c.len(),
            basis.len()
        )));
    }
    let n = basis.bandlimit * basis.bandlimit;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (p, fp) in c.values.iter().enumerate() {
        if *fp == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, s) in out.iter_mut().zip(basis.eigenvector(p)) {
            *o += fp * s;
        }
    }
    HarmonicCoeffs::from_vec(basis.bandlimit, out)
}

/// `f_p = Σ_lm f_lm conj((S_p)_lm)` for every stored `p`.
pub fn harmonic_to_slepian(a: &HarmonicCoeffs, basis: &SlepianBasis) -> Result<SlepianCoeffs> {
    harmonic_to_slepian_first(a, basis, basis.len())
}

/// As [`harmonic_to_slepian`], keeping only the first `count` coefficients.
pub fn harmonic_to_slepian_first(
    a: &HarmonicCoeffs,
    basis: &SlepianBasis,
    count: usize,
) -> Result<SlepianCoeffs> {
    if a.bandlimit() != basis.bandlimit {
        return Err(Error::Mismatch(format!(
            "harmonic bandlimit {} differs from basis bandlimit {}",
            a.bandlimit(),
            basis.bandlimit
        )));
    }
    if count > basis.len() {
        return Err(Error::Mismatch(format!("{count} coefficients requested from {} basis functions", basis.len())));
    }
    let values = (0..count)
        .map(|p| {
            basis
                .eigenvector(p)
                .iter()
                .zip(a.as_slice())
                .map(|(s, f)| f * s.conj())
                .sum()
        })
        .collect();
    Ok(SlepianCoeffs::new(basis.bandlimit, values))
}

/// `f(ω) = Σ_p f_p S_p(ω)` on `grid`.
pub fn slepian_synthesis(
    c: &SlepianCoeffs,
    basis: &SlepianBasis,
    grid: &GridSpec,
) -> Result<SampledField> {
    let harmonic = slepian_to_harmonic(c, basis)?;
    inverse_sht(&harmonic, grid)
}

fn harmonic_at_basis_bandlimit(f: &SampledField, basis: &SlepianBasis) -> Result<HarmonicCoeffs> {
    if f.grid.bandlimit() < basis.bandlimit {
        return Err(Error::Mismatch(format!(
            "field sampled at bandlimit {} cannot carry bandlimit {}",
            f.grid.bandlimit(),
            basis.bandlimit
        )));
    }
    Ok(forward_sht(f)?.with_bandlimit(basis.bandlimit))
}

/// `f_p = ⟨f, S_p⟩`, computed through the harmonic coefficients of `f`.
pub fn slepian_analysis(f: &SampledField, basis: &SlepianBasis) -> Result<SlepianCoeffs> {
    harmonic_to_slepian(&harmonic_at_basis_bandlimit(f, basis)?, basis)
}

/// Result of [`region_restricted_analysis`].
#[derive(Debug, Clone)]
pub struct RestrictedAnalysis {
    pub coeffs: SlepianCoeffs,
    /// zero-based indices whose eigenvalue fell below the floor
    pub skipped: Vec<usize>,
}

/// `f_p ≈ (1/μ_p) ∫_R f conj(S_p) dΩ`, using only data inside the region.
///
/// Coefficients with `μ_p < mu_floor` are set to zero and listed in
/// [`RestrictedAnalysis::skipped`].
pub fn region_restricted_analysis(
    f: &SampledField,
    basis: &SlepianBasis,
    mu_floor: f64,
) -> Result<RestrictedAnalysis> {
    if !(mu_floor > 0.0 && mu_floor < 1.0) {
        return Err(Error::Domain(format!("mu_floor {mu_floor} outside (0, 1)")));
    }
    let lmax = basis.bandlimit;
    let harmonic = harmonic_at_basis_bandlimit(f, basis)?;
    let q = basis.region.quadrature(lmax);
    // g_lm = ∫_R f conj(Y_lm)
    let mut g = vec![Complex64::new(0.0, 0.0); lmax * lmax];
    for i in 0..q.len() {
        let y = ylm_all(lmax, q.theta[i], q.phi[i]);
        let value: Complex64 = y.iter().zip(harmonic.as_slice()).map(|(y, c)| y * c).sum();
        let wv = value * q.weight[i];
        for (gj, yj) in g.iter_mut().zip(&y) {
            *gj += wv * yj.conj();
        }
    }
    let mut skipped = Vec::new();
    let values = (0..basis.len())
        .map(|p| {
            let mu = basis.eigenvalues[p];
            if mu < mu_floor {
                skipped.push(p);
                return Complex64::new(0.0, 0.0);
            }
            let proj: Complex64 = g.iter().zip(basis.eigenvector(p)).map(|(g, s)| g * s.conj()).sum();
            proj / mu
        })
        .collect();
    Ok(RestrictedAnalysis {
        coeffs: SlepianCoeffs::new(lmax, values),
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cap_basis(lmax: usize, deg: f64) -> SlepianBasis {
        let region = Region::polar_cap(deg.to_radians(), 0.0, 0.0).unwrap();
        build_basis(&region, lmax).unwrap()
    }

    #[test]
    fn full_sphere_k_is_identity() {
        let g = make_grid(6).unwrap();
        let region = Region::full_sphere(&g);
        let k = assemble_k_matrix(&region, &g).unwrap();
        for i in 0..36 {
            for j in 0..36 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((k.entry(i, j) - target).norm() < 1e-10);
            }
        }
        let basis = solve_eigenproblem(&k, &region).unwrap();
        assert!(basis.eigenvalues().iter().all(|&mu| (mu - 1.0).abs() < 1e-10));
    }

    #[test]
    fn cap_trace_matches_shannon() {
        let g = make_grid(16).unwrap();
        let region = Region::polar_cap(40f64.to_radians(), 0.0, 0.0).unwrap();
        let k = assemble_k_matrix(&region, &g).unwrap();
        let n = shannon_number(&region, 16);
        assert!((k.trace() - n).abs() / n < 1e-6);
        assert!((n - 256.0 * (1.0 - 40f64.to_radians().cos()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_cap_has_same_spectrum() {
        // a cap away from the pole goes through the dense path
        let lmax = 8;
        let polar = cap_basis(lmax, 30.0);
        let tilted = build_basis(&Region::polar_cap(30f64.to_radians(), 1.1, 2.0).unwrap(), lmax).unwrap();
        for (a, b) in polar.eigenvalues().iter().zip(tilted.eigenvalues()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvalues_descend_and_bounded() {
        let b = cap_basis(12, 40.0);
        let mu = b.eigenvalues();
        assert!(mu.windows(2).all(|w| w[0] >= w[1]));
        assert!(mu.iter().all(|&m| m > 0.0 && m < 1.0));
        let sum: f64 = mu.iter().sum();
        assert!((sum - b.shannon_number()).abs() / b.shannon_number() < 1e-6);
    }

    #[test]
    fn eigenvectors_are_phase_fixed() {
        let b = cap_basis(10, 40.0);
        for p in 0..b.len() {
            let v = b.eigenvector(p);
            let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let d = v.iter().position(|c| c.norm() >= max * (1.0 - 1e-12)).unwrap();
            assert!(v[d].re > 0.0 && v[d].im.abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_pairs_ordered_by_dominant_index() {
        let b = cap_basis(10, 40.0);
        let mu = b.eigenvalues();
        let dom = |p: usize| {
            let v = b.eigenvector(p);
            let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
            v.iter().position(|c| c.norm() >= max * (1.0 - 1e-12)).unwrap()
        };
        let mut pairs = 0;
        for p in 1..b.len() {
            if mu[p - 1] - mu[p] <= DEGENERACY_TOL * mu[p - 1] && mu[p] > 1e-6 {
                assert!(dom(p - 1) < dom(p));
                pairs += 1;
            }
        }
        assert!(pairs > 5);
    }

    #[test]
    fn synthesis_zero_and_single() {
        let b = cap_basis(6, 40.0);
        let g = make_grid(6).unwrap();
        let z = slepian_synthesis(&SlepianCoeffs::zeros(6, 10), &b, &g).unwrap();
        assert!(z.values.iter().all(|v| v.norm() == 0.0));
        let mut c = SlepianCoeffs::zeros(6, 36);
        c.values[0] = Complex64::new(1.0, 0.0);
        let f = slepian_synthesis(&c, &b, &g).unwrap();
        let s1 = &b.render(1, &g).unwrap()[0];
        for (a, b) in f.values.iter().zip(&s1.values) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(slepian_to_harmonic(&SlepianCoeffs::zeros(6, 37), &b).is_err());
    }

    #[test]
    fn analysis_of_basis_function_is_delta() {
        let b = cap_basis(8, 40.0);
        let g = make_grid(8).unwrap();
        let fields = b.render(5, &g).unwrap();
        let c = slepian_analysis(&fields[3], &b).unwrap();
        for (p, v) in c.values.iter().enumerate() {
            let t = if p == 3 { 1.0 } else { 0.0 };
            assert!((v - t).norm() < 1e-10);
        }
        let zero = slepian_analysis(&SampledField::zeros(&g), &b).unwrap();
        assert!(zero.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn analysis_matches_spatial_quadrature() {
        let b = cap_basis(8, 40.0);
        let g = make_grid(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = SlepianCoeffs::new(
            8,
            (0..b.shannon_truncation())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        );
        let f = slepian_synthesis(&c, &b, &g).unwrap();
        let harmonic_route = slepian_analysis(&f, &b).unwrap();
        let fields = b.render(b.len(), &g).unwrap();
        for (p, s) in fields.iter().enumerate() {
            let spatial = f.inner(s).unwrap();
            assert!((spatial - harmonic_route.values[p]).norm() < 1e-9);
        }
    }

    #[test]
    fn restricted_analysis_recovers_concentrated_coefficients() {
        let b = cap_basis(10, 40.0);
        let g = make_grid(10).unwrap();
        let fields = b.render(2, &g).unwrap();
        let r = region_restricted_analysis(&fields[0], &b, DEFAULT_MU_FLOOR).unwrap();
        assert!((r.coeffs.values[0] - 1.0).norm() < 1e-3);
        assert!(!r.skipped.is_empty());
        for p in &r.skipped {
            assert!(b.eigenvalues()[*p] < DEFAULT_MU_FLOOR);
            assert_eq!(r.coeffs.values[*p], Complex64::new(0.0, 0.0));
        }
        let zero = region_restricted_analysis(&SampledField::zeros(&g), &b, 0.5).unwrap();
        assert!(zero.coeffs.values.iter().all(|v| v.norm() == 0.0));
        assert!(region_restricted_analysis(&fields[0], &b, 0.0).is_err());
        assert!(region_restricted_analysis(&fields[0], &b, 1.0).is_err());
    }

    #[test]
    fn harmonic_slepian_unitary() {
        let b = cap_basis(7, 35.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = HarmonicCoeffs::from_vec(
            7,
            (0..49)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let back = slepian_to_harmonic(&harmonic_to_slepian(&a, &b).unwrap(), &b).unwrap();
        for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
            assert!((x - y).norm() < 1e-10);
        }
        let e = HarmonicCoeffs::from_vec(7, b.eigenvector(4).to_vec()).unwrap();
        let unit = harmonic_to_slepian(&e, &b).unwrap();
        for (p, v) in unit.values.iter().enumerate() {
            assert!((v - if p == 4 { 1.0 } else { 0.0 }).norm() < 1e-12);
        }
        assert!(harmonic_to_slepian(&HarmonicCoeffs::zeros(6), &b).is_err());
    }

    #[test]
    fn mask_coarser_than_bandlimit_rejected() {
        let coarse = make_grid(4).unwrap();
        let region = Region::full_sphere(&coarse);
        let fine = make_grid(8).unwrap();
        assert!(matches!(assemble_k_matrix(&region, &fine), Err(Error::Mismatch(_))));
    }
}
