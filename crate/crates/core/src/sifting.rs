//! Translation as a product of basis functions, and the sifting convolution
//! it induces. Works for any orthonormal basis with a point evaluator; here
//! the spherical harmonics and (possibly truncated) Slepian functions.

use num_complex::Complex64;

use crate::basis::SlepianBasis;
use crate::error::{Error, Result};
use crate::sphere::ylm_all;

/// An orthonormal basis on the sphere, indexed from zero.
#[derive(Debug, Clone, Copy)]
pub enum BasisHandle<'a> {
    /// `Y_lm` for `l < L`, in flat order.
    Harmonic { bandlimit: usize },
    /// The first `truncation` Slepian functions.
    Slepian {
        basis: &'a SlepianBasis,
        truncation: usize,
    },
}

impl<'a> BasisHandle<'a> {
    pub fn harmonic(bandlimit: usize) -> Self {
        BasisHandle::Harmonic { bandlimit }
    }

    pub fn slepian(basis: &'a SlepianBasis, truncation: usize) -> Result<Self> {
        if truncation > basis.len() {
            return Err(Error::Mismatch(format!(
                "truncation {truncation} exceeds {} Slepian functions",
                basis.len()
            )));
        }
        Ok(BasisHandle::Slepian { basis, truncation })
    }

    pub fn len(&self) -> usize {
        match self {
            BasisHandle::Harmonic { bandlimit } => bandlimit * bandlimit,
            BasisHandle::Slepian { truncation, .. } => *truncation,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every basis function evaluated at `(θ, φ)`.
    pub fn evaluate(&self, theta: f64, phi: f64) -> Vec<Complex64> {
        match self {
            BasisHandle::Harmonic { bandlimit } => ylm_all(*bandlimit, theta, phi),
            BasisHandle::Slepian { basis, truncation } => basis.evaluate(*truncation, theta, phi),
        }
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Mismatch(format!(
                "{len} coefficients for a basis of {} functions",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Coefficients of `T_ω' f`: `f_k B_k(ω')`.
pub fn translate_coeffs(
    coeffs: &[Complex64],
    theta: f64,
    phi: f64,
    basis: &BasisHandle<'_>,
) -> Result<Vec<Complex64>> {
    basis.check(coeffs.len())?;
    Ok(coeffs
        .iter()
        .zip(basis.evaluate(theta, phi))
        .map(|(c, b)| c * b)
        .collect())
}

/// `(f ⊙ g)_k = f_k conj(g_k)`.
pub fn sift_convolve(f: &[Complex64], g: &[Complex64], basis: &BasisHandle<'_>) -> Result<Vec<Complex64>> {
    if f.len() != g.len() {
        return Err(Error::Mismatch(format!(
            "convolution operands have lengths {} and {}",
            f.len(),
            g.len()
        )));
    }
    basis.check(f.len())?;
    Ok(f.iter().zip(g).map(|(a, b)| a * b.conj()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn translate_constant_harmonic() {
        let b = BasisHandle::harmonic(3);
        let mut c = vec![Complex64::new(0.0, 0.0); 9];
        c[0] = Complex64::new(1.0, 0.0);
        let t = translate_coeffs(&c, 0.3, 1.0, &b).unwrap();
        assert!((t[0].re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!(t[1..].iter().all(|v| v.norm() == 0.0));
        let zero = translate_coeffs(&[Complex64::new(0.0, 0.0); 9], 0.3, 1.0, &b).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn identity_kernel_and_units() {
        let b = BasisHandle::harmonic(2);
        let f: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let ones = vec![Complex64::new(1.0, 0.0); 4];
        assert_eq!(sift_convolve(&f, &ones, &b).unwrap(), f);
        let mut e = vec![Complex64::new(0.0, 0.0); 4];
        e[2] = Complex64::new(1.0, 0.0);
        assert_eq!(sift_convolve(&e, &e, &b).unwrap(), e);
    }

    #[test]
    fn length_errors() {
        let b = BasisHandle::harmonic(2);
        let a = vec![Complex64::new(0.0, 0.0); 4];
        assert!(sift_convolve(&a, &a[..3], &b).is_err());
        assert!(sift_convolve(&a[..3], &a[..3], &b).is_err());
        assert!(translate_coeffs(&a[..2], 0.0, 0.0, &b).is_err());
    }
}
