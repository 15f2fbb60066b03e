use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;

use slepian::basis::{build_basis, harmonic_to_slepian, slepian_to_harmonic, SlepianCoeffs};
use slepian::config::PipelineConfig;
use slepian::denoise::{add_white_noise, NoiseModel};
use slepian::io;
use slepian::region::Region;
use slepian::sifting::{sift_convolve, BasisHandle};
use slepian::sphere::{flat_index, forward_sht, inverse_sht, make_grid, HarmonicCoeffs, SampledField};
use slepian::wavelets::{build_filter_bank, wavelet_analysis, wavelet_synthesis, TilingParams};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), len)
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

fn harmonic(max_l: usize) -> impl Strategy<Value = HarmonicCoeffs> {
    (1..=max_l).prop_flat_map(|l| complex_vec(l * l).prop_map(move |v| HarmonicCoeffs::from_vec(l, v).unwrap()))
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let err: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    err.sqrt() <= tol * norm2(a).sqrt().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sht_round_trip(a in harmonic(12)) {
        let grid = make_grid(a.bandlimit()).unwrap();
        let back = forward_sht(&inverse_sht(&a, &grid).unwrap()).unwrap();
        prop_assert!(close(a.as_slice(), back.as_slice(), 1e-10));
    }

    #[test]
    fn parseval_on_grid(a in harmonic(12)) {
        let grid = make_grid(a.bandlimit()).unwrap();
        let f = inverse_sht(&a, &grid).unwrap();
        let spatial = f.inner(&f).unwrap().re;
        let spectral = norm2(a.as_slice());
        prop_assert!((spatial - spectral).abs() <= 1e-10 * spectral.max(1.0));
    }

    #[test]
    fn sht_is_linear(a in harmonic(8), scale in -5.0..5.0f64) {
        let grid = make_grid(a.bandlimit()).unwrap();
        let f = inverse_sht(&a, &grid).unwrap();
        let g = SampledField::from_fn(&grid, |t, p| Complex64::new(t.cos(), (2.0 * p).sin()));
        let combo = SampledField::new(
            grid.clone(),
            f.values.iter().zip(&g.values).map(|(x, y)| x * scale + y).collect(),
        ).unwrap();
        let lhs = forward_sht(&combo).unwrap();
        let (fa, ga) = (forward_sht(&f).unwrap(), forward_sht(&g).unwrap());
        let rhs: Vec<Complex64> = fa.as_slice().iter().zip(ga.as_slice()).map(|(x, y)| x * scale + y).collect();
        prop_assert!(close(lhs.as_slice(), &rhs, 1e-10));
    }

    #[test]
    fn real_fields_have_conjugate_symmetric_coefficients(values in prop::collection::vec(-10.0..10.0f64, 7 * 13)) {
        let grid = make_grid(7).unwrap();
        let f = SampledField::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap();
        let a = forward_sht(&f).unwrap();
        for l in 0..7usize {
            for m in 1..=l as i64 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = a.as_slice()[flat_index(l, -m)];
                let rhs = a.as_slice()[flat_index(l, m)].conj() * sign;
                prop_assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wavelet_round_trip_and_energy(
        lambda in 1.5..4.0f64,
        p_max in 20usize..400,
        seed in any::<u64>(),
    ) {
        let params = TilingParams::new(lambda, 0, p_max).unwrap();
        let bank = build_filter_bank(params).unwrap();
        prop_assert!(bank.admissibility_residual() < 1e-12);
        let noise = add_white_noise(
            &SlepianCoeffs::new(8, vec![Complex64::new(0.0, 1.0); p_max]),
            &NoiseModel::new(1.0, seed).unwrap(),
        );
        let w = wavelet_analysis(&noise, &bank).unwrap();
        let energy: f64 = bank.ids().into_iter().map(|id| norm2(w.get(id))).sum();
        prop_assert!((energy - noise.energy()).abs() <= 1e-12 * noise.energy());
        let back = wavelet_synthesis(&w, &bank).unwrap();
        prop_assert!(close(&noise.values, &back.values, 1e-12));
    }

    #[test]
    fn sifting_conjugate_symmetry(f in complex_vec(16), g in complex_vec(16)) {
        let b = BasisHandle::harmonic(4);
        let fg = sift_convolve(&f, &g, &b).unwrap();
        let gf = sift_convolve(&g, &f, &b).unwrap();
        for (x, y) in fg.iter().zip(&gf) {
            prop_assert_eq!(*x, y.conj());
        }
    }

    #[test]
    fn coefficient_files_round_trip(a in harmonic(10)) {
        let text = io::format_coeffs(&a);
        prop_assert_eq!(io::parse_coeffs(&text, Path::new("p")).unwrap(), a);
    }

    #[test]
    fn slepian_files_round_trip(v in complex_vec(25)) {
        let c = SlepianCoeffs::new(5, v);
        prop_assert_eq!(io::parse_slepian(&io::format_slepian(&c), Path::new("p")).unwrap(), c);
    }

    #[test]
    fn config_round_trip(
        l in 1usize..200,
        lambda in 1.01..10.0f64,
        j0 in 0u32..5,
        snr in -20.0..20.0f64,
        opening in 0.1..179.9f64,
        ct in 0.0..180.0f64,
        seed in proptest::option::of(any::<u64>()),
        sigmas in prop::collection::vec(0.0..10.0f64, 0..4),
    ) {
        let mut cfg = PipelineConfig {
            bandlimit: l,
            lambda,
            j0,
            snr_db: snr,
            seed,
            n_sigma: sigmas,
            ..Default::default()
        };
        cfg.region.opening_deg = opening;
        cfg.region.center_theta_deg = ct;
        let back = PipelineConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn full_basis_change_is_unitary() {
    let lmax = 6;
    let basis = build_basis(&Region::polar_cap(0.9, 0.4, 1.0).unwrap(), lmax).unwrap();
    let a = slepian::synthetic::earthlike_coeffs(lmax, 2);
    let s = harmonic_to_slepian(&a, &basis).unwrap();
    assert!((s.energy() - norm2(a.as_slice())).abs() < 1e-12 * s.energy());
    let back = slepian_to_harmonic(&s, &basis).unwrap();
    assert!(close(a.as_slice(), back.as_slice(), 1e-12));
}

#[test]
fn noise_is_white_in_slepian_space() {
    let trials = 4000;
    let p = 6;
    let sigma = 1.3;
    let zero = SlepianCoeffs::new(4, vec![Complex64::new(0.0, 1e-300); p]);
    let mut cov = vec![Complex64::new(0.0, 0.0); p * p];
    for seed in 0..trials {
        let n = add_white_noise(&zero, &NoiseModel::new(sigma, seed).unwrap());
        for a in 0..p {
            for b in 0..p {
                cov[a * p + b] += n.values[a] * n.values[b].conj() / trials as f64;
            }
        }
    }
    let bound = 3.0 / (trials as f64).sqrt() * sigma * sigma;
    for a in 0..p {
        for b in 0..p {
            let v = cov[a * p + b];
            if a == b {
                assert!((v.re - sigma * sigma).abs() < 0.1 * sigma * sigma, "{v}");
            } else {
                assert!(v.norm() < bound, "off-diagonal {v} vs {bound}");
            }
        }
    }
}
