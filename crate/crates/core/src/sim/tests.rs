use super::*;
use crate::linalg::aligned_error;
use crate::objective::objective;
use crate::oracles::qfunc;
use crate::solvers::{Method, SolverConfig};

fn noiseless(dim: usize, n: usize, seed: u64) -> (Channel, MeasurementSet) {
    let h = generate_channel(dim, seed).unwrap();
    let x = generate_training(n, dim, seed + 1000);
    let m = measure_intensities(&h, &x, 0.0, 10.0, seed + 2000).unwrap();
    (h, m)
}

#[test]
fn channels_are_unitary_and_seeded() {
    for seed in 0..50 {
        for dim in [1, 2, 6, 13] {
            let h = generate_channel(dim, seed).unwrap();
            assert!(h.matrix().unitarity_defect() <= 1e-10);
        }
    }
    assert_eq!(generate_channel(6, 7).unwrap(), generate_channel(6, 7).unwrap());
    assert_ne!(generate_channel(6, 7).unwrap(), generate_channel(6, 8).unwrap());
    assert!(generate_channel(0, 1).is_err());
}

#[test]
fn haar_second_moment() {
    let dim = 4;
    let draws = 10_000;
    let samples: Vec<f64> = (0..draws)
        .map(|s| generate_channel(dim, s).unwrap().matrix()[(0, 0)].norm_sqr())
        .collect();
    let mean = samples.iter().sum::<f64>() / draws as f64;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    let se = (var / draws as f64).sqrt();
    assert!((mean - 0.25).abs() <= 3.0 * se, "{mean} ± {se}");
    // without the phase fix the first entry would have a positive real part
    let re_mean: f64 = (0..draws)
        .map(|s| generate_channel(dim, s).unwrap().matrix()[(0, 0)].re)
        .sum::<f64>()
        / draws as f64;
    assert!(re_mean.abs() < 0.02, "{re_mean}");
}

#[test]
fn training_statistics() {
    let (n, dim) = (2000, 6);
    let x = generate_training(n, dim, 3);
    let count = (n * dim) as f64;
    let mean: Complex64 = x.iter().flatten().sum::<Complex64>() / count;
    assert!(mean.norm() <= 4.0 / count.sqrt());
    let var = x.iter().flatten().map(|v| (v - mean).norm_sqr()).sum::<f64>() / count;
    assert!((var - 1.0).abs() <= 0.1);
    assert_eq!(x, generate_training(n, dim, 3));
}

#[test]
fn identity_channel_measures_entry_powers() {
    let x = generate_training(20, 3, 1);
    let m = measure_intensities(&Channel::identity(3), &x, 0.0, 10.0, 2).unwrap();
    for (l, row) in m.intensities().iter().enumerate() {
        for (d, xn) in row.iter().zip(&x) {
            assert_eq!(*d, xn[l].norm_sqr());
        }
    }
}

#[test]
fn measurement_noise_statistics() {
    let h = generate_channel(5, 4).unwrap();
    let x = generate_training(2000, 5, 5);
    let clean = measure_intensities(&h, &x, 0.0, 10.0, 6).unwrap();
    let noisy = measure_intensities(&h, &x, 0.3, 10.0, 6).unwrap();
    let diffs: Vec<f64> = noisy
        .intensities()
        .iter()
        .flatten()
        .zip(clean.intensities().iter().flatten())
        .map(|(a, b)| a - b)
        .collect();
    let std = (diffs.iter().map(|v| v * v).sum::<f64>() / diffs.len() as f64).sqrt();
    assert!((std / 0.3 - 1.0).abs() <= 0.05, "{std}");
    let loud = measure_intensities(&h, &x, 5.0, 10.0, 6).unwrap();
    assert!(loud.intensities().iter().flatten().any(|&d| d < 0.0));
}

#[test]
fn intensities_are_blind_to_row_phases() {
    let h = generate_channel(4, 9).unwrap();
    let rotated = h.with_row_phases(&[0.3, -1.2, 2.5, 3.1]).unwrap();
    let x = generate_training(50, 4, 10);
    let a = measure_intensities(&h, &x, 0.1, 10.0, 11).unwrap();
    let b = measure_intensities(&rotated, &x, 0.1, 10.0, 11).unwrap();
    for (u, v) in a.intensities().iter().flatten().zip(b.intensities().iter().flatten()) {
        assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
    }
}

#[test]
fn unitary_channels_preserve_norm() {
    let h = generate_channel(6, 12).unwrap();
    for x in generate_training(100, 6, 13) {
        let y = h.matrix().mul_vec(&x);
        assert!((norm(&y) - norm(&x)).abs() <= 1e-10 * norm(&x));
    }
}

#[test]
fn snr_definition() {
    let h = generate_channel(6, 14).unwrap();
    let x = generate_training(300, 6, 15);
    let a = snr_from_sigma(&h, &x, 0.1);
    let b = snr_from_sigma(&h, &x, 0.2);
    assert!((a - b - 10.0 * 4f64.log10()).abs() < 1e-12);
    for sigma in [1e-3, 0.1618, 2.0] {
        let back = sigma_from_snr(&h, &x, snr_from_sigma(&h, &x, sigma));
        assert!((back / sigma - 1.0).abs() <= 1e-12);
    }
    // ⟨Σ|y|²⟩ ≈ D for unit-variance training, so SNR ≈ 1/σ²
    let lin = 10f64.powf(snr_from_sigma(&h, &x, 0.1) / 10.0);
    assert!((lin / 100.0 - 1.0).abs() <= 0.05, "{lin}");
    assert_eq!(snr_from_sigma(&h, &x, 0.0), f64::INFINITY);
    assert_eq!(sigma_from_snr(&h, &x, f64::INFINITY), 0.0);
}

#[test]
fn noiseless_channel_estimate_per_row() {
    let (h, m) = noiseless(4, 120, 16);
    for method in Method::ALL {
        let est = estimate_channel(&m, &SolverConfig::new(method)).unwrap();
        for l in 0..4 {
            let err = aligned_error(&h.row_vector(l), &est.result.estimates[l]);
            assert!(err <= 1e-2, "{method} row {l}: {err}");
            let row: CVector = est.matrix.row(l).iter().map(|v| v.conj()).collect();
            assert_eq!(row, est.result.estimates[l]);
        }
    }
}

#[test]
fn row_phases_do_not_change_estimates() {
    let h = generate_channel(4, 17).unwrap();
    let rotated = h.with_row_phases(&[1.0, 2.0, -0.5, 0.1]).unwrap();
    let x = generate_training(80, 4, 18);
    let cfg = SolverConfig::new(Method::Admm);
    let a = estimate_channel(&measure_intensities(&h, &x, 0.05, 10.0, 19).unwrap(), &cfg).unwrap();
    let b = estimate_channel(&measure_intensities(&rotated, &x, 0.05, 10.0, 19).unwrap(), &cfg).unwrap();
    for (u, v) in a.result.estimates.iter().zip(&b.result.estimates) {
        assert!(aligned_error(u, v) <= 1e-9);
    }
}

#[test]
fn more_training_helps_on_average() {
    let dim = 6;
    let cfg = SolverConfig::new(Method::Admm);
    let mean_error = |n: usize| -> f64 {
        (0..20u64)
            .map(|t| {
                let h = generate_channel(dim, derive_seed(5, t, 0)).unwrap();
                let x = generate_training(n, dim, derive_seed(5, t, 1));
                let sigma = sigma_from_snr(&h, &x, 15.8);
                let m = measure_intensities(&h, &x, sigma, 10.0, derive_seed(5, t, 2)).unwrap();
                let est = estimate_channel(&m, &cfg).unwrap();
                (0..dim)
                    .map(|l| aligned_error(&h.row_vector(l), &est.result.estimates[l]))
                    .sum::<f64>()
                    / dim as f64
            })
            .sum::<f64>()
            / 20.0
    };
    let errs: Vec<f64> = [50, 150, 300].iter().map(|&n| mean_error(n)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn exact_estimate_gives_identity_precoding() {
    let h = generate_channel(5, 20).unwrap();
    let f = precoder_from_estimate(h.matrix()).unwrap();
    let hf = h.matrix().mul(&f);
    assert!(hf.sub(&ComplexMatrix::identity(5)).frobenius_norm() <= 1e-12);
}

#[test]
fn row_phase_ambiguity_is_harmless() {
    let h = generate_channel(5, 21).unwrap();
    let est = h.with_row_phases(&[0.5, 1.5, 2.5, -2.0, -0.7]).unwrap();
    let f = precoder_from_estimate(est.matrix()).unwrap();
    let hf = h.matrix().mul(&f);
    let s = generate_training(10, 5, 22);
    for v in s {
        for (a, b) in hf.mul_vec(&v).iter().zip(&v) {
            assert!((a.norm() - b.norm()).abs() <= 1e-12);
        }
    }
}

#[test]
fn perturbed_estimate_leaks_little_power() {
    let h = generate_channel(6, 23).unwrap();
    let noise = generate_training(6, 6, 24);
    let scale = 1e-2 * h.matrix().frobenius_norm() / ComplexMatrix::from_rows(&noise).unwrap().frobenius_norm();
    let est = ComplexMatrix::from_fn(6, 6, |i, k| h.matrix()[(i, k)] + noise[i][k] * scale);
    let hf = h.matrix().mul(&precoder_from_estimate(&est).unwrap());
    let diag: f64 = (0..6).map(|i| hf[(i, i)].norm_sqr()).sum();
    let off = hf.frobenius_norm().powi(2) - diag;
    assert!(off <= 0.03 * diag, "{}", off / diag);
}

#[test]
fn zero_row_rejected() {
    let mut est = generate_channel(3, 25).unwrap().matrix().clone();
    for k in 0..3 {
        est[(1, k)] = Complex64::new(0.0, 0.0);
    }
    assert!(matches!(precoder_from_estimate(&est), Err(Error::ZeroRow { row: 1 })));
}

#[test]
fn noiseless_perfect_link_is_error_free() {
    let h = generate_channel(6, 26).unwrap();
    let f = precoder_from_estimate(h.matrix()).unwrap();
    let c = ber_ook(&h, &f, 0.0, 100_000, 27).unwrap();
    assert_eq!(c.errors, 0);
    assert_eq!(c.bits, 100_002);
}

fn within_three_se(count: ErrorCount, p: f64) -> bool {
    let se = (p * (1.0 - p) / count.bits as f64).sqrt();
    (count.ber() - p).abs() <= 3.0 * se
}

#[test]
fn crosstalk_free_matches_gaussian_tail() {
    for (i, sigma) in [0.13, 0.16, 0.2, 0.25].into_iter().enumerate() {
        let c = crosstalk_free_reference(6, sigma, 600_000, 28 + i as u64).unwrap();
        assert!(within_three_se(c, qfunc(0.5 / sigma)), "sigma {sigma}: {} vs {}", c.ber(), qfunc(0.5 / sigma));
    }
}

#[test]
fn large_dimension_path_matches_tail() {
    let c = crosstalk_free_reference(18, 0.2, 200_000, 29).unwrap();
    assert!(within_three_se(c, qfunc(2.5)));
}

#[test]
fn ber_falls_with_snr() {
    let h = generate_channel(6, 30).unwrap();
    let x = generate_training(300, 6, 31);
    let f = precoder_from_estimate(h.matrix()).unwrap();
    let bers: Vec<f64> = [12.0, 14.0, 16.0, 18.0]
        .iter()
        .map(|&snr| ber_ook(&h, &f, sigma_from_snr(&h, &x, snr), 200_000, 32).unwrap().ber())
        .collect();
    assert!(bers.windows(2).all(|w| w[1] <= w[0]), "{bers:?}");
}

#[test]
fn true_channel_precoding_matches_crosstalk_free() {
    let h = generate_channel(6, 33).unwrap();
    let f = precoder_from_estimate(h.matrix()).unwrap();
    for sigma in [0.14, 0.18] {
        let a = ber_ook(&h, &f, sigma, 300_000, 34).unwrap();
        let b = crosstalk_free_reference(6, sigma, 300_000, 34).unwrap();
        // same seed, identical received intensities up to rounding
        assert!(a.errors.abs_diff(b.errors) <= 2);
        assert!(within_three_se(a, qfunc(0.5 / sigma)));
    }
}

#[test]
fn reference_solution_is_converged() {
    let (_, m) = noiseless(4, 60, 35);
    let reference = reference_solution(&m).unwrap();
    let admm = estimate_channel(&m, &SolverConfig::new(Method::Admm).with_iters(50)).unwrap();
    let pg = estimate_channel(&m, &SolverConfig::new(Method::ProjectedGradient)).unwrap();
    let longer = estimate_channel(&m, &SolverConfig::new(Method::Nesterov).with_iters(1000)).unwrap();
    for l in 0..4 {
        let err = aligned_error(&reference.estimates[l], &admm.result.estimates[l]);
        assert!(err <= 1e-3, "row {l}: {err}");
        let best = objective(&reference.final_matrices[l], &m, l).unwrap().total;
        assert!(best <= pg.result.objective_traces[l][69] + 1e-6);
        let more = longer.result.objective_traces[l][999];
        assert!((best - more).abs() <= 1e-6, "row {l}: {best} vs {more}");
    }
}

#[test]
fn seeds_are_decorrelated() {
    let a = derive_seed(1, 0, 0);
    assert_ne!(a, derive_seed(1, 1, 0));
    assert_ne!(a, derive_seed(1, 0, 1));
    assert_ne!(a, derive_seed(2, 0, 0));
    assert_eq!(a, derive_seed(1, 0, 0));
}
