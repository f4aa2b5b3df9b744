use plateau::experiments::{sample_gradient, Structure};
use plateau::haar::{
    default_generator, haar_moment1_check, mc_grad_variance, sample_haar, variance_exact, GradStructure,
};
use plateau::lcu::LcuCoefficients;
use plateau::dense::pauli_matrix;
use plateau::rng::{derive_seed, rng_from_seed};
use plateau::statevector::PauliString;

#[test]
fn mean_squared_entry_is_one_over_n() {
    let mut rng = rng_from_seed(21);
    let samples = 50_000;
    let mean = (0..samples)
        .map(|_| sample_haar(4, &mut rng).unwrap().matrix()[(0, 0)].norm_sqr())
        .sum::<f64>()
        / samples as f64;
    assert!((mean - 0.25).abs() < 0.005, "{mean}");
}

/// Eigenphase density of Haar U(2) is proportional to sin^2((a - b) / 2);
/// the phase difference `d` has density (1 - cos d) / (2 pi) on [0, 2pi).
#[test]
fn eigenphase_chi_squared() {
    use std::f64::consts::PI;
    const BINS: usize = 10;
    const SAMPLES: usize = 20_000;
    let mut rng = rng_from_seed(22);
    let mut counts = [0usize; BINS];
    for _ in 0..SAMPLES {
        let u = sample_haar(2, &mut rng).unwrap().into_matrix();
        // 2x2 eigenvalues: tr/2 +- sqrt(tr^2/4 - det)
        let tr = u[(0, 0)] + u[(1, 1)];
        let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        let root = (tr * tr / 4.0 - det).sqrt();
        let (l0, l1) = (tr / 2.0 + root, tr / 2.0 - root);
        let d = (l0.arg() - l1.arg()).rem_euclid(2.0 * PI);
        counts[((d / (2.0 * PI) * BINS as f64) as usize).min(BINS - 1)] += 1;
    }
    let width = 2.0 * PI / BINS as f64;
    let chi2: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (lo, hi) = (i as f64 * width, (i + 1) as f64 * width);
            let p = (hi - lo - (hi.sin() - lo.sin())) / (2.0 * PI);
            let expected = p * SAMPLES as f64;
            (c as f64 - expected).powi(2) / expected
        })
        .sum();
    // 99% quantile of chi^2 with 9 degrees of freedom
    assert!(chi2 < 21.666, "chi2 = {chi2}");
}

#[test]
fn first_moment_with_identity_is_exact() {
    let mut rng = rng_from_seed(23);
    let id = plateau::dense::CMatrix::identity(4, 4);
    let h = pauli_matrix(&PauliString::z1z2(2).unwrap());
    let r = haar_moment1_check(4, &id, &h, 200, &mut rng).unwrap();
    assert!((r.estimate - r.closed_form).abs() < 1e-12);
}

#[test]
fn design_variance_decays_like_inverse_dimension() {
    let points: Vec<(f64, f64)> = [4usize, 8, 16, 32]
        .iter()
        .map(|&n| {
            let qubits = n.trailing_zeros() as usize;
            let h = pauli_matrix(&PauliString::z1z2(qubits).unwrap());
            let mut rng = rng_from_seed(derive_seed(24, &[n as u64]));
            let r = mc_grad_variance(GradStructure::Design2, &h, 4000, &mut rng).unwrap();
            let exact = variance_exact(GradStructure::Design2, &h, &default_generator(n).unwrap(), LcuCoefficients::default());
            assert!(r.estimate > 0.0 && (r.estimate - exact).abs() <= 4.0 * r.standard_error);
            (qubits as f64, r.estimate.ln())
        })
        .collect();
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let slope = points.iter().map(|&(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / points.iter().map(|&(x, _)| (x - mx).powi(2)).sum::<f64>();
    let ln2 = std::f64::consts::LN_2;
    assert!((slope + ln2).abs() <= 0.1 * ln2, "slope {slope}");
}

#[test]
fn circuit_gradients_have_zero_mean() {
    for structure in Structure::ALL {
        let grads: Vec<f64> = (0..200)
            .map(|i| sample_gradient(structure, 4, 10, 3, derive_seed(25, &[i])).unwrap())
            .collect();
        let m = grads.len() as f64;
        let mean = grads.iter().sum::<f64>() / m;
        let var = grads.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!(mean.abs() <= 4.0 * (var / m).sqrt(), "{structure}: mean {mean}");
    }
}
