use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnkit::mps::{self, MpsTensor, UniformMps};
use tnkit::{c64, CMat};

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::identity(n, n) + CMat::from_fn(n, n, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn amplitudes_are_gauge_invariant(seed in any::<u64>(), d in 2usize..4, bond in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MpsTensor::random(&mut rng, d, bond);
        let x = random_invertible(&mut rng, bond);
        let b = a.gauge(&x).unwrap();
        let (ma, mb) = (UniformMps::periodic(a).unwrap(), UniformMps::periodic(b).unwrap());
        let nmax = if d == 2 { 8 } else { 5 };
        for n in 1..=nmax {
            let (va, vb) = (mps::dense_state(&ma, n).unwrap(), mps::dense_state(&mb, n).unwrap());
            let scale = va.norm().max(1e-300);
            prop_assert!((va - vb).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn blocked_transfer_is_a_power(seed in any::<u64>(), d in 2usize..4, bond in 1usize..4, k in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = UniformMps::periodic(MpsTensor::random(&mut rng, d, bond)).unwrap();
        let e = mps::transfer_operator(&m, false).unwrap().matrix;
        let ek = mps::transfer_operator(&mps::block_sites(&m, k).unwrap(), false).unwrap().matrix;
        let want = mps::matrix_power(&e, k);
        prop_assert!((ek - &want).norm() <= 1e-10 * want.norm().max(1.0));
    }

    #[test]
    fn renyi_entropies_decrease_with_order(seed in any::<u64>(), d in 2usize..4, bond in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = UniformMps::periodic(MpsTensor::random(&mut rng, d, bond)).unwrap();
        let alphas = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 10.0, f64::INFINITY];
        let es = mps::entanglement_spectrum_with(&m, &alphas).unwrap();
        prop_assert!((es.schmidt_squares.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        for w in es.renyi.windows(2) {
            prop_assert!(w[1].1 <= w[0].1 + 1e-12, "S_{} = {} < S_{} = {}", w[0].0, w[0].1, w[1].0, w[1].1);
        }
    }

    #[test]
    fn correlations_follow_the_second_eigenvalue(seed in any::<u64>(), bond in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = UniformMps::periodic(MpsTensor::random(&mut rng, 2, bond)).unwrap();
        let to = mps::transfer_operator(&m, true).unwrap();
        let lam2 = to.spectrum[1].norm();
        let lam3 = to.spectrum.get(2).map_or(0.0, |z| z.norm());
        prop_assume!(lam2 > 1e-2 && lam3 < 0.7 * lam2);
        let z = CMat::from_fn(2, 2, |i, j| if i == j { c64(if i == 0 { 1.0 } else { -1.0 }, 0.0) } else { c64(0.3, 0.0) });
        // The window [2ξ, 6ξ], moved out until the subleading terms are
        // suppressed by 10⁻³ relative to the λ2 term.
        let xi = -1.0 / lam2.ln();
        let shift = if lam3 > 0.0 { (1e-3f64.ln() / (lam3 / lam2).ln()).ceil() as usize } else { 1 };
        let n0 = ((2.0 * xi).ceil() as usize).max(shift).max(1);
        let n1 = n0 + ((4.0 * xi).ceil() as usize).max(2);
        prop_assume!(lam2.powi(n1 as i32) > 1e-9);
        let ratio = |n: usize| mps::correlation_function(&m, &z, &z, n).unwrap().norm() / lam2.powi(n as i32);
        let r0 = ratio(n0);
        prop_assume!(r0 > 1e-6);
        for n in n0..=n1 {
            let r = ratio(n);
            prop_assert!(r <= 10.0 * r0 && r >= r0 / 10.0, "n = {n}: ratio {r} vs {r0}");
        }
    }
}
