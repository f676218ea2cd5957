use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnkit::mps::{self, MpsTensor, UniformMps};
use tnkit::structure::{self, Verdict};
use tnkit::{c64, corpus, CMat};

fn periodic(t: MpsTensor) -> UniformMps {
    UniformMps::periodic(t).unwrap()
}

/// Random tensor, a gauge transform of it, a rescaled copy, or an unrelated one.
fn candidate(rng: &mut ChaCha8Rng, base: &MpsTensor, kind: u8) -> MpsTensor {
    let bond = base.bond();
    match kind % 4 {
        0 => base.clone(),
        1 => {
            let x = CMat::identity(bond, bond) + CMat::from_fn(bond, bond, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 0.5);
            base.gauge(&x).unwrap()
        }
        2 => base.scale(c64(0.0, 1.0)),
        _ => MpsTensor::random(rng, base.d(), bond),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_form_reassembles_the_state(seed in any::<u64>(), d in 2usize..4, b1 in 1usize..3, b2 in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = b1 + b2;
        let mats: Vec<CMat> = (0..d)
            .map(|_| CMat::from_fn(n, n, |i, j| if i >= b1 && j < b1 { c64(0.0, 0.0) } else { c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) }))
            .collect();
        let m = periodic(MpsTensor::new(mats).unwrap());
        let cf = structure::canonical_form(&m).unwrap();
        let re = periodic(cf.reassemble().unwrap());
        let p = cf.blocking_p;
        for len in (1..=6).filter(|l| l % p == 0) {
            let (a, b) = (mps::dense_state(&m, len).unwrap(), mps::dense_state(&re, len).unwrap());
            prop_assert!((&a - &b).norm() <= 1e-10 * a.norm().max(1e-300), "N = {len}");
        }
    }

    #[test]
    fn equal_verdicts_mean_equal_amplitudes(seed in any::<u64>(), kind in 0u8..4, bond in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = MpsTensor::random(&mut rng, 2, bond);
        let other = candidate(&mut rng, &base, kind);
        let (a, b) = (periodic(base), periodic(other));
        let rel = structure::compare_states(&a, &b).unwrap();
        for n in 3..=8 {
            let (va, vb) = (mps::dense_state(&a, n).unwrap(), mps::dense_state(&b, n).unwrap());
            let gap = (&va - &vb).norm() / va.norm();
            match rel.verdict {
                Verdict::Equal => prop_assert!(gap <= 1e-10, "N = {n}: {gap}"),
                Verdict::Proportional => {
                    let lam = rel.lambda.unwrap();
                    prop_assert!((va * lam.powu(n as u32) - vb).norm() <= 1e-10 * (1.0 + lam.norm().powi(n as i32)));
                }
                Verdict::Different => {}
            }
        }
    }

    #[test]
    fn comparison_is_an_equivalence(seed in any::<u64>(), kinds in prop::collection::vec(0u8..4, 4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = MpsTensor::random(&mut rng, 2, 2);
        let set: Vec<UniformMps> = kinds.iter().map(|&k| periodic(candidate(&mut rng, &base, k))).collect();
        let n = set.len();
        let same = |i: usize, j: usize| structure::compare_states(&set[i], &set[j]).unwrap().verdict != Verdict::Different;
        let rel: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| same(i, j)).collect()).collect();
        for i in 0..n {
            prop_assert!(rel[i][i]);
            for j in 0..n {
                prop_assert_eq!(rel[i][j], rel[j][i]);
                for k in 0..n {
                    prop_assert!(!(rel[i][j] && rel[j][k]) || rel[i][k]);
                }
            }
        }
    }

    #[test]
    fn blocking_divides_the_injectivity_length(seed in any::<u64>(), bond in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = periodic(MpsTensor::random(&mut rng, 2, bond));
        let l0 = structure::injectivity_length(&m).unwrap();
        for k in 1..=l0 {
            let lk = structure::injectivity_length(&mps::block_sites(&m, k).unwrap()).unwrap();
            prop_assert_eq!(lk, l0.div_ceil(k));
        }
    }
}

#[test]
fn aklt_blocked_injectivity() {
    let m = periodic(corpus::aklt_pauli());
    assert_eq!(structure::injectivity_length(&m).unwrap(), 2);
    assert_eq!(structure::injectivity_length(&mps::block_sites(&m, 2).unwrap()).unwrap(), 1);
}

#[test]
fn ghz_splits_into_product_blocks() {
    let cf = structure::canonical_form(&periodic(corpus::ghz_tensor(3))).unwrap();
    assert_eq!(cf.blocks.len(), 3);
    assert!(cf.blocks.iter().all(|b| b.tensor.bond() == 1));
    let basis = structure::basis_of_normal_tensors(&cf).unwrap();
    assert_eq!(basis.members.len(), 3);
}
