use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnkit::linalg::{self, contract, smith_normal_form, DenseTensor, IntMatrix};
use tnkit::{c64, CMat, C64};

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

/// Haar-ish unitary from the Q factor of a Gaussian-like matrix.
fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    random_matrix(rng, n, n).qr().q()
}

fn random_tensor(rng: &mut ChaCha8Rng, labels: &[&str], shape: &[usize]) -> DenseTensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| c64(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    DenseTensor::new(labels.to_vec(), shape.to_vec(), data).unwrap()
}

fn matched(a: &[C64], b: &[C64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.len() == b.len()
        && a.iter().all(|x| match (0..b.len()).find(|&j| !used[j] && (b[j] - x).norm() <= tol) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn contraction_ignores_pair_order(seed in any::<u64>(), i in 1usize..4, j in 1usize..4, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_tensor(&mut rng, &["x", "i", "j", "k"], &[2, i, j, k]);
        let b = random_tensor(&mut rng, &["k", "y", "i", "j"], &[k, 3, i, j]);
        let fwd = contract(&a, &b, &[("i", "i"), ("j", "j"), ("k", "k")]).unwrap();
        let rev = contract(&a, &b, &[("k", "k"), ("i", "i"), ("j", "j")]).unwrap();
        let rev = rev.permute(&fwd.labels().iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        for (x, y) in fwd.data().iter().zip(rev.data()) {
            prop_assert!((x - y).norm() <= 1e-13);
        }
        // Loop oracle.
        for xi in 0..2 {
            for yi in 0..3 {
                let mut s = c64(0.0, 0.0);
                for ii in 0..i { for jj in 0..j { for kk in 0..k {
                    s += a.get(&[xi, ii, jj, kk]) * b.get(&[kk, yi, ii, jj]);
                }}}
                let got = fwd.permute(&["x", "y"]).unwrap().get(&[xi, yi]);
                prop_assert!((got - s).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn transpose_has_the_same_spectrum(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, n);
        let a = linalg::eig_general(&m).unwrap().values();
        let b = linalg::eig_general(&m.transpose()).unwrap().values();
        prop_assert!(matched(&a, &b, 1e-10), "{a:?} vs {b:?}");
    }

    #[test]
    fn singular_values_are_unitarily_invariant(seed in any::<u64>(), r in 1usize..7, c in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, r, c);
        let u = random_unitary(&mut rng, r);
        let v = random_unitary(&mut rng, c);
        let s0 = linalg::svd(&m).unwrap().s;
        let s1 = linalg::svd(&(u * &m * v)).unwrap().s;
        for (x, y) in s0.iter().zip(s1.iter()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        // The squares sum to the Frobenius norm.
        let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((s0.iter().map(|x| x * x).sum::<f64>() - fro).abs() <= 1e-10 * fro.max(1.0));
    }

    #[test]
    fn smith_form_is_a_divisibility_chain(rows in 1usize..5, cols in 1usize..5, data in prop::collection::vec(-6i64..7, 16)) {
        let m = IntMatrix::from_i64(rows, cols, &data[..rows * cols]);
        let sm = smith_normal_form(&m);
        prop_assert!(sm.s.is_diagonal());
        prop_assert_eq!(sm.u.mul(&m).mul(&sm.v), sm.s.clone());
        prop_assert!(sm.u.det().abs() == BigInt::from(1) && sm.v.det().abs() == BigInt::from(1));
        let diag = sm.diagonal();
        prop_assert!(diag.iter().all(|x| !x.is_negative()));
        for w in diag.windows(2) {
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
    }
}
