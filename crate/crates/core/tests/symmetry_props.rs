use std::f64::consts::PI;

use proptest::prelude::*;
use tnkit::mps::{self, UniformMps};
use tnkit::symmetry::{self, FiniteGroup, OnSiteSymmetry, ProjectiveData, StringLength};
use tnkit::{c64, corpus, CMat, C64};

fn diag3(v: [f64; 3]) -> CMat {
    CMat::from_fn(3, 3, |i, j| if i == j { c64(v[i], 0.0) } else { c64(0.0, 0.0) })
}

fn rotations() -> OnSiteSymmetry {
    let us = vec![diag3([1., 1., 1.]), diag3([1., -1., -1.]), diag3([-1., 1., -1.]), diag3([-1., -1., 1.])];
    OnSiteSymmetry::new(FiniteGroup::z2xz2(), us).unwrap()
}

fn aklt() -> UniformMps {
    UniformMps::periodic(corpus::aklt_pauli()).unwrap()
}

/// ω = π·a(g)·b(h) on Z_n × Z_m, element (a, b) at index a·m + b.
fn bilinear(g: &FiniteGroup, m: usize) -> Vec<Vec<f64>> {
    let n = g.order();
    (0..n).map(|x| (0..n).map(|y| PI * (((x / m) * (y % m)) % 2) as f64).collect()).collect()
}

fn groups() -> Vec<(FiniteGroup, usize)> {
    let z2 = FiniteGroup::cyclic(2);
    vec![(FiniteGroup::z2xz2(), 2), (FiniteGroup::product(&z2, &FiniteGroup::cyclic(4)), 4), (FiniteGroup::product(&FiniteGroup::cyclic(4), &z2), 2)]
}

fn regauge(pd: &ProjectiveData, theta: &[f64]) -> ProjectiveData {
    let g = &pd.group;
    let mut out = pd.clone();
    for a in 0..g.order() {
        out.x[a] = &pd.x[a] * C64::from_polar(1.0, theta[a]);
        for b in 0..g.order() {
            out.omega[a][b] = pd.omega[a][b] + theta[a] + theta[b] - theta[g.mul(a, b)];
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rephasing_the_virtual_action_keeps_the_class(pick in 0usize..3, nontrivial: bool, theta in prop::collection::vec(-PI..PI, 8)) {
        let (g, m) = &groups()[pick];
        let omega = if nontrivial { bilinear(g, *m) } else { vec![vec![0.0; g.order()]; g.order()] };
        let (st, sym) = symmetry::build_spt_fixed_point(g, &omega, &vec![0.0; g.order()]).unwrap();
        let pd = symmetry::detect_symmetry_action(&st, &sym).unwrap();
        let mut th = theta[..g.order()].to_vec();
        th[g.identity()] = 0.0;
        let a = symmetry::cocycle_class(&pd).unwrap();
        let b = symmetry::cocycle_class(&regauge(&pd, &th)).unwrap();
        prop_assert_eq!(&a.label, &b.label);
        prop_assert_eq!(a.trivial, !nontrivial);
    }

    #[test]
    fn group_axioms(n in 1usize..7, m in 1usize..4, dihedral: bool) {
        let g = if dihedral && n >= 2 { FiniteGroup::dihedral(n) } else { FiniteGroup::product(&FiniteGroup::cyclic(n), &FiniteGroup::cyclic(m)) };
        let e = g.identity();
        for a in 0..g.order() {
            prop_assert_eq!(g.mul(a, e), a);
            prop_assert_eq!(g.mul(a, g.inv(a)), e);
            for b in 0..g.order() {
                for c in 0..g.order() {
                    prop_assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                }
            }
        }
        prop_assert_eq!(g.is_abelian(), !(dihedral && n >= 3));
    }
}

#[test]
fn virtual_action_reconstructs_the_tensor() {
    let m = aklt();
    let sym = rotations();
    let pd = symmetry::detect_symmetry_action(&m, &sym).unwrap();
    let a = corpus::aklt_pauli();
    for g in 0..4 {
        let u = &sym.unitaries[g];
        let xinv = pd.x[g].clone().try_inverse().unwrap();
        for i in 0..3 {
            let mut lhs = CMat::zeros(2, 2);
            for j in 0..3 {
                lhs += a.mat(j) * u[(i, j)];
            }
            let rhs = &xinv * a.mat(i) * &pd.x[g] * C64::from_polar(1.0, pd.phi[g]);
            assert!((lhs - rhs).norm() <= 1e-10, "g = {g}, i = {i}");
        }
    }
}

#[test]
fn nontrivial_classes_have_degenerate_entanglement() {
    let mut states = vec![aklt()];
    for (g, m) in groups() {
        states.push(symmetry::build_spt_fixed_point(&g, &bilinear(&g, m), &vec![0.0; g.order()]).unwrap().0);
    }
    for st in &states {
        let es = mps::entanglement_spectrum(st).unwrap();
        let mut p = es.schmidt_squares.clone();
        p.sort_by(f64::total_cmp);
        assert!(p.len() % 2 == 0);
        for pair in p.chunks(2) {
            assert!((pair[0] - pair[1]).abs() <= 1e-10, "{p:?}");
        }
    }
}

#[test]
fn string_order_converges_geometrically() {
    let m = aklt();
    let sym = rotations();
    let sz = CMat::from_fn(3, 3, |b, c| match (b, c) {
        (0, 1) => c64(0.0, -1.0),
        (1, 0) => c64(0.0, 1.0),
        _ => c64(0.0, 0.0),
    });
    let inf = symmetry::string_order(&m, &sym, 3, &sz, StringLength::Infinite).unwrap();
    // Subleading eigenvalue of the transfer operator dressed with U(g).
    let lam = 1.0 / 3.0;
    let c = (symmetry::string_order(&m, &sym, 3, &sz, StringLength::Finite(1)).unwrap() - inf).norm() / lam + 1e-12;
    for l in 1..30 {
        let v = symmetry::string_order(&m, &sym, 3, &sz, StringLength::Finite(l)).unwrap();
        assert!((v - inf).norm() <= c * lam.powi(l as i32) + 1e-12, "L = {l}: {v}");
    }
}

#[test]
fn klein_four_has_one_binary_class() {
    assert_eq!(symmetry::cohomology_group(&FiniteGroup::z2xz2()).unwrap(), vec![2]);
    assert!(symmetry::cohomology_group(&FiniteGroup::dihedral(3)).unwrap().is_empty());
    assert_eq!(symmetry::cohomology_group(&FiniteGroup::dihedral(4)).unwrap(), vec![2]);
}
