use eisenrel::cyclotomic::{cyclotomic_polynomial, rat, rat_int};
use eisenrel::eisenstein::eisenstein_qexp;
use eisenrel::kernel::IntSeries;
use eisenrel::numeric::{eval_e_fourier, NumericConfig, TorusPoint};
use eisenrel::relations::{bracket, relation_residual, HomPoly, RelationInstance};
use eisenrel::{CycNum, EisensteinIndex, QExpansion};
use num_complex::Complex64;
use proptest::prelude::*;

fn cyc(level: u32) -> impl Strategy<Value = CycNum> {
    prop::collection::vec((-6i64..=6, 1i64..=4), level as usize)
        .prop_map(move |v| CycNum::new(level, v.into_iter().map(|(n, d)| rat(n, d)).collect()).unwrap())
}

fn level_and_three() -> impl Strategy<Value = (CycNum, CycNum, CycNum)> {
    (1u32..=12).prop_flat_map(|n| (cyc(n), cyc(n), cyc(n)))
}

fn series(level: u32, order: u32) -> impl Strategy<Value = QExpansion> {
    prop::collection::btree_map(0..order, cyc(level), 0..6)
        .prop_map(move |m| QExpansion::from_terms(level, order, m).unwrap())
}

fn index(max_level: u32, max_weight: u32) -> impl Strategy<Value = EisensteinIndex> {
    (1..=max_level, 1..=max_weight)
        .prop_flat_map(|(n, k)| (Just(n), Just(k), 0..n as i64, 0..n as i64))
        .prop_filter_map("valid index", |(n, k, a1, a2)| EisensteinIndex::new(k, n, a1, a2).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn cyclotomic_ring_laws((x, y, z) in level_and_three()) {
        prop_assert!((&x + &y).field_eq(&(&y + &x)));
        prop_assert!((&x * &y).field_eq(&(&y * &x)));
        prop_assert!((&(&x * &y) * &z).field_eq(&(&x * &(&y * &z))));
        prop_assert!((&x * &(&y + &z)).field_eq(&(&(&x * &y) + &(&x * &z))));
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn field_zero_test_agrees_with_embedding((x, _, _) in level_and_three()) {
        let n = x.level();
        // Multiplying by Phi_N(zeta) gives zero in the field but not in the representation.
        let phi = cyclotomic_polynomial(n);
        let phi_c = CycNum::new(n, {
            let mut c = vec![rat_int(0); n as usize];
            for (i, a) in phi.coeffs().iter().enumerate() {
                c[i % n as usize] += a;
            }
            c
        }).unwrap();
        let zero = &x * &phi_c;
        prop_assert!(zero.is_zero());
        prop_assert!(zero.embed().norm() < 1e-9);
        prop_assert_eq!(x.is_zero(), x.embed().norm() < 1e-9);
    }

    #[test]
    fn inverse_is_inverse((x, _, _) in level_and_three()) {
        if !x.is_zero() {
            let inv = x.inverse().unwrap();
            prop_assert!((&x * &inv).field_eq(&CycNum::one(x.level())));
        }
    }

    #[test]
    fn embedding_is_a_ring_map((x, y, _) in level_and_three()) {
        let prod = (&x * &y).embed();
        prop_assert!((prod - x.embed() * y.embed()).norm() < 1e-9 * (1.0 + prod.norm()));
    }

    #[test]
    fn series_ring_laws(
        f in series(4, 12), g in series(4, 12), h in series(4, 9),
    ) {
        prop_assert!(f.mul(&g).unwrap().field_eq(&g.mul(&f).unwrap()));
        let lhs = f.mul(&g.add(&h).unwrap()).unwrap();
        let rhs = f.mul(&g).unwrap().add(&f.mul(&h).unwrap()).unwrap();
        prop_assert!(lhs.field_eq(&rhs));
        prop_assert_eq!(lhs.order(), 9);
        prop_assert!(f.sub(&f).unwrap().is_zero());
    }

    #[test]
    fn twist_and_rescale_are_homomorphisms(f in series(3, 10), g in series(3, 10), j in -5i64..5) {
        let prod = f.mul(&g).unwrap();
        prop_assert!(prod.twist(j).field_eq(&f.twist(j).mul(&g.twist(j)).unwrap()));
        prop_assert!(prod.rescale_exponents(2).field_eq(&f.rescale_exponents(2).mul(&g.rescale_exponents(2)).unwrap()));
    }

    #[test]
    fn json_round_trip(f in series(5, 15)) {
        let back = QExpansion::from_json(&f.to_json()).unwrap();
        prop_assert!(back.field_eq(&f));
    }

    #[test]
    fn kernel_product_matches_reference(f in series(3, 12), g in series(4, 12)) {
        // Level 4 only: re-embed f by its own level-4 copy.
        let f4 = QExpansion::from_terms(4, 12, f.terms().map(|(n, c)| {
            let mut v = vec![rat_int(0); 4];
            v[0] = c.coeffs()[0].clone();
            (n, CycNum::new(4, v).unwrap())
        })).unwrap();
        let fast = IntSeries::from_qexp(&f4).unwrap().mul(&IntSeries::from_qexp(&g).unwrap()).unwrap();
        prop_assert!(fast.to_qexp().field_eq(&f4.mul(&g).unwrap()));
    }

    #[test]
    fn parity(idx in index(8, 8)) {
        let sign = if idx.weight() % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        let f = eisenstein_qexp(&idx, 40);
        let g = eisenstein_qexp(&idx.negated(), 40);
        prop_assert!(g.field_eq(&f.scale_rat(&sign)));
    }

    #[test]
    fn t_modularity(idx in index(8, 8)) {
        let t = [[1, 1], [0, 1]];
        let f = eisenstein_qexp(&idx, 40).twist(1);
        prop_assert!(f.field_eq(&eisenstein_qexp(&idx.act(t), 40)));
    }

    #[test]
    fn lift_invariance(idx in index(6, 6), s1 in -3i64..3, s2 in -3i64..3) {
        let n = idx.level() as i64;
        let lifted = EisensteinIndex::new(idx.weight(), idx.level(), idx.a1() as i64 + s1 * n, idx.a2() as i64 + s2 * n).unwrap();
        prop_assert_eq!(lifted, idx);
        let a = (idx.a1() as i64, idx.a2() as i64);
        if a != (0, 0) {
            let b = (1, 0);
            if RelationInstance::new(idx.level(), 0, 0, a, b).is_ok() {
                let x = RelationInstance::new(idx.level(), 1, 0, a, b).unwrap();
                let y = RelationInstance::new(idx.level(), 1, 0, (a.0 + s1 * n, a.1 - s2 * n), (b.0 - n, b.1)).unwrap();
                prop_assert_eq!(x, y);
            }
        }
    }

    #[test]
    fn bracket_swap_symmetry(
        level in 2u32..6,
        coeffs in prop::collection::vec(-3i64..=3, 1..5),
        a in (0i64..6, 0i64..6),
        b in (0i64..6, 0i64..6),
    ) {
        let p = HomPoly::from_ints(&coeffs);
        let n = level as i64;
        let nz = |x: (i64, i64)| x.0 % n != 0 || x.1 % n != 0;
        prop_assume!(nz(a) && nz(b));
        let lhs = bracket(&p, a, b, level, 15).unwrap();
        let rhs = bracket(&p.swap(), b, a, level, 15).unwrap();
        prop_assert!(lhs.field_eq(&rhs));
    }

    #[test]
    fn residual_zero_at_random_instance(
        level in 2u32..=6, k1 in 0u32..=3, k2 in 0u32..=3,
        a in (0i64..6, 0i64..6), b in (0i64..6, 0i64..6),
    ) {
        if let Ok(inst) = RelationInstance::new(level, k1, k2, a, b) {
            prop_assert!(relation_residual(&inst, 24).unwrap().is_zero());
        }
    }

    #[test]
    fn numeric_parity(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, k in 1u32..=6) {
        let p = TorusPoint::new(x1, x2);
        prop_assume!(p.lattice_distance(Complex64::new(0.3, 1.1)) > 1e-3);
        let cfg = NumericConfig::default();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let f = eval_e_fourier(k, p, &cfg).unwrap();
        let g = eval_e_fourier(k, p.neg(), &cfg).unwrap();
        prop_assert!((g - f * sign).norm() < 1e-10 * (1.0 + f.norm()));
    }
}
