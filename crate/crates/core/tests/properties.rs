use bruhat_core::double::{dress, dress_inverse, gamma_lower};
use bruhat_core::gdbc::GdbcSpace;
use bruhat_core::lie::WeylWord;
use bruhat_core::linalg::{
    det, diag_part, dist, eye, gauss_decompose, lower_defect, opposite_gauss_decompose, re, torus_sqrt, upper_defect, Branch,
    CMatrix,
};
use bruhat_core::report::format_residual;
use bruhat_core::sampling::{complex, lower_borel, sample_rng, torus, upper_borel};
use bruhat_core::twist::cotangent_twist;
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn unit_upper(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let mut m = eye(n);
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = complex(rng, scale);
        }
    }
    m
}

fn unit_lower(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    unit_upper(rng, n, scale).transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_recovers_its_factors(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = sample_rng(seed, "prop-gauss", 0);
        let (m, h, u) = (unit_lower(&mut rng, n, 1.0), torus(&mut rng, n, 1.0), unit_upper(&mut rng, n, 1.0));
        let f = gauss_decompose(&(&m * &h * &u)).unwrap();
        prop_assert!(dist(&f.m, &m) < 1e-9);
        prop_assert!(dist(&f.h, &h) < 1e-9);
        prop_assert!(dist(&f.n, &u) < 1e-9);
        prop_assert_eq!(upper_defect(&f.m), 0.0);
        prop_assert_eq!(lower_defect(&f.n), 0.0);
        prop_assert_eq!(diag_part(&f.h), f.h);
    }

    #[test]
    fn opposite_gauss_recovers_its_factors(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = sample_rng(seed, "prop-opposite-gauss", 0);
        let (u, h, m) = (unit_upper(&mut rng, n, 1.0), torus(&mut rng, n, 1.0), unit_lower(&mut rng, n, 1.0));
        let f = opposite_gauss_decompose(&(&u * &h * &m)).unwrap();
        prop_assert!(dist(&f.n, &u) < 1e-9);
        prop_assert!(dist(&f.h, &h) < 1e-9);
        prop_assert!(dist(&f.m, &m) < 1e-9);
    }

    #[test]
    fn torus_sqrt_squares_back_inside_sl_n(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = sample_rng(seed, "prop-torus-sqrt", 0);
        let t = torus(&mut rng, n, 2.0);
        let s = torus_sqrt(&t, &Branch::Principal);
        prop_assert!(dist(&(&s * &s), &t) < 1e-12 * (1.0 + t.norm()));
        prop_assert!((det(&s) - re(1.0)).norm() < 1e-12);
        prop_assert_eq!(diag_part(&s), s);
    }

    #[test]
    fn dressing_is_inverted_by_the_opposite_dressing(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = sample_rng(seed, "prop-dress", 0);
        let (b, u) = (upper_borel(&mut rng, n, 0.3), lower_borel(&mut rng, n, 0.3));
        let (u_prime, b_prime) = dress(&b, &u, &Branch::Principal).unwrap();
        prop_assert!(dist(&(&b * &u), &(&u_prime * &b_prime)) < 1e-10);
        let (b_back, u_back) = dress_inverse(&u_prime, &b_prime, &Branch::Principal).unwrap();
        prop_assert!(dist(&b_back, &b) < 1e-10);
        prop_assert!(dist(&u_back, &u) < 1e-10);
        prop_assert!(gamma_lower(&b, &u).unwrap().residual() < 1e-10);
    }

    #[test]
    fn cotangent_twist_is_a_groupoid(seed in any::<u64>()) {
        let ctx = cotangent_twist();
        let mut rng = sample_rng(seed, "prop-tstar", 0);
        let [p1, p2, p3] = ctx.sample_composable_triple(&mut rng, 1.0).unwrap();
        prop_assert!(ctx.axiom_residual(&p1, &p2).unwrap() < 1e-12);
        prop_assert!(ctx.associativity_residual(&p1, &p2, &p3).unwrap() < 1e-12);
    }

    #[test]
    fn gdbc_inverse_gives_the_identity(seed in any::<u64>(), word in prop::sample::select(vec![(vec![1], 2), (vec![1, 1], 2), (vec![1, 2], 3), (vec![2, 1, 2], 3)])) {
        let w = WeylWord::new(word.0, word.1).unwrap();
        let space = GdbcSpace::new(&w, &w, word.1).unwrap();
        let mut rng = sample_rng(seed, "prop-gdbc", 0);
        let x = space.sample(&mut rng, 0.5);
        prop_assume!(x.is_ok());
        let x = x.unwrap();
        let left = space.mult(&x, &space.inverse(&x).unwrap()).unwrap();
        prop_assert!(left.dist(&space.identity(&space.source(&x)).unwrap()) < 1e-9);
        let right = space.mult(&space.inverse(&x).unwrap(), &x).unwrap();
        prop_assert!(right.dist(&space.identity(&space.target(&x)).unwrap()) < 1e-9);
    }

    #[test]
    fn residual_strings_round_trip(x in any::<f64>()) {
        let s = format_residual(x);
        if x.is_nan() {
            prop_assert_eq!(s, "nan");
        } else if x.is_infinite() {
            prop_assert_eq!(s, "inf");
        } else {
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
