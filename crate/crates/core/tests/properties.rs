use kgbounds::bounds::{gamma, gamma_ratio, ratio_certificate, SdpValue};
use kgbounds::exact::{ratio, ExactScalar};
use kgbounds::matrix::{ExactMatrix, IntMatrix, MatrixInput};
use kgbounds::oracle::heuristic_sdp;
use kgbounds::polytope::InvariantBasis;
use kgbounds::polytope::{vertex_value_int, SignStrategy};
use kgbounds::projection::{
    bpcg_project, BpcgOptions, DecompositionCertificate, LmoConfig, ReducedSpace,
};
use kgbounds::solver::{sdp1_branch_and_bound, sdp1_bruteforce, sdp1_rectangular, SolveOptions};
use proptest::prelude::*;

fn quad() -> impl Strategy<Value = ExactScalar> {
    (
        -20i64..20,
        1i64..9,
        -20i64..20,
        1i64..9,
        prop_oneof![Just(2u64), Just(3), Just(5)],
    )
        .prop_map(|(a, b, c, d, r)| {
            &ExactScalar::from_ratio(a, b)
                + &(&ExactScalar::from_ratio(c, d) * &ExactScalar::sqrt_int(r))
        })
}

fn int_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-9i64..=9, r * c).prop_map(move |v| IntMatrix::new(r, c, v).unwrap())
    })
}

/// Independent oracle: every sign pair, no pruning, no symmetry tricks.
fn naive_sdp1(m: &IntMatrix) -> i64 {
    let (r, c) = m.shape();
    let mut best = i64::MIN;
    for ma in 0..1u32 << r {
        for mb in 0..1u32 << c {
            let mut v = 0;
            for x in 0..r {
                for y in 0..c {
                    let s = if (ma >> x & 1) ^ (mb >> y & 1) == 1 {
                        -1
                    } else {
                        1
                    };
                    v += s * m.get(x, y);
                }
            }
            best = best.max(v);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms(a in quad(), b in quad(), c in quad()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, ExactScalar::zero());
        if let Some(q) = a.checked_div(&b) {
            prop_assert_eq!(&q * &b, a.clone());
        }
    }

    #[test]
    fn order_agrees_with_floats(a in quad(), b in quad()) {
        let (x, y) = (a.to_f64(), b.to_f64());
        if (x - y).abs() > 1e-9 {
            prop_assert_eq!(a < b, x < y);
        }
        prop_assert_eq!(a.signum() as f64, if x.abs() < 1e-300 { 0.0 } else { x.signum() });
    }

    #[test]
    fn enclosures_contain_value(a in quad()) {
        let i = a.enclosure(60);
        prop_assert!(i.lo_f64() <= a.to_f64() + 1e-12 && a.to_f64() <= i.hi_f64() + 1e-12);
    }

    #[test]
    fn solvers_match_naive(m in int_matrix(6, 6)) {
        let want = naive_sdp1(&m);
        let input = MatrixInput::Integer(m.clone());
        let bf = sdp1_bruteforce(&input).unwrap();
        let bb = sdp1_branch_and_bound(&input, &SolveOptions::default()).unwrap();
        prop_assert_eq!(bf.value.clone(), ExactScalar::from_int(want));
        prop_assert_eq!(bb.value.clone(), ExactScalar::from_int(want));
        prop_assert_eq!(vertex_value_int(&m, &bb.strategy).unwrap(), want as i128);
        let t = sdp1_rectangular(&MatrixInput::Integer(m.transpose()), &SolveOptions::default()).unwrap();
        prop_assert_eq!(t.value, ExactScalar::from_int(want));
    }

    #[test]
    fn heuristic_never_exceeds_exact(m in int_matrix(7, 7), seed in 0u64..1000) {
        let exact = naive_sdp1(&m) as f64;
        let h = heuristic_sdp(&m.to_f64(), 1, 8, seed).unwrap();
        prop_assert!(h.value <= exact + 1e-9);
    }

    #[test]
    fn sign_strategy_rejects_zero(a in prop::collection::vec(-1i8..=1, 1..6)) {
        let ok = a.iter().all(|&s| s != 0);
        prop_assert_eq!(SignStrategy::new(a.clone(), vec![1]).is_ok(), ok);
    }

    #[test]
    fn ratio_certificates_are_scale_invariant(m in int_matrix(4, 4), num in 1i64..50, den in 1i64..50) {
        let e = m.to_exact();
        let r = sdp1_rectangular(&MatrixInput::Exact(e.clone()), &SolveOptions::default()).unwrap();
        prop_assume!(r.value.signum() > 0);
        let lower = e.inner(&e).unwrap();
        let c1 = ratio_certificate("a", 2, 1, &lower, SdpValue::Exact(&r), serde_json::Value::Null).unwrap();
        let k = ExactScalar::from_ratio(num, den);
        let ek: ExactMatrix = e.scale(&k);
        let rk = sdp1_rectangular(&MatrixInput::Exact(ek.clone()), &SolveOptions::default()).unwrap();
        let lk = ek.inner(&e).unwrap();
        let c2 = ratio_certificate("b", 2, 1, &lk, SdpValue::Exact(&rk), serde_json::Value::Null).unwrap();
        prop_assert_eq!(c1.value, c2.value);
    }

    #[test]
    fn decomposition_alpha_is_below_v0(num in 1i64..1000, eps in 0.0f64..0.1) {
        let v0 = ratio(num, 1000);
        let c = DecompositionCertificate::from_reported(v0.clone(), eps, 2).unwrap();
        prop_assert!(c.alpha <= v0);
        prop_assert!(c.epsilon >= eps);
    }
}

#[test]
fn gamma_is_increasing() {
    for d in 1..16 {
        let (a, b) = (
            gamma(d).unwrap().interval(),
            gamma(d + 1).unwrap().interval(),
        );
        assert!(b.certainly_gt(&a), "γ({}) ≤ γ({d})", d + 1);
        assert!(gamma_ratio(d + 1, d)
            .unwrap()
            .interval()
            .certainly_gt(&kgbounds::exact::RationalInterval::from_ratio(1, 1)));
    }
}

#[test]
fn projection_objective_and_gap() {
    // Projection of a point outside cut_1(2,2) (the CHSH point scaled up).
    let basis = InvariantBasis::trivial(2, 2);
    let space = ReducedSpace::new(basis);
    let s = 0.9;
    let target = vec![s, s, s, -s];
    let opts = BpcgOptions {
        tol: 1e-10,
        max_iter: 5000,
        lmo: LmoConfig::default(),
    };
    let p = bpcg_project(&space, &target, &opts, None).unwrap();
    assert!(p.gap >= 0.0);
    assert!(p.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // Distance to the CHSH facet ⟨M, X⟩ ≤ 2 with ‖M‖ = 2.
    assert!((p.distance(&space, &target) - (3.6 - 2.0) / 2.0).abs() < 1e-4);
}
