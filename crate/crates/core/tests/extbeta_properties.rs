use mlbeta::extbeta::{
    classical_beta, ext_beta, ext_beta_incomplete, mellin_rhs, verify_beta_identity, BetaArgs, BetaCheck, ExtParams,
    Representation,
};
use proptest::prelude::*;

fn value(args: BetaArgs, params: &ExtParams, repr: Representation) -> (f64, f64) {
    let r = ext_beta(args, params, repr, 1e-12).unwrap();
    assert!(r.converged, "{args:?} {params:?} {repr:?}: {r:?}");
    (r.value, r.abs_error_estimate)
}

fn grid() -> Vec<(BetaArgs, ExtParams)> {
    let shapes = [(0.6, 1.4), (1.0, 1.0), (2.0, 3.0), (3.5, 0.9), (1.5, 2.5)];
    let params = [
        (0.1, 0.2, 0.7, 1.0, 1.0),
        (0.5, 0.05, 1.0, 1.5, 0.5),
        (1.0, 1.0, 0.4, 0.8, 1.2),
        (0.02, 2.0, 1.6, 1.0, 2.0),
        (0.3, 0.0, 0.9, 2.0, 1.0),
    ];
    let mut out = Vec::new();
    for &(e1, e2) in &shapes {
        for &(p, q, l, s, t) in &params {
            out.push((BetaArgs::new(e1, e2).unwrap(), ExtParams::new(p, q, l, s, t).unwrap()));
        }
    }
    out
}

#[test]
fn representations_agree_pairwise_on_grid() {
    let pts = grid();
    assert!(pts.len() >= 20);
    for (args, params) in pts {
        let vals: Vec<(f64, f64)> = Representation::STANDARD.iter().map(|&r| value(args, &params, r)).collect();
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                let (a, b) = (vals[i].0, vals[j].0);
                let rel = ((a - b) / b).abs();
                assert!(rel < 1e-8, "{args:?} {params:?} {i} vs {j}: {a} {b}");
                let bound = 3.0 * (vals[i].1 + vals[j].1) + 8.0 * f64::EPSILON * b.abs();
                assert!(
                    (a - b).abs() <= bound.max(1e-13 * b.abs()),
                    "{args:?} {params:?} {i} vs {j}: {a} {b} err bound {bound:e}"
                );
            }
        }
    }
}

#[test]
fn functional_relation_on_grid() {
    for (args, params) in grid() {
        let rep = verify_beta_identity(BetaCheck::FunctionalRelation, args, &params, 1e-9);
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn infinite_summation_partial_residual_shrinks() {
    let params = ExtParams::new(0.2, 0.3, 0.8, 1.0, 1.0).unwrap();
    for &(e1, e2) in &[(1.0, 1.0), (1.5, 0.7), (2.5, 2.0)] {
        let args = BetaArgs::new(e1, e2).unwrap();
        let mut last = f64::INFINITY;
        for n in [4, 8, 16, 32] {
            let rep = verify_beta_identity(BetaCheck::SummationInfinite { terms: n }, args, &params, 1e-9);
            assert!(rep.pass, "{rep:?}");
            let raw = rep.partial_residual.unwrap();
            assert!(raw < last, "N = {n}: {raw} !< {last}");
            last = raw;
        }
    }
}

#[test]
fn finite_summation_with_regularized_argument() {
    let params = ExtParams::new(0.1, 0.5, 1.0, 1.0, 1.0).unwrap();
    for &(e1, e2) in &[(1.0, 0.6), (2.0, 1.5), (1.5, 2.5)] {
        let rep = verify_beta_identity(
            BetaCheck::SummationFinite { terms: 64 },
            BetaArgs { eta1: e1, eta2: e2 },
            &params,
            1e-9,
        );
        assert!(rep.pass, "{rep:?}");
        assert!(rep.tail.is_some());
    }
}

#[test]
fn binomial_recurrence() {
    let params = ExtParams::new(0.0, 0.8, 1.0, 1.0, 1.0).unwrap();
    for n in 1..=3 {
        for &eta in &[0.5, 1.3, 2.0] {
            let rep = verify_beta_identity(
                BetaCheck::RecurrenceBinomial { n },
                BetaArgs { eta1: eta, eta2: 1.0 },
                &params,
                1e-8,
            );
            assert!(rep.pass, "{rep:?}");
        }
    }
    // slowly decaying kernel: needs τ > η + n
    let params = ExtParams::new(0.3, 0.5, 0.7, 1.0, 4.0).unwrap();
    let rep =
        verify_beta_identity(BetaCheck::RecurrenceBinomial { n: 2 }, BetaArgs { eta1: 0.8, eta2: 1.0 }, &params, 1e-8);
    assert!(rep.pass, "{rep:?}");
    let rep =
        verify_beta_identity(BetaCheck::RecurrenceBinomial { n: 4 }, BetaArgs { eta1: 0.8, eta2: 1.0 }, &params, 1e-8);
    assert!(!rep.pass);
}

#[test]
fn mellin_transform_examples() {
    let one = BetaArgs::new(1.0, 1.0).unwrap();
    let cases = [
        (0.5, 0.5, one, ExtParams::new(0.0, 0.0, 1.0, 1.0, 1.0).unwrap()),
        (0.5, 0.5, one, ExtParams::new(0.0, 0.0, 0.7, 1.0, 1.0).unwrap()),
        (0.25, 0.75, BetaArgs::new(2.0, 3.0).unwrap(), ExtParams::new(0.0, 0.0, 1.0, 2.0, 0.5).unwrap()),
    ];
    for (r, s, args, params) in cases {
        for check in [BetaCheck::Mellin { r, s }, BetaCheck::DoubleIntegral { r, s }] {
            let start = std::time::Instant::now();
            let rep = verify_beta_identity(check, args, &params, 1e-4);
            assert!(rep.pass, "{rep:?}");
            assert!(rep.residual < 1e-6, "{rep:?}");
            assert_eq!(rep.rhs, mellin_rhs(r, s, args, &params).unwrap());
            eprintln!("{check:?} lambda={} residual {:e} in {:?}", params.lambda, rep.residual, start.elapsed());
        }
    }
}

#[test]
fn incomplete_is_monotone() {
    let args = BetaArgs::new(1.5, 0.8).unwrap();
    let params = ExtParams::new(0.2, 0.4, 0.6, 1.0, 1.3).unwrap();
    let mut last = 0.0;
    for i in 0..=40 {
        let x = i as f64 / 40.0;
        let v = ext_beta_incomplete(x, args, &params, 1e-12).unwrap().value;
        assert!(v >= last, "x = {x}: {v} < {last}");
        last = v;
    }
    let (full, _) = value(args, &params, Representation::Direct);
    assert!((last - full).abs() <= 1e-14 * full);
}

fn arb_params() -> impl Strategy<Value = ExtParams> {
    (0.0..3.0f64, 0.0..3.0f64, 0.2..1.9f64, 0.3..2.5f64, 0.3..2.5f64)
        .prop_map(|(p, q, l, s, t)| ExtParams::new(p, q, l, s, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swap_symmetry(e1 in 0.3..5.0f64, e2 in 0.3..5.0f64, params in arb_params()) {
        let args = BetaArgs::new(e1, e2).unwrap();
        let (a, _) = value(args, &params, Representation::Direct);
        let (b, _) = value(args.swapped(), &params.swapped(), Representation::Direct);
        prop_assert!(((a - b) / b).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn reduces_to_classical(e1 in 0.2..8.0f64, e2 in 0.2..8.0f64, params in arb_params()) {
        let args = BetaArgs::new(e1, e2).unwrap();
        let (v, _) = value(args, &params.with_pq(0.0, 0.0), Representation::Direct);
        let want = classical_beta(args).unwrap();
        prop_assert!(((v - want) / want).abs() < 1e-10, "{} vs {}", v, want);
    }

    #[test]
    fn damping_is_monotone(e1 in 0.3..4.0f64, e2 in 0.3..4.0f64, params in arb_params(), lambda in 0.2..=1.0f64, dp in 0.01..2.0f64) {
        // E_λ(−y) is completely monotone only for λ ≤ 1
        let params = ExtParams { lambda, ..params };
        let args = BetaArgs::new(e1, e2).unwrap();
        let (base, _) = value(args, &params, Representation::Direct);
        let (more_p, _) = value(args, &params.with_pq(params.p + dp, params.q), Representation::Direct);
        let (more_q, _) = value(args, &params.with_pq(params.p, params.q + dp), Representation::Direct);
        prop_assert!(more_p <= base * (1.0 + 1e-12));
        prop_assert!(more_q <= base * (1.0 + 1e-12));
    }
}
