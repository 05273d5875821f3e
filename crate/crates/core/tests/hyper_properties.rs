use mlbeta::extbeta::{ext_beta, BetaArgs, ExtParams, Representation};
use mlbeta::hyper::{
    ext_1f1, ext_2f1, ext_2f1_deriv, gauss_2f1, kummer_1f1, verify_hyper_identity, ArgumentMap, EvalMethod, HyperArgs,
    HyperCheck,
};
use mlbeta::special::beta;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn f(args: HyperArgs, params: &ExtParams, method: EvalMethod) -> f64 {
    let r = ext_2f1(args, params, method, 1e-14).unwrap();
    assert!(r.converged, "{args:?} {params:?} {method:?}: {r:?}");
    r.value
}

fn phi(e2: f64, e3: f64, z: f64, params: &ExtParams, method: EvalMethod) -> f64 {
    let r = ext_1f1(e2, e3, z, params, method, 1e-14).unwrap();
    assert!(r.converged, "{e2} {e3} {z} {params:?} {method:?}: {r:?}");
    r.value
}

fn gauss_grid() -> Vec<HyperArgs> {
    let mut out = Vec::new();
    for &(a, b, c) in &[(0.5, 1.5, 3.0), (1.0, 1.0, 2.0), (2.0, 0.7, 2.2), (-1.5, 1.2, 4.0)] {
        for &z in &[-0.8, -0.3, 0.2, 0.5, 0.85] {
            out.push(HyperArgs::new(a, b, c, z).unwrap());
        }
    }
    out
}

fn damped() -> [ExtParams; 3] {
    [
        ExtParams::new(0.2, 0.1, 0.8, 1.0, 1.0).unwrap(),
        ExtParams::new(0.5, 0.3, 1.0, 1.5, 0.7).unwrap(),
        ExtParams::new(0.05, 1.0, 1.4, 0.8, 1.2).unwrap(),
    ]
}

#[test]
fn gauss_type_reduces_to_classical() {
    let grid = gauss_grid();
    assert!(grid.len() >= 20);
    for &params in &[ExtParams::classical(), ExtParams::new(0.0, 0.0, 0.6, 2.0, 0.5).unwrap()] {
        for &args in &grid {
            let want = gauss_2f1(args.eta1, args.eta2, args.eta3, args.z).unwrap().value;
            for method in [EvalMethod::Series, EvalMethod::EulerIntegral] {
                let got = f(args, &params, method);
                assert!(rel(got, want) < 1e-10, "{args:?} {method:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn confluent_reduces_to_classical() {
    let mut n = 0;
    for &(a, b) in &[(0.5, 1.5), (1.0, 2.0), (1.2, 2.7), (2.0, 5.0)] {
        for &z in &[-6.0, -1.0, 0.3, 2.0, 8.0] {
            let want = kummer_1f1(a, b, z).unwrap().value;
            for method in [EvalMethod::Series, EvalMethod::EulerIntegral] {
                let got = phi(a, b, z, &ExtParams::classical(), method);
                assert!(rel(got, want) < 1e-10, "({a},{b},{z}) {method:?}: {got} vs {want}");
            }
            n += 1;
        }
    }
    assert!(n >= 20);
}

#[test]
fn series_and_integral_agree() {
    for params in damped() {
        for args in gauss_grid() {
            let (s, e) = (f(args, &params, EvalMethod::Series), f(args, &params, EvalMethod::EulerIntegral));
            assert!(rel(s, e) < 1e-8, "{args:?} {params:?}: {s} vs {e}");
        }
        for &(a, b, z) in &[(1.2, 2.7, 1.5), (0.5, 2.0, -3.0), (2.0, 3.5, 5.0)] {
            let (s, e) = (phi(a, b, z, &params, EvalMethod::Series), phi(a, b, z, &params, EvalMethod::EulerIntegral));
            assert!(rel(s, e) < 1e-8, "({a},{b},{z}) {params:?}: {s} vs {e}");
        }
    }
}

#[test]
fn value_at_origin_is_leading_coefficient() {
    let args = HyperArgs::new(0.7, 1.3, 2.9, 0.0).unwrap();
    assert_eq!(f(args, &ExtParams::classical(), EvalMethod::Series), 1.0);
    for params in damped() {
        let b = ext_beta(BetaArgs::new(1.3, 1.6).unwrap(), &params, Representation::Direct, 1e-14).unwrap().value;
        let want = b / beta(1.3, 1.6).unwrap();
        assert!(rel(f(args, &params, EvalMethod::Series), want) < 1e-12);
        assert!(rel(f(args, &params, EvalMethod::EulerIntegral), want) < 1e-10);
        let b = ext_beta(BetaArgs::new(0.5, 1.5).unwrap(), &params, Representation::Direct, 1e-14).unwrap().value;
        let want = b / beta(0.5, 1.5).unwrap();
        assert!(rel(phi(0.5, 2.0, 0.0, &params, EvalMethod::Series), want) < 1e-12);
    }
}

#[test]
fn series_path_refuses_large_arguments() {
    let args = HyperArgs::new(1.0, 1.0, 2.0, 0.95).unwrap();
    assert!(ext_2f1(args, &ExtParams::classical(), EvalMethod::Series, 1e-10).is_err());
    assert!(ext_2f1(args.with_z(1.2), &ExtParams::classical(), EvalMethod::EulerIntegral, 1e-10).is_err());
    assert!(HyperArgs::new(1.0, 2.0, 1.5, 0.1).is_err());
    let r = ext_2f1(args, &ExtParams::classical(), EvalMethod::EulerIntegral, 1e-12).unwrap();
    assert!(rel(r.value, -(0.05f64.ln()) / 0.95) < 1e-11);
}

#[test]
fn derivatives_match_finite_differences() {
    let h = 1e-5;
    let cases = [
        (HyperArgs::new(0.5, 1.5, 3.0, 0.2).unwrap(), ExtParams::new(0.2, 0.1, 0.8, 1.0, 1.0).unwrap()),
        (HyperArgs::new(1.0, 1.0, 2.0, 0.3).unwrap(), ExtParams::classical()),
        (HyperArgs::new(2.0, 0.7, 2.2, -0.4).unwrap(), ExtParams::new(0.4, 0.3, 1.3, 1.2, 0.9).unwrap()),
    ];
    for (args, params) in cases {
        assert!(rel(ext_2f1_deriv(0, args, &params).unwrap(), f(args, &params, EvalMethod::Series)) < 1e-13);
        for n in 1..=2u32 {
            // central difference of the order n−1 formula
            let up = ext_2f1_deriv(n - 1, args.with_z(args.z + h), &params).unwrap();
            let down = ext_2f1_deriv(n - 1, args.with_z(args.z - h), &params).unwrap();
            let fd = (up - down) / (2.0 * h);
            let exact = ext_2f1_deriv(n, args, &params).unwrap();
            assert!(rel(fd, exact) < 1e-6, "n={n} {args:?}: {fd} vs {exact}");
        }
    }
    // d/dz of −ln(1−z)/z at 0.3
    let z: f64 = 0.3;
    let want = 1.0 / (z * (1.0 - z)) + (-z).ln_1p() / (z * z);
    let got = ext_2f1_deriv(1, HyperArgs::new(1.0, 1.0, 2.0, z).unwrap(), &ExtParams::classical()).unwrap();
    assert!(rel(got, want) < 1e-12, "{got} vs {want}");
    assert!(ext_2f1_deriv(9, HyperArgs::new(1.0, 1.0, 2.0, z).unwrap(), &ExtParams::classical()).is_err());
}

#[test]
fn transformations_hold_with_swapped_damping() {
    let args = HyperArgs::new(0.7, 1.2, 2.5, 0.4).unwrap();
    let params = ExtParams::new(0.2, 0.3, 1.0, 1.0, 1.0).unwrap();
    let rep = verify_hyper_identity(HyperCheck::Pfaff { args }, &params, 1e-8);
    assert!(rep.pass, "{rep:?}");
    assert!(rep.printed_residual.unwrap() > 1e-6, "{rep:?}");
    for params in damped() {
        for &(map, z) in &[
            (ArgumentMap::Reciprocal, 0.6),
            (ArgumentMap::Reciprocal, 2.0),
            (ArgumentMap::Ratio, 0.5),
            (ArgumentMap::Ratio, -0.4),
        ] {
            let rep = verify_hyper_identity(HyperCheck::PfaffArgument { map, args: args.with_z(z) }, &params, 1e-8);
            assert!(rep.pass, "{rep:?}");
        }
        for &z in &[-2.0, 0.5, 3.0] {
            let rep = verify_hyper_identity(HyperCheck::Kummer { eta2: 1.2, eta3: 2.7, z }, &params, 1e-8);
            assert!(rep.pass, "{rep:?}");
            assert!(rep.printed_residual.is_some());
        }
    }
    // unchanged damping is exact when the kernels are symmetric
    let sym = ExtParams::new(0.3, 0.3, 0.9, 1.1, 1.1).unwrap();
    let rep = verify_hyper_identity(HyperCheck::Pfaff { args }, &sym, 1e-8);
    assert!(rep.pass && rep.printed_residual.unwrap() < 1e-10, "{rep:?}");
}

#[test]
fn generating_function() {
    let params = ExtParams::new(0.2, 0.1, 0.8, 1.0, 1.0).unwrap();
    let at_zero = HyperCheck::GeneratingFunction { nu: 0.8, eta2: 1.2, eta3: 2.5, z: 0.3, t: 0.0, terms: 32 };
    let rep = verify_hyper_identity(at_zero, &params, 1e-13);
    assert!(rep.pass, "{rep:?}");
    for &t in &[0.1, 0.3] {
        for &z in &[-0.5, 0.2, 0.5] {
            let check = HyperCheck::GeneratingFunction { nu: params.lambda, eta2: 1.2, eta3: 2.5, z, t, terms: 32 };
            let rep = verify_hyper_identity(check, &params, 1e-6);
            assert!(rep.pass, "{rep:?}");
            assert!(rep.tail.unwrap() < 1e-6);
        }
    }
}

#[test]
fn mellin_transforms() {
    let params = ExtParams::new(0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
    let args = HyperArgs::new(0.5, 1.0, 2.0, 0.3).unwrap();
    let rep = verify_hyper_identity(HyperCheck::MellinF { args, r: 0.5, s: 0.5 }, &params, 1e-4);
    assert!(rep.pass && rep.residual < 1e-6, "{rep:?}");
    let params = ExtParams::new(0.0, 0.0, 0.8, 1.5, 0.7).unwrap();
    let rep = verify_hyper_identity(HyperCheck::MellinF { args, r: 0.4, s: 0.6 }, &params, 1e-4);
    assert!(rep.pass && rep.residual < 1e-6, "{rep:?}");
    let rep =
        verify_hyper_identity(HyperCheck::MellinPhi { eta2: 1.2, eta3: 2.7, z: 1.5, r: 0.4, s: 0.6 }, &params, 1e-4);
    assert!(rep.pass && rep.residual < 1e-6, "{rep:?}");
}

#[test]
fn representations_of_hypergeometric_functions() {
    for params in damped() {
        for &z in &[-2.0, -0.5, 0.3, 0.85, 0.97] {
            let args = HyperArgs::new(0.9, 1.3, 2.8, z).unwrap();
            let rep = verify_hyper_identity(HyperCheck::RepEquivalence { args }, &params, 1e-8);
            assert!(rep.pass, "{rep:?}");
        }
    }
}
