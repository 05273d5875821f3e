//! Gauss and confluent hypergeometric functions, classical and extended.

use std::f64::consts::PI;

use crate::check::{point, residual, CheckReport, IdentityId};
use crate::error::{domain, Error, Result};
use crate::extbeta::{ext_beta_value, BetaArgs, ExtParams};
use crate::mlf::MlKernel;
use crate::quad::{exp_sinh, integrate_2d, tanh_sinh, QuadConfig, QuadResult, Range};
use crate::special::{self, ln_gamma_sign, KahanSum};

/// Outcome of a series (or series-equivalent) evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub converged: bool,
    /// Bound or estimate for the neglected remainder.
    pub tail_estimate: f64,
}

fn is_nonpositive_int(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

// Σ t_n with t_{n+1} = t_n · ratio(n); stops once terms are negligible and shrinking.
fn hyper_series<R: Fn(f64) -> f64>(ratio: R, max_terms: usize) -> SeriesResult {
    let mut sum = KahanSum::new();
    let mut term = 1.0f64;
    let mut small = 0;
    for n in 0..max_terms {
        sum.add(term);
        let r = ratio(n as f64);
        let next = term * r;
        if next == 0.0 {
            return SeriesResult { value: sum.value(), terms_used: n + 1, converged: true, tail_estimate: 0.0 };
        }
        if next.abs() <= 1e-17 * sum.value().abs() && r.abs() < 1.0 {
            small += 1;
            if small >= 2 {
                let rr = r.abs();
                return SeriesResult {
                    value: sum.value(),
                    terms_used: n + 1,
                    converged: true,
                    tail_estimate: next.abs() / (1.0 - rr),
                };
            }
        } else {
            small = 0;
        }
        if !next.is_finite() {
            break;
        }
        term = next;
    }
    SeriesResult { value: sum.value(), terms_used: max_terms, converged: false, tail_estimate: term.abs() }
}

fn gauss_series(a: f64, b: f64, c: f64, z: f64) -> SeriesResult {
    hyper_series(|n| (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z, 400_000)
}

/// Classical `₂F₁(a, b; c; z)` for `−1 < z ≤ 1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<SeriesResult> {
    if is_nonpositive_int(c) {
        return domain(format!("2F1 lower parameter c={c} is a non-positive integer"));
    }
    if z == 0.0 {
        return Ok(SeriesResult { value: 1.0, terms_used: 1, converged: true, tail_estimate: 0.0 });
    }
    if z == 1.0 {
        let s = c - a - b;
        if s <= 0.0 {
            return domain(format!("2F1 at z=1 needs c-a-b > 0, got {s}"));
        }
        if is_nonpositive_int(c - a) || is_nonpositive_int(c - b) {
            return Ok(SeriesResult { value: 0.0, terms_used: 0, converged: true, tail_estimate: 0.0 });
        }
        let (l1, s1) = ln_gamma_sign(c);
        let (l2, s2) = ln_gamma_sign(s);
        let (l3, s3) = ln_gamma_sign(c - a);
        let (l4, s4) = ln_gamma_sign(c - b);
        let v = s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp();
        return Ok(SeriesResult { value: v, terms_used: 0, converged: true, tail_estimate: 0.0 });
    }
    if !(z > -1.0 && z < 1.0) {
        return domain(format!("2F1 series needs -1 < z < 1, got {z}"));
    }
    if z < -0.5 {
        // Pfaff: (1−z)^{−a} ₂F₁(a, c−b; c; z/(z−1))
        let mut r = gauss_series(a, c - b, c, z / (z - 1.0));
        let f = (1.0 - z).powf(-a);
        r.value *= f;
        r.tail_estimate *= f;
        return Ok(r);
    }
    let gap = c - a - b;
    if z > 0.9 && (gap - gap.round()).abs() > 1e-3 && !is_nonpositive_int(a) && !is_nonpositive_int(b) {
        // connection formula around z = 1
        let w = 1.0 - z;
        let r1 = gauss_series(a, b, a + b - c + 1.0, w);
        let r2 = gauss_series(c - a, c - b, gap + 1.0, w);
        let coef = |x: [f64; 2], y: [f64; 2]| -> f64 {
            let mut ln = 0.0;
            let mut sg = 1.0;
            for v in x {
                if is_nonpositive_int(v) {
                    return f64::INFINITY;
                }
                let (l, s) = ln_gamma_sign(v);
                ln += l;
                sg *= s;
            }
            for v in y {
                if is_nonpositive_int(v) {
                    return 0.0;
                }
                let (l, s) = ln_gamma_sign(v);
                ln -= l;
                sg *= s;
            }
            sg * ln.exp()
        };
        let ca = coef([c, gap], [c - a, c - b]);
        let cb = coef([c, -gap], [a, b]);
        let pw = w.powf(gap);
        let v = ca * r1.value + cb * pw * r2.value;
        return Ok(SeriesResult {
            value: v,
            terms_used: r1.terms_used + r2.terms_used,
            converged: r1.converged && r2.converged && v.is_finite(),
            tail_estimate: (ca * r1.tail_estimate).abs() + (cb * pw * r2.tail_estimate).abs(),
        });
    }
    Ok(gauss_series(a, b, c, z))
}

/// Classical `₁F₁(a; b; z)`; negative `z` goes through Kummer's transformation.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<SeriesResult> {
    if is_nonpositive_int(b) {
        return domain(format!("1F1 lower parameter b={b} is a non-positive integer"));
    }
    if !z.is_finite() {
        return domain(format!("1F1 argument must be finite, got {z}"));
    }
    if z == 0.0 {
        return Ok(SeriesResult { value: 1.0, terms_used: 1, converged: true, tail_estimate: 0.0 });
    }
    let max_terms = 20_000;
    if z < 0.0 && !is_nonpositive_int(a) {
        let mut r = hyper_series(|n| (b - a + n) / ((b + n) * (n + 1.0)) * -z, max_terms);
        let f = z.exp();
        r.value *= f;
        r.tail_estimate *= f;
        return Ok(r);
    }
    let r = hyper_series(|n| (a + n) / ((b + n) * (n + 1.0)) * z, max_terms);
    if !r.value.is_finite() {
        return Err(Error::Overflow(format!("1F1({a}; {b}; {z}) exceeds the floating-point range")));
    }
    Ok(r)
}

/// Parameters `(η₁, η₂; η₃; z)` of the extended Gauss function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperArgs {
    pub eta1: f64,
    pub eta2: f64,
    pub eta3: f64,
    pub z: f64,
}

impl HyperArgs {
    pub fn new(eta1: f64, eta2: f64, eta3: f64, z: f64) -> Result<Self> {
        let args = Self { eta1, eta2, eta3, z };
        args.validate()?;
        Ok(args)
    }

    fn validate(&self) -> Result<()> {
        if ![self.eta1, self.eta2, self.eta3, self.z].iter().all(|v| v.is_finite()) {
            return domain("hypergeometric parameters must be finite");
        }
        if !(self.eta3 > self.eta2 && self.eta2 > 0.0) {
            return domain(format!("need eta3 > eta2 > 0 (got eta2 = {}, eta3 = {})", self.eta2, self.eta3));
        }
        Ok(())
    }

    pub fn with_z(&self, z: f64) -> Self {
        Self { z, ..*self }
    }

    // shapes (η₂, η₃−η₂) of the beta weight
    fn shapes(&self) -> BetaArgs {
        BetaArgs { eta1: self.eta2, eta2: self.eta3 - self.eta2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Series,
    EulerIntegral,
}

/// Largest `|z|` accepted by the series path.
pub const SERIES_Z_LIMIT: f64 = 0.9;
const MAX_COEFFICIENTS: usize = 200;
// Relative accuracy of each extended-beta coefficient (shared cache key).
const COEF_TOL: f64 = 1e-13;

// B(η₂+n, η₃−η₂; p, q, …) / B(η₂, η₃−η₂)
fn coefficient(shapes: BetaArgs, n: usize, params: &ExtParams) -> Result<f64> {
    if params.p == 0.0 && params.q == 0.0 {
        // undamped: (η₂)ₙ/(η₃)ₙ
        let total = shapes.eta1 + shapes.eta2;
        return Ok((0..n).map(|k| (shapes.eta1 + k as f64) / (total + k as f64)).product());
    }
    let num = ext_beta_value(BetaArgs { eta1: shapes.eta1 + n as f64, eta2: shapes.eta2 }, params, COEF_TOL)?;
    Ok(num / special::beta(shapes.eta1, shapes.eta2)?)
}

// Σ a_n c_n zⁿ/n! with a_{n+1}/a_n = upper(n); stops on two consecutive
// negligible terms or after MAX_COEFFICIENTS.
fn coefficient_series(
    shapes: BetaArgs,
    params: &ExtParams,
    z: f64,
    upper: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<SeriesResult> {
    let mut sum = KahanSum::new();
    let mut front = 1.0f64;
    let mut prev_term = f64::NAN;
    let mut small = 0;
    for n in 0..MAX_COEFFICIENTS {
        let term = front * coefficient(shapes, n, params)?;
        sum.add(term);
        if !sum.value().is_finite() {
            return Err(Error::Overflow("series exceeds the floating-point range".into()));
        }
        let ratio = (term / prev_term).abs();
        if term == 0.0 || (term.abs() <= tol * sum.value().abs() && ratio < 1.0) {
            small += 1;
            if small >= 2 || term == 0.0 {
                let tail = if ratio < 1.0 { term.abs() * ratio / (1.0 - ratio) } else { term.abs() };
                return Ok(SeriesResult {
                    value: sum.value(),
                    terms_used: n + 1,
                    converged: true,
                    tail_estimate: tail,
                });
            }
        } else {
            small = 0;
        }
        prev_term = term;
        let nf = n as f64;
        front *= upper(nf) * z / (nf + 1.0);
        if front == 0.0 {
            return Ok(SeriesResult { value: sum.value(), terms_used: n + 1, converged: true, tail_estimate: 0.0 });
        }
    }
    Ok(SeriesResult {
        value: sum.value(),
        terms_used: MAX_COEFFICIENTS,
        converged: false,
        tail_estimate: prev_term.abs(),
    })
}

fn integral_result(r: QuadResult, scale: f64) -> SeriesResult {
    SeriesResult {
        value: r.value * scale,
        terms_used: r.evaluations,
        converged: r.converged,
        tail_estimate: r.abs_error_estimate * scale.abs(),
    }
}

// E_λ(−coef/d^power), or 1 when the coefficient vanishes
fn damping(kernel: &MlKernel, coef: f64, power: f64) -> impl Fn(f64) -> f64 + '_ {
    move |d: f64| if coef == 0.0 { 1.0 } else { kernel.eval_neg(coef / d.powf(power)) }
}

// ln of d^e, safe at d = 0 only when the caller has already checked the kernel
fn ln_pow(d: f64, e: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e * d.ln()
    }
}

/// Extended Gauss function `F(η₁, η₂; η₃; z)` with damping `params`.
///
/// The series path needs `|z| ≤ 0.9`; the Euler integral accepts any `z < 1`.
pub fn ext_2f1(args: HyperArgs, params: &ExtParams, method: EvalMethod, tol: f64) -> Result<SeriesResult> {
    args.validate()?;
    params.validate()?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive (got {tol})"));
    }
    let HyperArgs { eta1, z, .. } = args;
    match method {
        EvalMethod::Series => {
            if z.abs() >= 1.0 {
                return domain(format!("series needs |z| < 1 (got {z})"));
            }
            if z.abs() > SERIES_Z_LIMIT {
                return Err(Error::NonConvergence(format!(
                    "series refused for |z| = {} > {SERIES_Z_LIMIT}; use the Euler integral",
                    z.abs()
                )));
            }
            coefficient_series(args.shapes(), params, z, |n| eta1 + n, tol)
        }
        EvalMethod::EulerIntegral => {
            if !(z < 1.0) {
                return domain(format!("Euler integral needs z < 1 (got {z})"));
            }
            euler_2f1(args, params, tol)
        }
    }
}

fn euler_2f1(args: HyperArgs, params: &ExtParams, tol: f64) -> Result<SeriesResult> {
    let HyperArgs { eta1, eta2, eta3, z } = args;
    let kernel = MlKernel::new(params.lambda)?;
    let lo = damping(&kernel, params.p, params.sigma);
    let hi = damping(&kernel, params.q, params.tau);
    let r = tanh_sinh(0.0, 1.0, &QuadConfig::relative(tol), |n| {
        let k = lo(n.from_lo) * hi(n.to_hi);
        if k == 0.0 {
            return 0.0;
        }
        // 1 − zt written to stay accurate as t → 1
        let base = (1.0 - z) + z * n.to_hi;
        let ln_w = ln_pow(n.from_lo, eta2 - 1.0) + ln_pow(n.to_hi, eta3 - eta2 - 1.0) - eta1 * base.ln();
        k * ln_w.exp()
    });
    Ok(integral_result(r, 1.0 / special::beta(eta2, eta3 - eta2)?))
}

/// Extended confluent function `Φ(η₂; η₃; z)` with damping `params`.
///
/// The integral path uses the reflected Euler form
/// `e^z/B · ∫ t^{η₃−η₂−1}(1−t)^{η₂−1} e^{−zt} E_λ(−p/(1−t)^σ) E_λ(−q/t^τ) dt`.
pub fn ext_1f1(eta2: f64, eta3: f64, z: f64, params: &ExtParams, method: EvalMethod, tol: f64) -> Result<SeriesResult> {
    let args = HyperArgs::new(1.0, eta2, eta3, z)?;
    params.validate()?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive (got {tol})"));
    }
    match method {
        EvalMethod::Series => {
            let r = coefficient_series(args.shapes(), params, z, |_| 1.0, tol)?;
            Ok(r)
        }
        EvalMethod::EulerIntegral => {
            let kernel = MlKernel::new(params.lambda)?;
            // u = 1 − t of the natural form: u → from_lo, 1 − u → to_hi
            let k_p = damping(&kernel, params.p, params.sigma);
            let k_q = damping(&kernel, params.q, params.tau);
            let r = tanh_sinh(0.0, 1.0, &QuadConfig::relative(tol), |n| {
                let k = k_p(n.to_hi) * k_q(n.from_lo);
                if k == 0.0 {
                    return 0.0;
                }
                // e^z e^{−zu} folded into one exponent
                let ln_w = ln_pow(n.from_lo, eta3 - eta2 - 1.0) + ln_pow(n.to_hi, eta2 - 1.0) + z * n.to_hi;
                k * ln_w.exp()
            });
            let res = integral_result(r, 1.0 / special::beta(eta2, eta3 - eta2)?);
            if res.value.is_infinite() {
                return Err(Error::Overflow(format!("Phi({eta2}; {eta3}; {z}) exceeds the floating-point range")));
            }
            Ok(res)
        }
    }
}

fn ext_1f1_natural(eta2: f64, eta3: f64, z: f64, params: &ExtParams, tol: f64) -> Result<SeriesResult> {
    let kernel = MlKernel::new(params.lambda)?;
    let lo = damping(&kernel, params.p, params.sigma);
    let hi = damping(&kernel, params.q, params.tau);
    let r = tanh_sinh(0.0, 1.0, &QuadConfig::relative(tol), |n| {
        let k = lo(n.from_lo) * hi(n.to_hi);
        if k == 0.0 {
            return 0.0;
        }
        let ln_w = ln_pow(n.from_lo, eta2 - 1.0) + ln_pow(n.to_hi, eta3 - eta2 - 1.0) + z * n.from_lo;
        k * ln_w.exp()
    });
    Ok(integral_result(r, 1.0 / special::beta(eta2, eta3 - eta2)?))
}

/// `dⁿ/dzⁿ F(η₁, η₂; η₃; z) = (η₁)ₙ(η₂)ₙ/(η₃)ₙ · F(η₁+n, η₂+n; η₃+n; z)`.
pub fn ext_2f1_deriv(n: u32, args: HyperArgs, params: &ExtParams) -> Result<f64> {
    if n > 8 {
        return domain(format!("derivative order is capped at 8 (got {n})"));
    }
    args.validate()?;
    let shifted =
        HyperArgs { eta1: args.eta1 + n as f64, eta2: args.eta2 + n as f64, eta3: args.eta3 + n as f64, z: args.z };
    let front =
        special::pochhammer(args.eta1, n) * special::pochhammer(args.eta2, n) / special::pochhammer(args.eta3, n);
    Ok(front * ext_2f1_value(shifted, params)?)
}

// Series when |z| ≤ 0.9 and it converges, Euler integral otherwise.
fn ext_2f1_value(args: HyperArgs, params: &ExtParams) -> Result<f64> {
    if args.z.abs() <= SERIES_Z_LIMIT {
        let r = ext_2f1(args, params, EvalMethod::Series, 1e-15)?;
        if r.converged {
            return Ok(r.value);
        }
    }
    converged(ext_2f1(args, params, EvalMethod::EulerIntegral, 1e-13)?, "Euler integral")
}

fn converged(r: SeriesResult, what: &str) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence(format!("{what} did not converge (estimate {:e})", r.tail_estimate)))
    }
}

/// Which argument map of the Pfaff transformation to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgumentMap {
    /// `F(…; 1 − 1/z) = z^{η₁} F(η₁, η₃−η₂; η₃; 1 − z)`, `z > 0`.
    Reciprocal,
    /// `F(…; z/(1+z)) = (1+z)^{η₁} F(η₁, η₃−η₂; η₃; −z)`, `z > −1`.
    Ratio,
}

/// Identity to check for the extended hypergeometric functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HyperCheck {
    /// `Σ_{n≤N} C(ν+n−1, n) F(ν+n, η₂; η₃; z) tⁿ = (1−t)^{−ν} F(ν, η₂; η₃; z/(1−t))`.
    GeneratingFunction {
        nu: f64,
        eta2: f64,
        eta3: f64,
        z: f64,
        t: f64,
        terms: usize,
    },
    /// `F(η₁, η₂; η₃; z) = (1−z)^{−η₁} F(η₁, η₃−η₂; η₃; −z/(1−z))`.
    Pfaff {
        args: HyperArgs,
    },
    PfaffArgument {
        map: ArgumentMap,
        args: HyperArgs,
    },
    /// `Φ(η₂; η₃; z) = e^z Φ(η₃−η₂; η₃; −z)`.
    Kummer {
        eta2: f64,
        eta3: f64,
        z: f64,
    },
    MellinF {
        args: HyperArgs,
        r: f64,
        s: f64,
    },
    MellinPhi {
        eta2: f64,
        eta3: f64,
        z: f64,
        r: f64,
        s: f64,
    },
    /// Series and integral representations of `F` and `Φ` against each other.
    RepEquivalence {
        args: HyperArgs,
    },
}

impl HyperCheck {
    pub fn id(&self) -> IdentityId {
        match self {
            HyperCheck::GeneratingFunction { .. } => IdentityId::GeneratingFunction,
            HyperCheck::Pfaff { .. } => IdentityId::Pfaff,
            HyperCheck::PfaffArgument { .. } => IdentityId::PfaffArgument,
            HyperCheck::Kummer { .. } => IdentityId::Kummer,
            HyperCheck::MellinF { .. } => IdentityId::MellinF,
            HyperCheck::MellinPhi { .. } => IdentityId::MellinPhi,
            HyperCheck::RepEquivalence { .. } => IdentityId::RepEquivalence,
        }
    }

    fn point(&self, params: &ExtParams) -> Vec<(String, f64)> {
        let mut v: Vec<(&str, f64)> = match *self {
            HyperCheck::GeneratingFunction { nu, eta2, eta3, z, t, terms } => {
                vec![("nu", nu), ("eta2", eta2), ("eta3", eta3), ("z", z), ("t", t), ("N", terms as f64)]
            }
            HyperCheck::Pfaff { args } | HyperCheck::RepEquivalence { args } => {
                vec![("eta1", args.eta1), ("eta2", args.eta2), ("eta3", args.eta3), ("z", args.z)]
            }
            HyperCheck::PfaffArgument { map, args } => vec![
                ("map", if map == ArgumentMap::Reciprocal { 2.0 } else { 3.0 }),
                ("eta1", args.eta1),
                ("eta2", args.eta2),
                ("eta3", args.eta3),
                ("z", args.z),
            ],
            HyperCheck::Kummer { eta2, eta3, z } => vec![("eta2", eta2), ("eta3", eta3), ("z", z)],
            HyperCheck::MellinF { args, r, s } => {
                vec![("eta1", args.eta1), ("eta2", args.eta2), ("eta3", args.eta3), ("z", args.z), ("r", r), ("s", s)]
            }
            HyperCheck::MellinPhi { eta2, eta3, z, r, s } => {
                vec![("eta2", eta2), ("eta3", eta3), ("z", z), ("r", r), ("s", s)]
            }
        };
        v.extend([
            ("p", params.p),
            ("q", params.q),
            ("lambda", params.lambda),
            ("sigma", params.sigma),
            ("tau", params.tau),
        ]);
        point(&v)
    }
}

/// Evaluates both sides of an identity by separate routes.
///
/// For the Pfaff-type transformations and the Kummer relation the pass flag
/// refers to the form whose right side carries the swapped damping
/// `(q, p, τ, σ)`; the residual with unchanged damping is reported in
/// `printed_residual`.
pub fn verify_hyper_identity(check: HyperCheck, params: &ExtParams, tol: f64) -> CheckReport {
    let id = check.id();
    let pt = check.point(params);
    let outcome = match check {
        HyperCheck::GeneratingFunction { nu, eta2, eta3, z, t, terms } => {
            generating_function(nu, eta2, eta3, z, t, terms, params, tol, pt.clone())
        }
        HyperCheck::Pfaff { args } => pfaff(args, params, tol, pt.clone()),
        HyperCheck::PfaffArgument { map, args } => pfaff_argument(map, args, params, tol, pt.clone()),
        HyperCheck::Kummer { eta2, eta3, z } => kummer(eta2, eta3, z, params, tol, pt.clone()),
        HyperCheck::MellinF { args, r, s } => mellin_f(args, r, s, params, tol, pt.clone()),
        HyperCheck::MellinPhi { eta2, eta3, z, r, s } => mellin_phi(eta2, eta3, z, r, s, params, tol, pt.clone()),
        HyperCheck::RepEquivalence { args } => rep_equivalence(args, params, tol, pt.clone()),
    };
    outcome.unwrap_or_else(|e| CheckReport::failed(id, pt, tol, e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn generating_function(
    nu: f64,
    eta2: f64,
    eta3: f64,
    z: f64,
    t: f64,
    terms: usize,
    params: &ExtParams,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    if !(t.abs() < 1.0) {
        return domain(format!("generating function needs |t| < 1 (got {t})"));
    }
    let inner = z / (1.0 - t);
    if !(inner < 1.0) {
        return domain(format!("z/(1-t) = {inner} must be < 1"));
    }
    let base = HyperArgs::new(nu, eta2, eta3, z)?;
    let mut sum = KahanSum::new();
    let mut weight = 1.0;
    let mut last = 0.0f64;
    let mut before = 0.0f64;
    for n in 0..=terms {
        let nf = n as f64;
        if n > 0 {
            weight *= (nu + nf - 1.0) / nf * t;
        }
        if weight == 0.0 {
            break;
        }
        let term = weight * ext_2f1_value(HyperArgs { eta1: nu + nf, ..base }, params)?;
        sum.add(term);
        before = last;
        last = term;
    }
    let rhs = (1.0 - t).powf(-nu) * ext_2f1_value(base.with_z(inner), params)?;
    let ratio = if before != 0.0 { (last / before).abs() } else { 0.0 };
    let tail = if ratio < 1.0 { last.abs() * ratio / (1.0 - ratio) } else { f64::INFINITY };
    let mut rep = CheckReport::new(IdentityId::GeneratingFunction, pt, sum.value(), rhs, tol);
    rep.tail = Some(tail);
    rep.partial_residual = Some(rep.residual);
    Ok(rep)
}

fn euler_value(args: HyperArgs, params: &ExtParams) -> Result<f64> {
    converged(ext_2f1(args, params, EvalMethod::EulerIntegral, 1e-13)?, "Euler integral")
}

// lhs against right sides with swapped and with unchanged damping
fn transformation_report(
    id: IdentityId,
    pt: Vec<(String, f64)>,
    lhs: f64,
    front: f64,
    rhs_args: HyperArgs,
    params: &ExtParams,
    tol: f64,
) -> Result<CheckReport> {
    let corrected = front * euler_value(rhs_args, &params.swapped())?;
    let printed = front * euler_value(rhs_args, params)?;
    let mut rep = CheckReport::new(id, pt, lhs, corrected, tol);
    rep.printed_residual = Some(residual(lhs, printed));
    Ok(rep)
}

fn pfaff(args: HyperArgs, params: &ExtParams, tol: f64, pt: Vec<(String, f64)>) -> Result<CheckReport> {
    args.validate()?;
    let z = args.z;
    if !(z < 1.0) {
        return domain(format!("Pfaff transformation needs z < 1 (got {z})"));
    }
    let lhs = euler_value(args, params)?;
    let rhs_args = HyperArgs { eta2: args.eta3 - args.eta2, z: -z / (1.0 - z), ..args };
    transformation_report(IdentityId::Pfaff, pt, lhs, (1.0 - z).powf(-args.eta1), rhs_args, params, tol)
}

fn pfaff_argument(
    map: ArgumentMap,
    args: HyperArgs,
    params: &ExtParams,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    args.validate()?;
    let z = args.z;
    let (w, front, rhs_z) = match map {
        ArgumentMap::Reciprocal => {
            if !(z > 0.0) {
                return domain(format!("reciprocal argument map needs z > 0 (got {z})"));
            }
            (1.0 - 1.0 / z, z.powf(args.eta1), 1.0 - z)
        }
        ArgumentMap::Ratio => {
            if !(z > -1.0) {
                return domain(format!("ratio argument map needs z > -1 (got {z})"));
            }
            (z / (1.0 + z), (1.0 + z).powf(args.eta1), -z)
        }
    };
    let lhs = euler_value(args.with_z(w), params)?;
    let rhs_args = HyperArgs { eta2: args.eta3 - args.eta2, z: rhs_z, ..args };
    transformation_report(IdentityId::PfaffArgument, pt, lhs, front, rhs_args, params, tol)
}

fn phi_value(eta2: f64, eta3: f64, z: f64, params: &ExtParams) -> Result<f64> {
    converged(ext_1f1_natural(eta2, eta3, z, params, 1e-13)?, "confluent Euler integral")
}

fn kummer(eta2: f64, eta3: f64, z: f64, params: &ExtParams, tol: f64, pt: Vec<(String, f64)>) -> Result<CheckReport> {
    HyperArgs::new(1.0, eta2, eta3, z)?;
    let lhs = phi_value(eta2, eta3, z, params)?;
    let corrected = z.exp() * phi_value(eta3 - eta2, eta3, -z, &params.swapped())?;
    let printed = z.exp() * phi_value(eta3 - eta2, eta3, -z, params)?;
    let mut rep = CheckReport::new(IdentityId::Kummer, pt, lhs, corrected, tol);
    rep.printed_residual = Some(residual(lhs, printed));
    Ok(rep)
}

// π / (sin πx Γ(1−xλ)), the Mellin transform of E_λ(−u)
fn ml_mellin(x: f64, lambda: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("Mellin variable must lie in (0, 1) (got {x})"));
    }
    let rg = special::recip_gamma(1.0 - x * lambda);
    if rg == 0.0 {
        return domain(format!("1 - {x}*{lambda} is a pole of the gamma function"));
    }
    Ok(PI * rg / (PI * x).sin())
}

const MELLIN_QUAD_TOL: f64 = 1e-8;

// ∫∫ p^{r−1} q^{s−1} f(p, q) dq dp over the open quadrant
fn quadrant_mellin(r: f64, s: f64, mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<QuadResult> {
    let mut fail: Option<String> = None;
    let res =
        integrate_2d(Range::From(0.0), Range::From(0.0), &QuadConfig::relative(MELLIN_QUAD_TOL), |np, nq| {
            match f(np.x, nq.x) {
                Ok(v) => np.x.powf(r - 1.0) * nq.x.powf(s - 1.0) * v,
                Err(e) => {
                    fail.get_or_insert(e.to_string());
                    f64::NAN
                }
            }
        });
    if let Some(msg) = fail {
        return Err(Error::NonConvergence(msg));
    }
    if !res.converged {
        return Err(Error::NonConvergence(format!(
            "two-dimensional quadrature: {}",
            res.diagnostic.unwrap_or_default()
        )));
    }
    Ok(res)
}

fn mellin_f(
    args: HyperArgs,
    r: f64,
    s: f64,
    params: &ExtParams,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    args.validate()?;
    let HyperArgs { eta1, eta2, eta3, z } = args;
    let ExtParams { lambda, sigma, tau, .. } = *params;
    if !(z > -1.0 && z < 1.0) {
        return domain(format!("Mellin check needs -1 < z < 1 (got {z})"));
    }
    let front = ml_mellin(r, lambda)? * ml_mellin(s, lambda)? / special::beta(eta2, eta3 - eta2)?;
    let rhs = front
        * special::beta(eta2 + sigma * r, eta3 - eta2 + tau * s)?
        * converged(gauss_2f1(eta1, eta2 + sigma * r, eta3 + sigma * r + tau * s, z)?, "2F1")?;
    let printed = front
        * special::beta(eta2 + r, eta3 + s - eta2)?
        * converged(gauss_2f1(eta1, eta2 + r, eta3 + r + s, z)?, "2F1")?;
    let lhs = quadrant_mellin(r, s, |p, q| {
        converged(ext_2f1(args, &params.with_pq(p, q), EvalMethod::EulerIntegral, 1e-11)?, "Euler integral")
    })?;
    let mut rep = CheckReport::new(IdentityId::MellinF, pt, lhs.value, rhs, tol)
        .note("R = inf (exp-sinh over the full quadrant, no truncation)");
    rep.printed_residual = Some(residual(lhs.value, printed));
    Ok(rep)
}

#[allow(clippy::too_many_arguments)]
fn mellin_phi(
    eta2: f64,
    eta3: f64,
    z: f64,
    r: f64,
    s: f64,
    params: &ExtParams,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    HyperArgs::new(1.0, eta2, eta3, z)?;
    let ExtParams { lambda, sigma, tau, .. } = *params;
    let front = ml_mellin(r, lambda)? * ml_mellin(s, lambda)? / special::beta(eta2, eta3 - eta2)?;
    let rhs = front
        * special::beta(eta2 + sigma * r, eta3 - eta2 + tau * s)?
        * converged(kummer_1f1(eta2 + sigma * r, eta3 + sigma * r + tau * s, z)?, "1F1")?;
    let lhs = quadrant_mellin(r, s, |p, q| {
        converged(ext_1f1_natural(eta2, eta3, z, &params.with_pq(p, q), 1e-11)?, "confluent Euler integral")
    })?;
    Ok(CheckReport::new(IdentityId::MellinPhi, pt, lhs.value, rhs, tol)
        .note("R = inf (exp-sinh over the full quadrant, no truncation)"))
}

// Alternative integral forms of F; each returns the value before the 1/B factor.
fn f_paths(args: HyperArgs, params: &ExtParams) -> Result<Vec<(&'static str, f64)>> {
    let HyperArgs { eta1, eta2, eta3, z } = args;
    let kernel = MlKernel::new(params.lambda)?;
    let k_p = damping(&kernel, params.p, params.sigma);
    let k_q = damping(&kernel, params.q, params.tau);
    let cfg = QuadConfig::relative(1e-13);
    let norm = special::beta(eta2, eta3 - eta2)?;
    let mut out = Vec::new();
    let mut push = |name: &'static str, r: QuadResult, scale: f64| -> Result<()> {
        if !r.converged {
            return Err(Error::NonConvergence(format!("{name}: {}", r.diagnostic.unwrap_or_default())));
        }
        out.push((name, scale * r.value / norm));
        Ok(())
    };
    if z.abs() < 1.0 {
        // binomial series summed inside the integrand
        let r = tanh_sinh(0.0, 1.0, &cfg, |n| {
            let k = k_p(n.from_lo) * k_q(n.to_hi);
            if k == 0.0 {
                return 0.0;
            }
            let x = z * n.from_lo;
            let mut sum = KahanSum::new();
            let mut term = 1.0;
            for j in 0..100_000 {
                sum.add(term);
                let jf = j as f64;
                term *= (eta1 + jf) / (jf + 1.0) * x;
                if term.abs() < 1e-17 * sum.value().abs() {
                    break;
                }
            }
            k * (ln_pow(n.from_lo, eta2 - 1.0) + ln_pow(n.to_hi, eta3 - eta2 - 1.0)).exp() * sum.value()
        });
        push("series_in_integrand", r, 1.0)?;
    }
    // t = u/(1+u)
    let r = exp_sinh(0.0, &cfg, |n| {
        let u = n.x;
        let k = k_p(u / (1.0 + u)) * k_q(1.0 / (1.0 + u));
        if k == 0.0 {
            return 0.0;
        }
        let ln_w = ln_pow(u, eta2 - 1.0) + (eta1 - eta3) * u.ln_1p() - eta1 * (u * (1.0 - z)).ln_1p();
        k * ln_w.exp()
    });
    push("semi_infinite", r, 1.0)?;
    // t = sin²v
    let r = tanh_sinh(0.0, PI / 2.0, &cfg, |n| {
        let (sv, cv) = (n.from_lo.sin(), n.to_hi.sin());
        let k = k_p(sv * sv) * k_q(cv * cv);
        if k == 0.0 {
            return 0.0;
        }
        let base = (1.0 - z) + z * cv * cv;
        let ln_w = ln_pow(sv, 2.0 * eta2 - 1.0) + ln_pow(cv, 2.0 * eta3 - 2.0 * eta2 - 1.0) - eta1 * base.ln();
        k * ln_w.exp()
    });
    push("trigonometric", r, 2.0)?;
    Ok(out)
}

fn rep_equivalence(args: HyperArgs, params: &ExtParams, tol: f64, pt: Vec<(String, f64)>) -> Result<CheckReport> {
    args.validate()?;
    if !(args.z < 1.0) {
        return domain(format!("integral representations need z < 1 (got {})", args.z));
    }
    let reference = euler_value(args, params)?;
    let mut notes = Vec::new();
    let mut f_vals = f_paths(args, params)?;
    if args.z.abs() <= SERIES_Z_LIMIT {
        match ext_2f1(args, params, EvalMethod::Series, 1e-15)? {
            r if r.converged => f_vals.push(("series", r.value)),
            r => notes.push(format!("F series skipped: not converged after {} terms", r.terms_used)),
        }
    } else {
        notes.push("F series skipped: |z| above the series limit".to_string());
    }
    let phi_ref = phi_value(args.eta2, args.eta3, args.z, params)?;
    let mut phi_vals = vec![(
        "phi_reflected",
        converged(
            ext_1f1(args.eta2, args.eta3, args.z, params, EvalMethod::EulerIntegral, 1e-13)?,
            "reflected integral",
        )?,
    )];
    match ext_1f1(args.eta2, args.eta3, args.z, params, EvalMethod::Series, 1e-15)? {
        r if r.converged => phi_vals.push(("phi_series", r.value)),
        r => notes.push(format!("Phi series skipped: not converged after {} terms", r.terms_used)),
    }
    let mut worst = (0.0f64, reference, reference, "euler");
    for &(name, v) in &f_vals {
        let res = residual(v, reference);
        notes.push(format!("{name}: residual {res:e} against the Euler integral"));
        if !(res <= worst.0) {
            worst = (res, v, reference, name);
        }
    }
    for &(name, v) in &phi_vals {
        let res = residual(v, phi_ref);
        notes.push(format!("{name}: residual {res:e} against the natural confluent integral"));
        if !(res <= worst.0) {
            worst = (res, v, phi_ref, name);
        }
    }
    let mut rep = CheckReport::new(IdentityId::RepEquivalence, pt, worst.1, worst.2, tol);
    rep.diagnostics.push(format!("worst path: {}", worst.3));
    rep.diagnostics.extend(notes);
    Ok(rep)
}
