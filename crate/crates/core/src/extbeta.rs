//! Mittag-Leffler extended beta function
//!
//! `B(η₁, η₂; p, q, λ, σ, τ) = ∫₀¹ t^{η₁−1} (1−t)^{η₂−1} E_λ(−p/t^σ) E_λ(−q/(1−t)^τ) dt`
//!
//! together with its incomplete variant, several equivalent integral
//! representations and numerical checks of the identities it satisfies.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::check::{point, residual, CheckReport, IdentityId};
use crate::error::{domain, Error, Result};
use crate::mlf::MlKernel;
use crate::quad::{exp_sinh, integrate_2d, tanh_sinh, QuadConfig, QuadResult, Range};
use crate::special::{beta, binomial, inc_beta_reg, pochhammer, recip_gamma, KahanSum};

/// Damping parameters `(p, q, λ, σ, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtParams {
    pub p: f64,
    pub q: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub tau: f64,
}

impl ExtParams {
    pub fn new(p: f64, q: f64, lambda: f64, sigma: f64, tau: f64) -> Result<Self> {
        let params = Self { p, q, lambda, sigma, tau };
        params.validate()?;
        Ok(params)
    }

    /// `p = q = 0`: the classical beta function.
    pub fn classical() -> Self {
        Self { p: 0.0, q: 0.0, lambda: 1.0, sigma: 1.0, tau: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 0.0 && self.p.is_finite() && self.q >= 0.0 && self.q.is_finite()) {
            return domain(format!("p and q must be finite and >= 0 (got {}, {})", self.p, self.q));
        }
        if !(self.lambda > 0.0 && self.lambda <= 2.0) {
            return domain(format!("lambda must lie in (0, 2] (got {})", self.lambda));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite() && self.tau > 0.0 && self.tau.is_finite()) {
            return domain(format!("sigma and tau must be finite and > 0 (got {}, {})", self.sigma, self.tau));
        }
        Ok(())
    }

    /// The parameters seen after `t → 1 − t`.
    pub fn swapped(&self) -> Self {
        Self { p: self.q, q: self.p, lambda: self.lambda, sigma: self.tau, tau: self.sigma }
    }

    pub fn with_pq(&self, p: f64, q: f64) -> Self {
        Self { p, q, ..*self }
    }

    // Power of the distance to the endpoint by which the damping kernel
    // decays as that distance goes to zero.
    fn decay(&self, coef: f64, power: f64) -> f64 {
        if coef == 0.0 {
            0.0
        } else if self.lambda == 1.0 {
            f64::INFINITY
        } else if self.lambda == 2.0 {
            0.0
        } else {
            power
        }
    }

    /// Whether the defining integral converges at `(η₁, η₂)`.
    ///
    /// Non-positive shapes are admitted when the kernel at that endpoint
    /// decays fast enough: always for `λ = 1`, and when `η + σ > 0` (resp.
    /// `η + τ > 0`) for other orders below 2.
    pub fn converges(&self, eta1: f64, eta2: f64) -> bool {
        eta1.is_finite()
            && eta2.is_finite()
            && eta1 + self.decay(self.p, self.sigma) > 0.0
            && eta2 + self.decay(self.q, self.tau) > 0.0
    }
}

/// Shape arguments `(η₁, η₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaArgs {
    pub eta1: f64,
    pub eta2: f64,
}

impl BetaArgs {
    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        if !(eta1 > 0.0 && eta2 > 0.0 && eta1.is_finite() && eta2.is_finite()) {
            return domain(format!("eta1 and eta2 must be finite and > 0 (got {eta1}, {eta2})"));
        }
        Ok(Self { eta1, eta2 })
    }

    /// Arguments that may be non-positive where the damping kernels
    /// keep the integral finite.
    pub fn regularized(eta1: f64, eta2: f64, params: &ExtParams) -> Result<Self> {
        params.validate()?;
        if !params.converges(eta1, eta2) {
            return Err(Error::Divergent(format!(
                "integral diverges at eta = ({eta1}, {eta2}) for p = {}, q = {}, lambda = {}",
                params.p, params.q, params.lambda
            )));
        }
        Ok(Self { eta1, eta2 })
    }

    pub fn swapped(&self) -> Self {
        Self { eta1: self.eta2, eta2: self.eta1 }
    }

    fn shifted(&self, d1: f64, d2: f64) -> Self {
        Self { eta1: self.eta1 + d1, eta2: self.eta2 + d2 }
    }
}

/// Integral representation used to evaluate the function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation {
    /// The defining integral over `(0, 1)`.
    Direct,
    /// `t = cos²θ` over `(0, π/2)`.
    Trigonometric,
    /// `t = u/(1+u)` over `(0, ∞)`.
    SemiInfinite,
    /// `t = (1+x)/2` over `(−1, 1)`.
    SymmetricInterval,
    /// `t = (x−a)/(c−a)` over `(a, c)`.
    GeneralInterval { a: f64, c: f64 },
}

impl Representation {
    pub const STANDARD: [Representation; 5] = [
        Representation::Direct,
        Representation::Trigonometric,
        Representation::SemiInfinite,
        Representation::SymmetricInterval,
        Representation::GeneralInterval { a: -2.0, c: 3.0 },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Representation::Direct => "direct",
            Representation::Trigonometric => "trigonometric",
            Representation::SemiInfinite => "semi_infinite",
            Representation::SymmetricInterval => "symmetric_interval",
            Representation::GeneralInterval { .. } => "general_interval",
        }
    }
}

/// `Γ(η₁)Γ(η₂)/Γ(η₁+η₂)` through log-gamma.
pub fn classical_beta(args: BetaArgs) -> Result<f64> {
    beta(args.eta1, args.eta2)
}

// E_λ(−coef / d^power) as a function of the distance d to an endpoint.
#[derive(Debug, Clone)]
struct Damping {
    kernel: Option<MlKernel>,
    coef: f64,
    power: f64,
}

impl Damping {
    fn new(lambda: f64, coef: f64, power: f64) -> Result<Self> {
        let kernel = if coef == 0.0 { None } else { Some(MlKernel::new(lambda)?) };
        Ok(Self { kernel, coef, power })
    }

    fn at(&self, d: f64) -> f64 {
        match &self.kernel {
            None => 1.0,
            Some(k) => k.eval_neg(self.coef / d.powf(self.power)),
        }
    }
}

// d^expo · k without forming inf · 0.
fn weighted(d: f64, expo: f64, k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let w = d.powf(expo);
    if w.is_finite() {
        w * k
    } else {
        k.signum() * (expo * d.ln() + k.abs().ln()).exp()
    }
}

/// The damped beta integrand, evaluated from the distances `t` and `1 − t`.
#[derive(Debug, Clone)]
pub(crate) struct Integrand {
    lo: Damping,
    hi: Damping,
    a1: f64,
    a2: f64,
}

impl Integrand {
    pub(crate) fn new(args: BetaArgs, params: &ExtParams) -> Result<Self> {
        Ok(Self {
            lo: Damping::new(params.lambda, params.p, params.sigma)?,
            hi: Damping::new(params.lambda, params.q, params.tau)?,
            a1: args.eta1 - 1.0,
            a2: args.eta2 - 1.0,
        })
    }

    pub(crate) fn at(&self, t: f64, t_c: f64) -> f64 {
        weighted(t, self.a1, self.lo.at(t)) * weighted(t_c, self.a2, self.hi.at(t_c))
    }
}

fn check_inputs(args: BetaArgs, params: &ExtParams, tol: f64) -> Result<()> {
    params.validate()?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive (got {tol})"));
    }
    if !params.converges(args.eta1, args.eta2) {
        return Err(Error::Divergent(format!(
            "integral diverges at eta = ({}, {}) for p = {}, q = {}, lambda = {}",
            args.eta1, args.eta2, params.p, params.q, params.lambda
        )));
    }
    Ok(())
}

/// The extended beta function evaluated through the chosen representation.
///
/// `tol` is a relative tolerance. Quadrature failure is reported through
/// `converged` and `diagnostic` rather than as an error.
pub fn ext_beta(args: BetaArgs, params: &ExtParams, repr: Representation, tol: f64) -> Result<QuadResult> {
    check_inputs(args, params, tol)?;
    let ExtParams { p, q, lambda, sigma, tau } = *params;
    let (a1, a2) = (args.eta1 - 1.0, args.eta2 - 1.0);
    let cfg = QuadConfig::relative(tol);
    let res = match repr {
        Representation::Direct => {
            let lo = Damping::new(lambda, p, sigma)?;
            let hi = Damping::new(lambda, q, tau)?;
            tanh_sinh(0.0, 1.0, &cfg, |n| {
                weighted(n.from_lo, a1, lo.at(n.from_lo)) * weighted(n.to_hi, a2, hi.at(n.to_hi))
            })
        }
        Representation::Trigonometric => {
            let lo = Damping::new(lambda, p, 2.0 * sigma)?;
            let hi = Damping::new(lambda, q, 2.0 * tau)?;
            let (e1, e2) = (2.0 * args.eta1 - 1.0, 2.0 * args.eta2 - 1.0);
            let mut r = tanh_sinh(0.0, PI / 2.0, &cfg, |n| {
                let c = n.to_hi.sin();
                let s = n.from_lo.sin();
                weighted(c, e1, lo.at(c)) * weighted(s, e2, hi.at(s))
            });
            r.value *= 2.0;
            r.abs_error_estimate *= 2.0;
            r
        }
        Representation::SemiInfinite => {
            let lo = Damping::new(lambda, p, sigma)?;
            let hi = Damping::new(lambda, q, tau)?;
            let total = args.eta1 + args.eta2;
            exp_sinh(0.0, &cfg, |n| {
                let u = n.x;
                let t = u / (1.0 + u);
                let t_c = 1.0 / (1.0 + u);
                let k = lo.at(t) * hi.at(t_c);
                if k == 0.0 {
                    return 0.0;
                }
                let log_w = a1 * u.ln() - total * u.ln_1p();
                k * log_w.exp()
            })
        }
        Representation::SymmetricInterval => scaled_interval(args, params, -1.0, 1.0, &cfg)?,
        Representation::GeneralInterval { a, c } => {
            if !(a.is_finite() && c.is_finite() && c > a) {
                return domain(format!("general interval needs finite a < c (got {a}, {c})"));
            }
            scaled_interval(args, params, a, c, &cfg)?
        }
    };
    Ok(res)
}

fn scaled_interval(args: BetaArgs, params: &ExtParams, a: f64, c: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let ExtParams { p, q, lambda, sigma, tau } = *params;
    let width = c - a;
    let lo = Damping::new(lambda, p * width.powf(sigma), sigma)?;
    let hi = Damping::new(lambda, q * width.powf(tau), tau)?;
    let (a1, a2) = (args.eta1 - 1.0, args.eta2 - 1.0);
    let mut r =
        tanh_sinh(a, c, cfg, |n| weighted(n.from_lo, a1, lo.at(n.from_lo)) * weighted(n.to_hi, a2, hi.at(n.to_hi)));
    let scale = width.powf(1.0 - args.eta1 - args.eta2);
    r.value *= scale;
    r.abs_error_estimate *= scale;
    Ok(r)
}

/// `∫₀ˣ t^{η₁−1}(1−t)^{η₂−1} E_λ(−p/t^σ) E_λ(−q/(1−t)^τ) dt`.
pub fn ext_beta_incomplete(x: f64, args: BetaArgs, params: &ExtParams, tol: f64) -> Result<QuadResult> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("x must lie in [0, 1] (got {x})"));
    }
    check_inputs(args, params, tol)?;
    if x == 1.0 {
        return ext_beta(args, params, Representation::Direct, tol);
    }
    let lo = Damping::new(params.lambda, params.p, params.sigma)?;
    let hi = Damping::new(params.lambda, params.q, params.tau)?;
    let (a1, a2) = (args.eta1 - 1.0, args.eta2 - 1.0);
    let gap = 1.0 - x;
    let cfg = QuadConfig::relative(tol);
    if args.eta1 <= 0.0 {
        // the kernel vanishes at 0 faster than any power, no rescaling needed
        return Ok(tanh_sinh(0.0, x, &cfg, |n| {
            let t_c = gap + n.to_hi;
            weighted(n.from_lo, a1, lo.at(n.from_lo)) * weighted(t_c, a2, hi.at(t_c))
        }));
    }
    // t = x·v with x^{η₁} pulled out keeps nodes and values representable
    // for tiny x
    let mut r = tanh_sinh(0.0, 1.0, &cfg, |n| {
        let t = x * n.from_lo;
        let t_c = gap + x * n.to_hi;
        weighted(n.from_lo, a1, lo.at(t)) * weighted(t_c, a2, hi.at(t_c))
    });
    let scale = x.powf(args.eta1);
    r.value *= scale;
    r.abs_error_estimate *= scale;
    Ok(r)
}

/// Upper tail `∫ₓ¹ …`, accurate when the integral over `(x, 1)` is small.
pub fn ext_beta_upper(x: f64, args: BetaArgs, params: &ExtParams, tol: f64) -> Result<QuadResult> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("x must lie in [0, 1] (got {x})"));
    }
    let flipped = ext_beta_incomplete(1.0 - x, args.swapped(), &params.swapped(), tol)?;
    Ok(flipped)
}

/// Converged direct-path value, memoized per argument bits.
pub(crate) fn ext_beta_value(args: BetaArgs, params: &ExtParams, tol: f64) -> Result<f64> {
    type Key = [u64; 8];
    static CACHE: OnceLock<Mutex<HashMap<Key, f64>>> = OnceLock::new();
    let key: Key = [
        args.eta1.to_bits(),
        args.eta2.to_bits(),
        params.p.to_bits(),
        params.q.to_bits(),
        params.lambda.to_bits(),
        params.sigma.to_bits(),
        params.tau.to_bits(),
        tol.to_bits(),
    ];
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(v);
    }
    let r = ext_beta(args, params, Representation::Direct, tol)?;
    if !r.converged {
        return Err(Error::NonConvergence(format!(
            "extended beta at ({}, {}): {}",
            args.eta1,
            args.eta2,
            r.diagnostic.unwrap_or_default()
        )));
    }
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    if map.len() > 1 << 20 {
        map.clear();
    }
    map.insert(key, r.value);
    Ok(r.value)
}

fn mellin_factor(x: f64, lambda: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("Mellin variable must lie in (0, 1) (got {x})"));
    }
    let rg = recip_gamma(1.0 - x * lambda);
    if rg == 0.0 {
        return domain(format!("1 - {x}*{lambda} is a pole of the gamma function"));
    }
    Ok(PI * rg / (PI * x).sin())
}

/// Closed form of `∫∫ p^{r−1} q^{s−1} B(η₁, η₂; p, q, λ, σ, τ) dp dq`:
/// `π² / (sin πr sin πs Γ(1−rλ) Γ(1−sλ)) · B(η₁+σr, η₂+τs)`.
pub fn mellin_rhs(r: f64, s: f64, args: BetaArgs, params: &ExtParams) -> Result<f64> {
    params.validate()?;
    let fr = mellin_factor(r, params.lambda)?;
    let fs = mellin_factor(s, params.lambda)?;
    let b = beta(args.eta1 + params.sigma * r, args.eta2 + params.tau * s)?;
    Ok(fr * fs * b)
}

/// Identity to check, with its auxiliary parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaCheck {
    /// `B(η₁+1, η₂) + B(η₁, η₂+1) = B(η₁, η₂)`.
    FunctionalRelation,
    /// `B(η₁, 1−η₂) = Σₙ (η₂)ₙ/n! B(η₁+n, 1)`, summed to `terms`.
    SummationFinite { terms: usize },
    /// `B(η₁, η₂) = Σₙ B(η₁+n, η₂+1)`, summed to `terms`.
    SummationInfinite { terms: usize },
    /// `B(η, −η−n) = Σₖ C(n,k) B(η+k, −η−k)` with `η = η₁`.
    RecurrenceBinomial { n: u32 },
    /// Mellin transform in `(p, q)` by swapping the order of integration.
    Mellin { r: f64, s: f64 },
    /// Mellin transform in `(p, q)` as an iterated integral of the function.
    DoubleIntegral { r: f64, s: f64 },
}

impl BetaCheck {
    pub fn id(&self) -> IdentityId {
        match self {
            BetaCheck::FunctionalRelation => IdentityId::FunctionalRelation,
            BetaCheck::SummationFinite { .. } => IdentityId::SummationFinite,
            BetaCheck::SummationInfinite { .. } => IdentityId::SummationInfinite,
            BetaCheck::RecurrenceBinomial { .. } => IdentityId::RecurrenceBinomial,
            BetaCheck::Mellin { .. } => IdentityId::Mellin,
            BetaCheck::DoubleIntegral { .. } => IdentityId::DoubleIntegral,
        }
    }
}

pub const DEFAULT_SERIES_TERMS: usize = 64;

// Relative tolerance for each side of a single-integral identity.
const SIDE_TOL: f64 = 1e-13;

/// Evaluates both sides of an identity by separate routes.
///
/// Evaluation failures produce a failing report with a diagnostic.
pub fn verify_beta_identity(check: BetaCheck, args: BetaArgs, params: &ExtParams, tol: f64) -> CheckReport {
    let id = check.id();
    let mut pt = vec![
        ("eta1", args.eta1),
        ("eta2", args.eta2),
        ("p", params.p),
        ("q", params.q),
        ("lambda", params.lambda),
        ("sigma", params.sigma),
        ("tau", params.tau),
    ];
    match check {
        BetaCheck::SummationFinite { terms } | BetaCheck::SummationInfinite { terms } => pt.push(("N", terms as f64)),
        BetaCheck::RecurrenceBinomial { n } => pt.push(("n", n as f64)),
        BetaCheck::Mellin { r, s } | BetaCheck::DoubleIntegral { r, s } => {
            pt.push(("r", r));
            pt.push(("s", s));
        }
        BetaCheck::FunctionalRelation => {}
    }
    let pt = point(&pt);
    let outcome = match check {
        BetaCheck::FunctionalRelation => functional_relation(args, params, tol, pt.clone()),
        BetaCheck::SummationFinite { terms } => summation_finite(args, params, terms, tol, pt.clone()),
        BetaCheck::SummationInfinite { terms } => summation_infinite(args, params, terms, tol, pt.clone()),
        BetaCheck::RecurrenceBinomial { n } => recurrence_binomial(args.eta1, n, params, tol, pt.clone()),
        BetaCheck::Mellin { r, s } => mellin_swapped(r, s, args, params, tol, pt.clone()),
        BetaCheck::DoubleIntegral { r, s } => double_integral(r, s, args, params, tol, pt.clone()),
    };
    outcome.unwrap_or_else(|e| CheckReport::failed(id, pt, tol, e.to_string()))
}

fn side(args: BetaArgs, params: &ExtParams) -> Result<f64> {
    ext_beta_value(args, params, SIDE_TOL)
}

fn functional_relation(args: BetaArgs, params: &ExtParams, tol: f64, pt: Vec<(String, f64)>) -> Result<CheckReport> {
    let lhs = side(args.shifted(1.0, 0.0), params)? + side(args.shifted(0.0, 1.0), params)?;
    let rhs = side(args, params)?;
    Ok(CheckReport::new(IdentityId::FunctionalRelation, pt, lhs, rhs, tol))
}

fn summation_finite(
    args: BetaArgs,
    params: &ExtParams,
    terms: usize,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    let (e1, e2) = (args.eta1, args.eta2);
    if !(e2 > 0.0) {
        return domain(format!("summation needs eta2 > 0 (got {e2})"));
    }
    if terms == 0 {
        return domain("summation needs at least one term");
    }
    let lhs_args = BetaArgs::regularized(e1, 1.0 - e2, params)?;
    let lhs = side(lhs_args, params)?;
    let mut partial = KahanSum::new();
    for n in 0..terms {
        let coef = pochhammer(e2, n as u32) / pochhammer(1.0, n as u32);
        partial.add(coef * side(BetaArgs { eta1: e1 + n as f64, eta2: 1.0 }, params)?);
    }
    // Σ_{n≥N} (η₂)ₙ tⁿ/n! = (1−t)^{−η₂} I_t(N, η₂)
    let lo = Damping::new(params.lambda, params.p, params.sigma)?;
    let hi = Damping::new(params.lambda, params.q, params.tau)?;
    let mut failure = None;
    let tail = tanh_sinh(0.0, 1.0, &QuadConfig::relative(SIDE_TOL), |n| {
        let t = n.from_lo;
        let reg = match inc_beta_reg(t, terms as f64, e2) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e.to_string());
                f64::NAN
            }
        };
        weighted(t, e1 - 1.0, lo.at(t)) * weighted(n.to_hi, -e2, hi.at(n.to_hi)) * reg
    });
    if let Some(msg) = failure {
        return Err(Error::NonConvergence(msg));
    }
    if !tail.converged {
        return Err(Error::NonConvergence(format!("series remainder: {}", tail.diagnostic.unwrap_or_default())));
    }
    let mut rep = CheckReport::new(IdentityId::SummationFinite, pt, lhs, partial.value() + tail.value, tol);
    rep.tail = Some(tail.value);
    rep.partial_residual = Some(residual(lhs, partial.value()));
    Ok(rep)
}

fn summation_infinite(
    args: BetaArgs,
    params: &ExtParams,
    terms: usize,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    if terms == 0 {
        return domain("summation needs at least one term");
    }
    let lhs = side(args, params)?;
    let mut partial = KahanSum::new();
    for n in 0..terms {
        partial.add(side(args.shifted(n as f64, 1.0), params)?);
    }
    // the neglected terms telescope to B(η₁+N, η₂)
    let tail = side(args.shifted(terms as f64, 0.0), params)?;
    let mut rep = CheckReport::new(IdentityId::SummationInfinite, pt, lhs, partial.value() + tail, tol);
    rep.tail = Some(tail);
    rep.partial_residual = Some(residual(lhs, partial.value()));
    Ok(rep)
}

fn recurrence_binomial(eta: f64, n: u32, params: &ExtParams, tol: f64, pt: Vec<(String, f64)>) -> Result<CheckReport> {
    let nf = n as f64;
    let lhs = side(BetaArgs::regularized(eta, -eta - nf, params)?, params)?;
    let mut sum = KahanSum::new();
    for k in 0..=n {
        let kf = k as f64;
        let b = side(BetaArgs::regularized(eta + kf, -eta - kf, params)?, params)?;
        sum.add(binomial(nf, k) * b);
    }
    Ok(CheckReport::new(IdentityId::RecurrenceBinomial, pt, lhs, sum.value(), tol))
}

// Relative tolerance of the two-dimensional Mellin quadratures.
const MELLIN_QUAD_TOL: f64 = 1e-8;

fn mellin_checked_rhs(r: f64, s: f64, args: BetaArgs, params: &ExtParams) -> Result<(f64, f64)> {
    let rhs = mellin_rhs(r, s, args, params)?;
    let printed =
        mellin_factor(r, params.lambda)? * mellin_factor(s, params.lambda)? * beta(args.eta1 + r, args.eta2 + s)?;
    Ok((rhs, printed))
}

fn mellin_report(
    id: IdentityId,
    pt: Vec<(String, f64)>,
    lhs: &QuadResult,
    rhs: (f64, f64),
    tol: f64,
) -> Result<CheckReport> {
    if !lhs.converged {
        return Err(Error::NonConvergence(format!(
            "two-dimensional quadrature: {}",
            lhs.diagnostic.clone().unwrap_or_default()
        )));
    }
    let mut rep = CheckReport::new(id, pt, lhs.value, rhs.0, tol)
        .note("R = inf (exp-sinh over the full quadrant, no truncation)")
        .note(format!("quadrature error estimate {:e}", lhs.abs_error_estimate));
    rep.printed_residual = Some(residual(lhs.value, rhs.1));
    Ok(rep)
}

// ∫₀¹ t^{η₁−1}(1−t)^{η₂−1} [∫₀^∞ p^{r−1}E_λ(−p/t^σ)dp] [∫₀^∞ q^{s−1}E_λ(−q/(1−t)^τ)dq] dt
//
// With p = t^σ·u the inner integrals become t^{σr}·M(r), M(r) = ∫₀^∞ u^{r−1}E_λ(−u)du,
// so each is computed once by quadrature and the outer integral absorbs the powers.
fn mellin_swapped(
    r: f64,
    s: f64,
    args: BetaArgs,
    params: &ExtParams,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    check_inputs(args, params, tol)?;
    let rhs = mellin_checked_rhs(r, s, args, params)?;
    let kernel = MlKernel::new(params.lambda)?;
    let inner_cfg = QuadConfig::relative(MELLIN_QUAD_TOL * 0.1);
    let inner = |expo: f64| -> Result<f64> {
        let res = exp_sinh(0.0, &inner_cfg, |n| weighted(n.x, expo - 1.0, kernel.eval_neg(n.x)));
        if !res.converged {
            return Err(Error::NonConvergence(format!(
                "inner Mellin integral of order {expo}: {}",
                res.diagnostic.unwrap_or_default()
            )));
        }
        Ok(res.value)
    };
    let (m_r, m_s) = (inner(r)?, inner(s)?);
    let (e1, e2) = (args.eta1 - 1.0 + params.sigma * r, args.eta2 - 1.0 + params.tau * s);
    let lhs = tanh_sinh(0.0, 1.0, &QuadConfig::relative(MELLIN_QUAD_TOL), |n| {
        weighted(n.from_lo, e1, m_r) * weighted(n.to_hi, e2, m_s)
    });
    mellin_report(IdentityId::Mellin, pt, &lhs, rhs, tol)
}

// ∫₀^∞∫₀^∞ p^{r−1} q^{s−1} B(η₁, η₂; p, q, λ, σ, τ) dq dp
fn double_integral(
    r: f64,
    s: f64,
    args: BetaArgs,
    params: &ExtParams,
    tol: f64,
    pt: Vec<(String, f64)>,
) -> Result<CheckReport> {
    check_inputs(args, params, tol)?;
    let rhs = mellin_checked_rhs(r, s, args, params)?;
    let cfg = QuadConfig::relative(MELLIN_QUAD_TOL);
    let mut fail = None;
    let lhs = integrate_2d(Range::From(0.0), Range::From(0.0), &cfg, |np, nq| {
        let b = match ext_beta(args, &params.with_pq(np.x, nq.x), Representation::Direct, 1e-11) {
            Ok(res) if res.converged => res.value,
            Ok(res) => {
                fail.get_or_insert(res.diagnostic.unwrap_or_default());
                f64::NAN
            }
            Err(e) => {
                fail.get_or_insert(e.to_string());
                f64::NAN
            }
        };
        weighted(np.x, r - 1.0, 1.0) * weighted(nq.x, s - 1.0, b)
    });
    if let Some(msg) = fail {
        return Err(Error::NonConvergence(format!("extended beta inside the double integral: {msg}")));
    }
    mellin_report(IdentityId::DoubleIntegral, pt, &lhs, rhs, tol)
}
