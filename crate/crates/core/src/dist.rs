//! The probability law on `(0, 1)` with density proportional to the damped
//! beta integrand: density, moments, moment generating function, CDF and
//! seeded inverse-CDF sampling.

use std::cell::RefCell;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::check::{point, CheckReport, IdentityId};
use crate::error::{domain, Error, Result};
use crate::extbeta::{ext_beta_incomplete, ext_beta_value, BetaArgs, ExtParams, Integrand};
use crate::hyper::SeriesResult;
use crate::mlf::{cheb_fit, clenshaw};
use crate::quad::{tanh_sinh, QuadConfig};
use crate::special::KahanSum;

/// Relative tolerance of every quadrature behind the distribution.
pub const DIST_TOL: f64 = 1e-13;
pub const MAX_MGF_TERMS: usize = 200;
/// Bisection stops once the bracket is narrower than this in `x`.
pub const SAMPLE_X_TOL: f64 = 1e-10;
const MAX_BISECTIONS: u32 = 64;

/// Shape pair and damping parameters with the cached normalizing constant.
pub struct DistSpec {
    args: BetaArgs,
    params: ExtParams,
    norm: f64,
    density: Integrand,
    inverse: OnceLock<std::result::Result<Arc<InverseTable>, Error>>,
}

impl fmt::Debug for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistSpec")
            .field("args", &self.args)
            .field("params", &self.params)
            .field("norm", &self.norm)
            .finish()
    }
}

impl DistSpec {
    /// Shapes may be non-positive when the matching kernel is active
    /// (`p > 0` for `η₁`, `q > 0` for `η₂`) and keeps the integral finite.
    ///
    /// `E_λ(−y)` changes sign for `1 < λ ≤ 2`, so an active kernel there
    /// does not give a density; such parameters are a domain error.
    pub fn new(eta1: f64, eta2: f64, params: ExtParams) -> Result<Self> {
        params.validate()?;
        if params.lambda > 1.0 && (params.p > 0.0 || params.q > 0.0) {
            return domain(format!(
                "lambda = {} > 1 with p or q > 0 gives a density with negative values",
                params.lambda
            ));
        }
        let args = BetaArgs::regularized(eta1, eta2, &params)?;
        let norm = ext_beta_value(args, &params, DIST_TOL)?;
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Overflow(format!("normalizing constant {norm} is not a positive finite number")));
        }
        Ok(Self { args, params, norm, density: Integrand::new(args, &params)?, inverse: OnceLock::new() })
    }

    pub fn args(&self) -> BetaArgs {
        self.args
    }

    pub fn params(&self) -> &ExtParams {
        &self.params
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn labels(&self) -> Vec<(&'static str, f64)> {
        let ExtParams { p, q, lambda, sigma, tau } = self.params;
        vec![
            ("eta1", self.args.eta1),
            ("eta2", self.args.eta2),
            ("p", p),
            ("q", q),
            ("lambda", lambda),
            ("sigma", sigma),
            ("tau", tau),
        ]
    }
}

/// Density at `t`; zero outside `(0, 1)`.
pub fn pdf(spec: &DistSpec, t: f64) -> f64 {
    if !(t > 0.0 && t < 1.0) {
        return 0.0;
    }
    spec.density.at(t, 1.0 - t) / spec.norm
}

/// `E[X^ν]`, the ratio of extended beta values at `η₁ + ν` and `η₁`.
pub fn moment(spec: &DistSpec, nu: f64) -> Result<f64> {
    if !nu.is_finite() {
        return domain(format!("moment order must be finite (got {nu})"));
    }
    if nu == 0.0 {
        return Ok(1.0);
    }
    let BetaArgs { eta1, eta2 } = spec.args;
    if !spec.params.converges(eta1 + nu, eta2) {
        return Err(Error::Divergent(format!(
            "moment of order {nu} diverges at eta1 = {eta1} with p = {}",
            spec.params.p
        )));
    }
    let b = ext_beta_value(BetaArgs { eta1: eta1 + nu, eta2 }, &spec.params, DIST_TOL)?;
    Ok(b / spec.norm)
}

/// Mean and variance, the latter as `(B₀B₂ − B₁²)/B₀²` with `Bₖ` the
/// extended beta value at `η₁ + k`.
pub fn mean_variance(spec: &DistSpec) -> Result<(f64, f64)> {
    let BetaArgs { eta1, eta2 } = spec.args;
    let b0 = spec.norm;
    let b1 = ext_beta_value(BetaArgs { eta1: eta1 + 1.0, eta2 }, &spec.params, DIST_TOL)?;
    let b2 = ext_beta_value(BetaArgs { eta1: eta1 + 2.0, eta2 }, &spec.params, DIST_TOL)?;
    Ok((b1 / b0, (b0 * b2 - b1 * b1) / (b0 * b0)))
}

/// Moment series `Σ_{n<N} E[Xⁿ] tⁿ/n!`.
///
/// Since `0 < X < 1`, the remainder is at most `|t|^N/N! · e^{|t|}`, which is
/// reported as the tail estimate.
pub fn mgf(spec: &DistSpec, t: f64, n_terms: usize) -> Result<SeriesResult> {
    if !t.is_finite() {
        return domain(format!("mgf argument must be finite (got {t})"));
    }
    if n_terms == 0 || n_terms > MAX_MGF_TERMS {
        return domain(format!("mgf needs 1..={MAX_MGF_TERMS} terms (got {n_terms})"));
    }
    if t == 0.0 {
        return Ok(SeriesResult { value: 1.0, terms_used: 1, converged: true, tail_estimate: 0.0 });
    }
    let mut sum = KahanSum::new();
    let mut power = 1.0; // tⁿ/n!
    for n in 0..n_terms {
        if n > 0 {
            power *= t / n as f64;
        }
        sum.add(power * moment(spec, n as f64)?);
    }
    let tail = (power * t / n_terms as f64).abs() * t.abs().exp();
    Ok(SeriesResult {
        value: sum.value(),
        terms_used: n_terms,
        converged: tail <= 1e-15 * sum.value().abs(),
        tail_estimate: tail,
    })
}

/// `P(X ≤ x)`. Above one half it is computed from the upper tail so the
/// complement stays accurate.
pub fn cdf(spec: &DistSpec, x: f64) -> Result<f64> {
    if x.is_nan() {
        return domain("cdf argument is NaN");
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    let v = if x <= 0.5 { lower_mass(spec, x)? } else { 1.0 - upper_mass(spec, 1.0 - x)? };
    Ok(v.clamp(0.0, 1.0))
}

// P(X ≤ x)
fn lower_mass(spec: &DistSpec, x: f64) -> Result<f64> {
    let r = ext_beta_incomplete(x, spec.args, &spec.params, DIST_TOL)?;
    converged_mass(r.value, r.converged, x, spec.norm)
}

// P(X ≥ 1 − g), integrated in the reflected variable so small gaps keep
// full relative precision.
fn upper_mass(spec: &DistSpec, g: f64) -> Result<f64> {
    let r = ext_beta_incomplete(g, spec.args.swapped(), &spec.params.swapped(), DIST_TOL)?;
    converged_mass(r.value, r.converged, 1.0 - g, spec.norm)
}

fn converged_mass(value: f64, ok: bool, x: f64, norm: f64) -> Result<f64> {
    if !ok {
        return Err(Error::NonConvergence(format!("incomplete integral at x = {x} did not converge")));
    }
    Ok(value / norm)
}

/// Direct quadrature of `f(t)·pdf(t)` over `(a, b) ⊆ (0, 1)`.
fn weighted_mass<F: Fn(f64) -> f64>(spec: &DistSpec, a: f64, b: f64, f: F) -> Result<f64> {
    let r = tanh_sinh(a, b, &QuadConfig::new(1e-15, DIST_TOL), |n| {
        let t_c = 1.0 - b + n.to_hi;
        f(n.x) * spec.density.at(n.x, t_c) / spec.norm
    });
    if !r.converged {
        return Err(Error::NonConvergence(format!(
            "density quadrature on ({a}, {b}): {}",
            r.diagnostic.unwrap_or_default()
        )));
    }
    Ok(r.value)
}

// Logistic coordinate: x = 1/(1 + e^{−s}), 1 − x = 1/(1 + e^{s}).
fn logistic(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

// Smallest logistic coordinate reached when stepping outwards from 0 until
// `mass` drops below the cutoff.
const TAIL_CUTOFF: f64 = 1e-17;
const S_LIMIT: f64 = 700.0;

fn tail_extent<F: Fn(f64) -> Result<f64>>(mass: F) -> Result<f64> {
    let mut s = 2.0;
    while s < S_LIMIT {
        if mass(s)? < TAIL_CUTOFF {
            return Ok(s);
        }
        s = (2.0 * s).min(S_LIMIT);
    }
    Ok(S_LIMIT)
}

#[derive(Debug)]
struct Piece {
    a: f64,
    b: f64,
    coef: Vec<f64>,
}

// Piecewise Chebyshev interpolant of a tail mass over the logistic
// coordinate, refined until two probe points per piece match.
#[derive(Debug)]
struct TailTable {
    pieces: Vec<Piece>,
}

impl TailTable {
    const INITIAL_WIDTH: f64 = 4.0;
    const MIN_WIDTH: f64 = 1.0 / 64.0;

    fn build<F: Fn(f64) -> Result<f64>>(lo: f64, hi: f64, mass: F) -> Result<Self> {
        let n0 = ((hi - lo) / Self::INITIAL_WIDTH).ceil().max(1.0) as usize;
        let w0 = (hi - lo) / n0 as f64;
        let mut todo: Vec<(f64, f64)> = (0..n0).rev().map(|i| (lo + i as f64 * w0, lo + (i + 1) as f64 * w0)).collect();
        let mut pieces = Vec::new();
        while let Some((a, b)) = todo.pop() {
            let failure = RefCell::new(None);
            let coef = cheb_fit(a, b, &|s| match mass(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            });
            let mut ok = true;
            for frac in [0.31, 0.77] {
                let s = a + frac * (b - a);
                let want = mass(s)?;
                let got = clenshaw(&coef, 2.0 * frac - 1.0);
                ok &= (got - want).abs() <= 1e-12 * want.abs() + 1e-16;
            }
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            if ok || b - a <= Self::MIN_WIDTH {
                pieces.push(Piece { a, b, coef });
            } else {
                let m = 0.5 * (a + b);
                todo.push((m, b));
                todo.push((a, m));
            }
        }
        Ok(Self { pieces })
    }

    fn lo(&self) -> f64 {
        self.pieces[0].a
    }

    fn hi(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].b
    }

    fn eval(&self, s: f64) -> f64 {
        let i = self.pieces.partition_point(|p| p.b < s).min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        let x = (2.0 * (s - p.a) / (p.b - p.a) - 1.0).clamp(-1.0, 1.0);
        clenshaw(&p.coef, x)
    }
}

// Lower table: F(s) for s ≤ 0. Upper table: 1 − F at the mirrored
// coordinate, i.e. P(X ≥ logistic(s)) tabulated against −s ≤ 0.
#[derive(Debug)]
struct InverseTable {
    lower: TailTable,
    upper: TailTable,
    middle: f64,
}

impl InverseTable {
    fn build(spec: &DistSpec) -> Result<Self> {
        let lower_at = |s: f64| lower_mass(spec, logistic(s));
        let upper_at = |s: f64| upper_mass(spec, logistic(s));
        let s_lo = -tail_extent(|s| lower_at(-s))?;
        let s_hi = -tail_extent(|s| upper_at(-s))?;
        Ok(Self {
            lower: TailTable::build(s_lo, 0.0, lower_at)?,
            upper: TailTable::build(s_hi, 0.0, upper_at)?,
            middle: lower_at(0.0)?,
        })
    }

    // Logistic coordinate of the u-quantile.
    fn quantile(&self, u: f64) -> Result<f64> {
        // lower: solve F(s) = u on s ≤ 0; upper: solve G(r) = 1 − u on r ≤ 0, s = −r
        let (table, target, flip) =
            if u <= self.middle { (&self.lower, u, false) } else { (&self.upper, 1.0 - u, true) };
        let (mut a, mut b) = (table.lo(), table.hi());
        for _ in 0..MAX_BISECTIONS {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if table.eval(m) < target {
                a = m;
            } else {
                b = m;
            }
        }
        let width = logistic(b) - logistic(a);
        if !(width <= SAMPLE_X_TOL) {
            return Err(Error::NonConvergence(format!("bisection for u = {u} left a bracket of width {width:e} in x")));
        }
        let s = 0.5 * (a + b);
        Ok(if flip { -s } else { s })
    }
}

fn inverse_table(spec: &DistSpec) -> Result<Arc<InverseTable>> {
    spec.inverse.get_or_init(|| InverseTable::build(spec).map(Arc::new)).clone()
}

/// The `u`-quantile for `u` in `[0, 1]`, by bisection on the tabulated CDF.
pub fn quantile(spec: &DistSpec, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return domain(format!("quantile level must lie in [0, 1] (got {u})"));
    }
    let s = inverse_table(spec)?.quantile(u)?;
    Ok(logistic(s).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
}

/// `n` draws by inverse-CDF bisection on uniform deviates from a ChaCha8
/// generator seeded with `seed`.
///
/// The CDF is tabulated once per spec as a piecewise Chebyshev interpolant
/// in the logistic coordinate `s = ln(x/(1 − x))`, separately for each half
/// so both tails keep relative precision. Draws are clamped into the open
/// interval when they round to an endpoint.
pub fn sample(spec: &DistSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let table = inverse_table(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let u: f64 = rng.gen();
            let s = table.quantile(u).map_err(|e| Error::NonConvergence(format!("sample {i}: {e}")))?;
            let x = logistic(s);
            Ok(x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
        })
        .collect()
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and
/// `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> Result<f64>>(samples: &[f64], mut cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return domain("KS statistic needs at least one sample");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// One-sample KS critical value at the 1% level, `1.63/√n`.
pub fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Distribution invariants checked by the verification engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistCheck {
    /// Direct quadrature of the density over `(0, 1)` against 1.
    Normalization,
    /// `cdf(x)` against direct quadrature of the density over `(0, x)`.
    CdfConsistency { x: f64 },
    /// The closed variance form against `E[X²] − E[X]²`.
    VarianceIdentity,
    /// Moment series against direct quadrature of `e^{tx}` under the density.
    MgfSeries { t: f64, terms: usize },
    /// KS distance of seeded samples against the 1% critical value.
    KsSampling { n: usize, seed: u64 },
}

impl DistCheck {
    pub fn id(&self) -> IdentityId {
        match self {
            DistCheck::Normalization => IdentityId::Normalization,
            DistCheck::CdfConsistency { .. } => IdentityId::CdfConsistency,
            DistCheck::VarianceIdentity => IdentityId::VarianceIdentity,
            DistCheck::MgfSeries { .. } => IdentityId::MgfSeries,
            DistCheck::KsSampling { .. } => IdentityId::KsSampling,
        }
    }
}

/// Evaluate one invariant. For `MgfSeries` the tolerance is widened by the
/// series tail bound; for `KsSampling` the tolerance is the critical value
/// and `tol` is ignored.
pub fn verify_dist_invariant(check: DistCheck, spec: &DistSpec, tol: f64) -> CheckReport {
    let mut labels = spec.labels();
    match check {
        DistCheck::CdfConsistency { x } => labels.push(("x", x)),
        DistCheck::MgfSeries { t, terms } => {
            labels.push(("t", t));
            labels.push(("terms", terms as f64));
        }
        DistCheck::KsSampling { n, seed } => {
            labels.push(("n", n as f64));
            labels.push(("seed", seed as f64));
        }
        DistCheck::Normalization | DistCheck::VarianceIdentity => {}
    }
    let pt = point(&labels);
    match dist_sides(check, spec, tol) {
        Ok(Sides { lhs, rhs, tolerance, tail }) => {
            let mut rep = CheckReport::new(check.id(), pt, lhs, rhs, tolerance);
            rep.tail = tail;
            rep
        }
        Err(e) => CheckReport::failed(check.id(), pt, tol, e.to_string()),
    }
}

struct Sides {
    lhs: f64,
    rhs: f64,
    tolerance: f64,
    tail: Option<f64>,
}

fn dist_sides(check: DistCheck, spec: &DistSpec, tol: f64) -> Result<Sides> {
    let plain = |lhs, rhs| Sides { lhs, rhs, tolerance: tol, tail: None };
    match check {
        DistCheck::Normalization => {
            let m = weighted_mass(spec, 0.0, 0.5, |_| 1.0)? + weighted_mass(spec, 0.5, 1.0, |_| 1.0)?;
            Ok(plain(m, 1.0))
        }
        DistCheck::CdfConsistency { x } => {
            if !(x > 0.0 && x < 1.0) {
                return domain(format!("cdf check point must lie in (0, 1) (got {x})"));
            }
            Ok(plain(cdf(spec, x)?, weighted_mass(spec, 0.0, x, |_| 1.0)?))
        }
        DistCheck::VarianceIdentity => {
            let (mean, var) = mean_variance(spec)?;
            let m2 = moment(spec, 2.0)?;
            Ok(plain(var, m2 - mean * mean))
        }
        DistCheck::MgfSeries { t, terms } => {
            let series = mgf(spec, t, terms)?;
            let direct =
                weighted_mass(spec, 0.0, 0.5, |u| (t * u).exp())? + weighted_mass(spec, 0.5, 1.0, |u| (t * u).exp())?;
            Ok(Sides {
                lhs: series.value,
                rhs: direct,
                tolerance: tol + series.tail_estimate,
                tail: Some(series.tail_estimate),
            })
        }
        DistCheck::KsSampling { n, seed } => {
            let xs = sample(spec, n, seed)?;
            let d = ks_statistic(&xs, |x| cdf(spec, x))?;
            Ok(Sides { lhs: d, rhs: 0.0, tolerance: ks_critical(n), tail: None })
        }
    }
}
