//! Double-exponential quadrature on finite and half-infinite intervals.
//!
//! Integrands receive a [`Node`] carrying both the abscissa and its distance
//! to each endpoint, so factors such as `(1 - t)^b` stay accurate when `t`
//! rounds to an endpoint.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::special::KahanSum;

const MIN_LEVEL: u32 = 3;
const MAX_LEVEL: u32 = 12;
const PRUNE: f64 = 1e-18;

/// Evaluation budget used when none is given explicitly.
///
/// Defaults to one million; the `MLBETA_MAX_EVALS` environment variable
/// overrides it (read once per process).
pub fn default_max_evals() -> usize {
    static BUDGET: OnceLock<usize> = OnceLock::new();
    *BUDGET.get_or_init(|| {
        std::env::var("MLBETA_MAX_EVALS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(1_000_000)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, max_evals: default_max_evals() }
    }

    /// Pure absolute tolerance.
    pub fn absolute(tol: f64) -> Self {
        Self::new(tol, 0.0)
    }

    /// Relative tolerance with a negligible absolute floor.
    pub fn relative(tol: f64) -> Self {
        Self::new(1e-300, tol)
    }

    pub fn with_max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs()).max(4.0 * f64::EPSILON * value.abs())
    }
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

impl QuadResult {
    fn failed(msg: String, evaluations: usize) -> Self {
        Self {
            value: f64::NAN,
            abs_error_estimate: f64::INFINITY,
            evaluations,
            converged: false,
            diagnostic: Some(msg),
        }
    }
}

/// Abscissa with its distances to the lower and upper endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

/// Integration range for the iterated 2-D rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    Finite(f64, f64),
    From(f64),
}

trait DeMap {
    fn t_max(&self) -> f64;
    /// Node and Jacobian at parameter `t`; `None` when the node is unusable.
    fn node(&self, t: f64) -> Option<(Node, f64)>;
}

struct Finite {
    a: f64,
    b: f64,
}

impl DeMap for Finite {
    fn t_max(&self) -> f64 {
        (345.0 / FRAC_PI_2).asinh()
    }

    fn node(&self, t: f64) -> Option<(Node, f64)> {
        let len = self.b - self.a;
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let small = len * e / (1.0 + e);
        let large = len / (1.0 + e);
        if small == 0.0 {
            return None;
        }
        let jac = len * std::f64::consts::PI * t.cosh() * e / ((1.0 + e) * (1.0 + e));
        let node = if t < 0.0 {
            Node { x: self.a + small, from_lo: small, to_hi: large }
        } else {
            Node { x: self.b - small, from_lo: large, to_hi: small }
        };
        Some((node, jac))
    }
}

struct HalfLine {
    a: f64,
}

impl DeMap for HalfLine {
    fn t_max(&self) -> f64 {
        (700.0 / FRAC_PI_2).asinh()
    }

    fn node(&self, t: f64) -> Option<(Node, f64)> {
        let d = (FRAC_PI_2 * t.sinh()).exp();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let jac = d * FRAC_PI_2 * t.cosh();
        Some((Node { x: self.a + d, from_lo: d, to_hi: f64::INFINITY }, jac))
    }
}

fn de_integrate<M: DeMap, F: FnMut(Node) -> f64>(map: &M, mut f: F, cfg: &QuadConfig) -> QuadResult {
    let t_max = map.t_max();
    let mut evals = 0usize;
    let mut sum = KahanSum::new();
    let mut max_term = 0.0f64;
    // outermost parameters at which a non-negligible term was seen
    let mut lo_seen = 0.0f64;
    let mut hi_seen = 0.0f64;
    let mut level_terms: Vec<(f64, f64)> = Vec::new();

    let mut sample = |t: f64, evals: &mut usize| -> Result<f64, String> {
        match map.node(t) {
            None => Ok(0.0),
            Some((node, jac)) => {
                *evals += 1;
                let v = f(node);
                if !v.is_finite() {
                    return Err(format!("integrand returned {v} at x = {:e}", node.x));
                }
                Ok(jac * v)
            }
        }
    };

    let k0 = t_max.floor() as i64;
    for k in -k0..=k0 {
        let t = k as f64;
        match sample(t, &mut evals) {
            Ok(term) => {
                sum.add(term);
                level_terms.push((t, term.abs()));
            }
            Err(msg) => return QuadResult::failed(msg, evals),
        }
    }

    let mut h = 1.0f64;
    let mut prev = sum.value() * h;
    let mut err = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        for &(_, a) in &level_terms {
            max_term = max_term.max(a);
        }
        for &(t, a) in &level_terms {
            if a > PRUNE * max_term {
                lo_seen = lo_seen.min(t);
                hi_seen = hi_seen.max(t);
            }
        }
        let lo_cut = (lo_seen - h).max(-t_max);
        let hi_cut = (hi_seen + h).min(t_max);
        h *= 0.5;
        level_terms.clear();

        let k_lo = (lo_cut / h).ceil() as i64;
        let k_hi = (hi_cut / h).floor() as i64;
        let new_nodes = ((k_hi - k_lo + 2) / 2).max(0) as usize;
        if evals + new_nodes > cfg.max_evals {
            return QuadResult {
                value: prev,
                abs_error_estimate: err,
                evaluations: evals,
                converged: false,
                diagnostic: Some(format!("evaluation budget of {} exhausted at level {level}", cfg.max_evals)),
            };
        }
        for k in k_lo..=k_hi {
            if k % 2 == 0 {
                continue;
            }
            let t = k as f64 * h;
            match sample(t, &mut evals) {
                Ok(term) => {
                    sum.add(term);
                    level_terms.push((t, term.abs()));
                }
                Err(msg) => return QuadResult::failed(msg, evals),
            }
        }
        let cur = sum.value() * h;
        err = (cur - prev).abs();
        prev = cur;
        if level >= MIN_LEVEL && err <= cfg.target(cur) {
            return QuadResult {
                value: cur,
                // successive levels can agree exactly; rounding still bounds the accuracy
                abs_error_estimate: err.max(f64::EPSILON * sum.abs_total() * h),
                evaluations: evals,
                converged: true,
                diagnostic: None,
            };
        }
    }
    QuadResult {
        value: prev,
        abs_error_estimate: err,
        evaluations: evals,
        converged: false,
        diagnostic: Some(format!("tolerance not reached after {MAX_LEVEL} levels")),
    }
}

/// Tanh-sinh rule on the finite interval `[a, b]`.
pub fn tanh_sinh<F: FnMut(Node) -> f64>(a: f64, b: f64, cfg: &QuadConfig, f: F) -> QuadResult {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return QuadResult::failed(format!("invalid interval [{a}, {b}]"), 0);
    }
    if a == b {
        return QuadResult { value: 0.0, abs_error_estimate: 0.0, evaluations: 0, converged: true, diagnostic: None };
    }
    de_integrate(&Finite { a, b }, f, cfg)
}

/// Exp-sinh rule on `[a, ∞)`; handles an integrable singularity at `a`
/// and algebraic or faster decay at infinity.
pub fn exp_sinh<F: FnMut(Node) -> f64>(a: f64, cfg: &QuadConfig, f: F) -> QuadResult {
    if !a.is_finite() {
        return QuadResult::failed(format!("invalid lower limit {a}"), 0);
    }
    de_integrate(&HalfLine { a }, f, cfg)
}

pub fn integrate_range<F: FnMut(Node) -> f64>(range: Range, cfg: &QuadConfig, f: F) -> QuadResult {
    match range {
        Range::Finite(a, b) => tanh_sinh(a, b, cfg, f),
        Range::From(a) => exp_sinh(a, cfg, f),
    }
}

/// `∫_a^b f(x) dx` to absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> QuadResult {
    tanh_sinh(a, b, &QuadConfig::absolute(tol), |n| f(n.x))
}

/// `∫_a^∞ f(x) dx` to absolute tolerance `tol`.
pub fn integrate_semi_inf<F: FnMut(f64) -> f64>(a: f64, tol: f64, mut f: F) -> QuadResult {
    exp_sinh(a, &QuadConfig::absolute(tol), |n| f(n.x))
}

/// Iterated product rule over `outer × inner`.
///
/// The reported error is the larger of the outer estimate and the worst
/// inner estimate, taken relative to the largest inner value and scaled by
/// the result.
pub fn integrate_2d<F: FnMut(Node, Node) -> f64>(outer: Range, inner: Range, cfg: &QuadConfig, mut f: F) -> QuadResult {
    let mut inner_evals = 0usize;
    let mut inner_err = 0.0f64;
    let mut inner_max = 0.0f64;
    let mut inner_diag: Option<String> = None;
    let res = integrate_range(outer, cfg, |xo| {
        let r = integrate_range(inner, cfg, |xi| f(xo, xi));
        inner_evals += r.evaluations;
        if !r.converged && inner_diag.is_none() {
            inner_diag =
                Some(format!("inner integral at x = {:e}: {}", xo.x, r.diagnostic.clone().unwrap_or_default()));
        }
        inner_err = inner_err.max(r.abs_error_estimate);
        inner_max = inner_max.max(r.value.abs());
        r.value
    });
    let inner_rel = if inner_max > 0.0 { inner_err / inner_max } else { 0.0 };
    let err = res.abs_error_estimate.max(inner_rel * res.value.abs());
    let diagnostic = res.diagnostic.clone().or(inner_diag.clone());
    QuadResult {
        value: res.value,
        abs_error_estimate: err,
        evaluations: res.evaluations + inner_evals,
        converged: res.converged && inner_diag.is_none() && err <= cfg.target(res.value),
        diagnostic,
    }
}

/// `∫_0^R ∫_0^S f(x, y) dy dx` to absolute tolerance `tol`.
pub fn integrate_2d_rect<F: FnMut(f64, f64) -> f64>(r: f64, s: f64, tol: f64, mut f: F) -> QuadResult {
    integrate_2d(Range::Finite(0.0, r), Range::Finite(0.0, s), &QuadConfig::absolute(tol), |a, b| f(a.x, b.x))
}
