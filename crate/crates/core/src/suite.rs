//! The identity-verification suite: every identity and distribution
//! invariant evaluated over a subsample of the default parameter grid.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::check::{CheckReport, IdentityId};
use crate::dist::{verify_dist_invariant, DistCheck, DistSpec};
use crate::error::{domain, Error, Result};
use crate::extbeta::{verify_beta_identity, BetaArgs, BetaCheck, ExtParams, DEFAULT_SERIES_TERMS};
use crate::hyper::{verify_hyper_identity, ArgumentMap, HyperArgs, HyperCheck};

pub const DAMPING_VALUES: [f64; 3] = [0.0, 0.1, 0.5];
pub const LAMBDA_VALUES: [f64; 3] = [0.7, 1.0, 1.5];
pub const EXPONENT_VALUES: [f64; 3] = [0.8, 1.0, 1.3];
pub const SHAPE_VALUES: [f64; 3] = [0.6, 1.5, 2.5];
/// Upper bound on the points evaluated per identity.
pub const MAX_POINTS: usize = 60;
pub const KS_SAMPLES: usize = 10_000;
pub const KS_SEED: u64 = 42;

/// One point of the default grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub args: BetaArgs,
    pub params: ExtParams,
}

/// The full product grid, row-major in `(p, q, λ, σ, τ, η₁, η₂)`.
pub fn default_grid() -> Vec<GridPoint> {
    let mut out = Vec::with_capacity(3usize.pow(7));
    for p in DAMPING_VALUES {
        for q in DAMPING_VALUES {
            for lambda in LAMBDA_VALUES {
                for sigma in EXPONENT_VALUES {
                    for tau in EXPONENT_VALUES {
                        for eta1 in SHAPE_VALUES {
                            for eta2 in SHAPE_VALUES {
                                out.push(GridPoint {
                                    args: BetaArgs { eta1, eta2 },
                                    params: ExtParams { p, q, lambda, sigma, tau },
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Beta,
    Hyper,
    Dist,
    All,
}

impl Suite {
    pub fn identities(self) -> Vec<IdentityId> {
        match self {
            Suite::Beta => IdentityId::BETA.to_vec(),
            Suite::Hyper => IdentityId::HYPER.to_vec(),
            Suite::Dist => IdentityId::DIST.to_vec(),
            Suite::All => [&IdentityId::BETA[..], &IdentityId::HYPER[..], &IdentityId::DIST[..]].concat(),
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Suite::Beta),
            "hyper" => Ok(Suite::Hyper),
            "dist" => Ok(Suite::Dist),
            "all" => Ok(Suite::All),
            _ => domain(format!("unknown suite '{s}' (expected beta, hyper, dist or all)")),
        }
    }
}

/// Pass threshold used when no tolerance is requested.
pub fn default_tolerance(id: IdentityId) -> f64 {
    use IdentityId::*;
    match id {
        FunctionalRelation | SummationFinite | SummationInfinite => 1e-9,
        RecurrenceBinomial => 1e-8,
        Mellin | DoubleIntegral | MellinF | MellinPhi => 1e-4,
        GeneratingFunction => 1e-6,
        Pfaff | PfaffArgument | Kummer | RepEquivalence => 1e-8,
        Normalization | CdfConsistency | MgfSeries => 1e-9,
        VarianceIdentity => 1e-10,
        // replaced by the critical value
        KsSampling => 1.0,
    }
}

/// Accuracy floor of the method behind an identity; a requested tolerance
/// below it is raised to it.
pub fn tolerance_floor(id: IdentityId) -> f64 {
    use IdentityId::*;
    match id {
        Mellin | DoubleIntegral | MellinF | MellinPhi => 1e-4,
        GeneratingFunction => 1e-6,
        _ => 0.0,
    }
}

pub fn effective_tolerance(id: IdentityId, requested: Option<f64>) -> f64 {
    match requested {
        Some(t) => t.max(tolerance_floor(id)),
        None => default_tolerance(id),
    }
}

/// A report together with the grid index it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub grid_index: usize,
    pub report: CheckReport,
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Beta(BetaCheck, BetaArgs, ExtParams),
    Hyper(HyperCheck, ExtParams),
    Dist(DistCheck, BetaArgs, ExtParams),
}

impl Task {
    fn run(self, tol: f64) -> CheckReport {
        match self {
            Task::Beta(check, args, params) => verify_beta_identity(check, args, &params, tol),
            Task::Hyper(check, params) => verify_hyper_identity(check, &params, tol),
            Task::Dist(check, args, params) => match DistSpec::new(args.eta1, args.eta2, params) {
                Ok(spec) => verify_dist_invariant(check, &spec, tol),
                Err(e) => CheckReport::failed(check.id(), Vec::new(), tol, e.to_string()),
            },
        }
    }
}

// Visits the grid in a fixed pseudo-random order (a stride coprime to the
// grid size), so a short prefix already covers every axis.
fn spread(grid_len: usize, offset: usize) -> impl Iterator<Item = usize> {
    const STRIDE: usize = 997;
    (0..grid_len).map(move |i| (i * STRIDE + offset) % grid_len)
}

fn hyper_args(g: &GridPoint, z: f64) -> HyperArgs {
    let BetaArgs { eta1, eta2 } = g.args;
    HyperArgs { eta1, eta2, eta3: eta2 + eta1, z }
}

fn undamped(g: &GridPoint) -> bool {
    g.params.p == 0.0 && g.params.q == 0.0
}

fn density_ok(g: &GridPoint) -> bool {
    g.params.lambda <= 1.0 || undamped(g)
}

const MELLIN_POINTS: [(f64, f64); 2] = [(0.5, 0.5), (0.25, 0.75)];
const MELLIN_LIMIT: usize = 6;
const DOUBLE_INTEGRAL_LIMIT: usize = 8;

// Tasks for one identity: (grid index, task), at most `MAX_POINTS`.
fn tasks_for(id: IdentityId, grid: &[GridPoint]) -> Vec<(usize, Task)> {
    use IdentityId::*;
    let offset = id as usize * 131;
    let mut out = Vec::new();
    let mut k = 0usize;
    let limit = match id {
        Mellin => MAX_POINTS,
        MellinF | MellinPhi => MELLIN_LIMIT,
        DoubleIntegral => DOUBLE_INTEGRAL_LIMIT,
        KsSampling => 3,
        _ => MAX_POINTS,
    };
    for i in spread(grid.len(), offset) {
        if out.len() >= limit {
            break;
        }
        let g = &grid[i];
        let (args, params) = (g.args, g.params);
        let task = match id {
            FunctionalRelation => Some(Task::Beta(BetaCheck::FunctionalRelation, args, params)),
            SummationFinite => params.converges(args.eta1, 1.0 - args.eta2).then_some(Task::Beta(
                BetaCheck::SummationFinite { terms: DEFAULT_SERIES_TERMS },
                args,
                params,
            )),
            SummationInfinite => {
                Some(Task::Beta(BetaCheck::SummationInfinite { terms: DEFAULT_SERIES_TERMS }, args, params))
            }
            RecurrenceBinomial => {
                let n = 1 + (k % 3) as u32;
                let eta = args.eta1;
                // B(η, −η−n) and every B(η+j, −η−j) must be integrable
                let nf = n as f64;
                (params.converges(eta, -eta - nf) && (0..=n).all(|j| params.converges(eta + j as f64, -eta - j as f64)))
                    .then_some(Task::Beta(BetaCheck::RecurrenceBinomial { n }, args, params))
            }
            // the quadrant integral converges slowly once E_λ decays only
            // algebraically (λ > 1); those points are left to the swapped form
            Mellin | DoubleIntegral if id == Mellin || g.params.lambda <= 1.0 => undamped(g).then(|| {
                let (r, s) = MELLIN_POINTS[k % 2];
                let check = if id == Mellin { BetaCheck::Mellin { r, s } } else { BetaCheck::DoubleIntegral { r, s } };
                Task::Beta(check, args, params)
            }),
            Mellin | DoubleIntegral => None,
            GeneratingFunction => {
                let (t, z) = [(0.1, 0.2), (0.3, 0.3), (0.2, -0.5)][k % 3];
                let BetaArgs { eta1, eta2 } = args;
                Some(Task::Hyper(
                    HyperCheck::GeneratingFunction { nu: params.lambda, eta2, eta3: eta2 + eta1, z, t, terms: 32 },
                    params,
                ))
            }
            Pfaff => Some(Task::Hyper(HyperCheck::Pfaff { args: hyper_args(g, [-0.5, 0.3, 0.6][k % 3]) }, params)),
            PfaffArgument => {
                let (map, z) = [
                    (ArgumentMap::Reciprocal, 0.6),
                    (ArgumentMap::Reciprocal, 2.0),
                    (ArgumentMap::Ratio, 0.5),
                    (ArgumentMap::Ratio, -0.4),
                ][k % 4];
                Some(Task::Hyper(HyperCheck::PfaffArgument { map, args: hyper_args(g, z) }, params))
            }
            Kummer => {
                let h = hyper_args(g, [-2.0, 0.5, 3.0][k % 3]);
                Some(Task::Hyper(HyperCheck::Kummer { eta2: h.eta2, eta3: h.eta3, z: h.z }, params))
            }
            MellinF => (undamped(g) && g.params.lambda <= 1.0).then(|| {
                let (r, s) = MELLIN_POINTS[k % 2];
                Task::Hyper(HyperCheck::MellinF { args: hyper_args(g, [0.3, -0.5][k % 2]), r, s }, params)
            }),
            MellinPhi => (undamped(g) && g.params.lambda <= 1.0).then(|| {
                let (r, s) = MELLIN_POINTS[k % 2];
                let h = hyper_args(g, [1.5, -1.0][(k / 2) % 2]);
                Task::Hyper(HyperCheck::MellinPhi { eta2: h.eta2, eta3: h.eta3, z: h.z, r, s }, params)
            }),
            RepEquivalence => Some(Task::Hyper(
                HyperCheck::RepEquivalence { args: hyper_args(g, [-2.0, -0.5, 0.3, 0.85, 0.97][k % 5]) },
                params,
            )),
            Normalization => density_ok(g).then_some(Task::Dist(DistCheck::Normalization, args, params)),
            CdfConsistency => density_ok(g).then(|| {
                let x = [0.1, 0.3, 0.5, 0.7, 0.9][k % 5];
                Task::Dist(DistCheck::CdfConsistency { x }, args, params)
            }),
            VarianceIdentity => density_ok(g).then_some(Task::Dist(DistCheck::VarianceIdentity, args, params)),
            MgfSeries => density_ok(g).then(|| {
                let t = [-1.0, 0.5, 1.0][k % 3];
                Task::Dist(DistCheck::MgfSeries { t, terms: 40 }, args, params)
            }),
            KsSampling => density_ok(g).then_some(Task::Dist(
                DistCheck::KsSampling { n: KS_SAMPLES, seed: KS_SEED },
                args,
                params,
            )),
        };
        if let Some(task) = task {
            out.push((i, task));
            k += 1;
        }
    }
    out
}

/// Evaluate the suite on the default grid.
///
/// `tol` of `None` applies [`default_tolerance`]; otherwise each identity
/// uses `max(tol, floor)` with the floor from [`tolerance_floor`]. Points are
/// evaluated on all available cores; the result is sorted by identity, then
/// grid index.
pub fn run_suite(suite: Suite, tol: Option<f64>) -> Result<Vec<SuiteEntry>> {
    run_identities(&suite.identities(), tol)
}

/// [`run_suite`] restricted to the listed identities.
pub fn run_identities(ids: &[IdentityId], tol: Option<f64>) -> Result<Vec<SuiteEntry>> {
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("tolerance must be positive and finite (got {t})"));
        }
    }
    let grid = default_grid();
    let mut jobs: Vec<(IdentityId, usize, Task)> = Vec::new();
    for &id in ids {
        jobs.extend(tasks_for(id, &grid).into_iter().map(|(i, t)| (id, i, t)));
    }
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(id, grid_index, task)) = jobs.get(j) else { break };
                let report = task.run(effective_tolerance(id, tol));
                done.lock().unwrap_or_else(|e| e.into_inner()).push(SuiteEntry { grid_index, report });
            });
        }
    });
    let mut entries = done.into_inner().unwrap_or_else(|e| e.into_inner());
    entries.sort_by_key(|e| (e.report.identity, e.grid_index));
    Ok(entries)
}
