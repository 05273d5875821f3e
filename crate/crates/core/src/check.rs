//! Identity-check reports shared by the verification routines.

use std::fmt;

/// Every identity or invariant the verification engine knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityId {
    FunctionalRelation,
    SummationFinite,
    SummationInfinite,
    RecurrenceBinomial,
    Mellin,
    DoubleIntegral,
    GeneratingFunction,
    Pfaff,
    PfaffArgument,
    Kummer,
    MellinF,
    MellinPhi,
    RepEquivalence,
    Normalization,
    CdfConsistency,
    VarianceIdentity,
    MgfSeries,
    KsSampling,
}

impl IdentityId {
    pub const BETA: [IdentityId; 6] = [
        IdentityId::FunctionalRelation,
        IdentityId::SummationFinite,
        IdentityId::SummationInfinite,
        IdentityId::RecurrenceBinomial,
        IdentityId::Mellin,
        IdentityId::DoubleIntegral,
    ];
    pub const HYPER: [IdentityId; 7] = [
        IdentityId::GeneratingFunction,
        IdentityId::Pfaff,
        IdentityId::PfaffArgument,
        IdentityId::Kummer,
        IdentityId::MellinF,
        IdentityId::MellinPhi,
        IdentityId::RepEquivalence,
    ];
    pub const DIST: [IdentityId; 5] = [
        IdentityId::Normalization,
        IdentityId::CdfConsistency,
        IdentityId::VarianceIdentity,
        IdentityId::MgfSeries,
        IdentityId::KsSampling,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::FunctionalRelation => "functional_relation",
            IdentityId::SummationFinite => "summation_finite",
            IdentityId::SummationInfinite => "summation_infinite",
            IdentityId::RecurrenceBinomial => "recurrence_binomial",
            IdentityId::Mellin => "mellin",
            IdentityId::DoubleIntegral => "double_integral",
            IdentityId::GeneratingFunction => "generating_function",
            IdentityId::Pfaff => "pfaff",
            IdentityId::PfaffArgument => "pfaff_argument",
            IdentityId::Kummer => "kummer",
            IdentityId::MellinF => "mellin_f",
            IdentityId::MellinPhi => "mellin_phi",
            IdentityId::RepEquivalence => "rep_equivalence",
            IdentityId::Normalization => "normalization",
            IdentityId::CdfConsistency => "cdf_consistency",
            IdentityId::VarianceIdentity => "variance_identity",
            IdentityId::MgfSeries => "mgf_series",
            IdentityId::KsSampling => "ks_sampling",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `|lhs − rhs| / max(1, |rhs|)`.
pub fn residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / rhs.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub identity: IdentityId,
    /// Named inputs of the checked point, in a stable order.
    pub point: Vec<(String, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Remainder estimate for truncated series (already folded into `rhs`).
    pub tail: Option<f64>,
    /// Residual of the bare partial sum, without the remainder.
    pub partial_residual: Option<f64>,
    /// Residual of the form as printed, where it differs from the checked form.
    pub printed_residual: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl CheckReport {
    pub fn new(identity: IdentityId, point: Vec<(String, f64)>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let res = residual(lhs, rhs);
        Self {
            identity,
            point,
            lhs,
            rhs,
            residual: res,
            tolerance,
            pass: res <= tolerance,
            tail: None,
            partial_residual: None,
            printed_residual: None,
            diagnostics: Vec::new(),
        }
    }

    /// A report for a point whose evaluation failed; never passes.
    pub fn failed(identity: IdentityId, point: Vec<(String, f64)>, tolerance: f64, msg: impl Into<String>) -> Self {
        let mut r = Self::new(identity, point, f64::NAN, f64::NAN, tolerance);
        r.residual = f64::INFINITY;
        r.pass = false;
        r.diagnostics.push(msg.into());
        r
    }

    pub fn note(mut self, msg: impl Into<String>) -> Self {
        self.diagnostics.push(msg.into());
        self
    }
}

pub(crate) fn point(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}
