//! Mittag-Leffler extended beta, Gauss and confluent hypergeometric
//! functions, the induced probability distribution, and a verification
//! engine for the identities they satisfy.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod dist;
pub mod error;
pub mod extbeta;
pub mod hyper;
pub mod mlf;
pub mod quad;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
