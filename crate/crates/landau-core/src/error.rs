//! Error taxonomy shared by all modules.
//!
//! Two variants deserve a note on how callers are expected to treat them:
//!
//! * [`Error::ResourceCap`] and [`Error::ToleranceTooTight`] mean a
//!   computation would exceed an explicit resource limit.  They are loud by
//!   design — covering grids scale like `ε^-2` and silent degradation would
//!   invalidate every downstream certificate.
//! * [`Error::BudgetExhausted`] is not a failure of soundness: it reports
//!   that a search loop with no a-priori termination bound ran out of its
//!   configured budget before certifying anything.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("square root of a negative value")]
    NegativeRadicand,

    #[error("invalid quadrant symbol {0:?} (expected 1..=4)")]
    InvalidSymbol(char),

    #[error("coefficient {index} lies outside the open root box [-m,m]^2")]
    CoefficientOutOfBounds { index: usize },

    #[error("radius must satisfy 0 <= r < 1")]
    RadiusOutOfRange,

    #[error("requested tolerance needs more than {0} series terms")]
    ToleranceTooTight(u64),

    #[error("evaluation point lies outside the certified shell")]
    PointOutsideDisc,

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("raster mask is empty")]
    EmptyMask,

    #[error("degenerate window: certified circle leaves no room above the inner radius")]
    DegenerateWindow,

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("injected bound rejected by sample audit: {0}")]
    InjectedBoundRejected(String),

    #[error("certificate audit failed: {0}")]
    CertificateAudit(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors that signal a configured resource limit (as opposed
    /// to invalid input or an exhausted search budget).
    pub fn is_resource_cap(&self) -> bool {
        matches!(self, Error::ResourceCap(_) | Error::ToleranceTooTight(_))
    }
}
