use serde_json::{json, Value};
use thiserror::Error;

/// Coarse classification used by the command-line driver to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input, failed precondition or invalid configuration.
    Config,
    /// An iterative solver did not converge.
    Nonconvergence,
    /// A solution exists but has the wrong sign structure or branch.
    Topology,
    /// Everything else (I/O, numerical breakdown).
    Other,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid potential spec: {0}")]
    InvalidSpec(String),

    #[error("no root of mu on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("ambiguous root: mu changes sign {count} times on [{lo}, {hi}]")]
    AmbiguousRoot { lo: f64, hi: f64, count: usize },

    #[error("structural assumptions violated: {}", .failures.join("; "))]
    AssumptionViolated {
        failures: Vec<String>,
        report: Box<crate::model::ValidationReport>,
    },

    #[error("degenerate quotient at x = {x}: denominator {denominator:e}")]
    DegenerateQuotient { x: f64, denominator: f64 },

    #[error("non-finite quotient at x = {x}")]
    NonFiniteQuotient { x: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("nonconvergence: {context}")]
    Nonconvergence { context: String, diagnostics: Vec<String> },

    #[error("unexpected topology: converged solution has {sign_changes} sign changes")]
    UnexpectedTopology {
        sign_changes: usize,
        solution: Box<crate::kink::KinkSolution>,
    },

    #[error("topology error: expected exactly one sign change, found {sign_changes}")]
    Topology { sign_changes: usize },

    #[error("sign violation: eta = {value:e} >= 0 at interior node x = {x}")]
    SignViolation { x: f64, value: f64 },

    #[error("Newton divergence after {} iterations", .trace.len())]
    Divergence { trace: Vec<f64> },

    #[error("branch capture failure: wanted {wanted}, converged to a profile with {sign_changes} sign changes ({detail})")]
    BranchCapture {
        wanted: String,
        sign_changes: usize,
        detail: String,
    },

    #[error("pole detected near s = {s} (denominator {denominator:e})")]
    PoleDetected { s: f64, denominator: f64 },

    #[error("Bäcklund convention failure: residuals {residuals:?}")]
    ConventionFailure { residuals: Vec<f64> },

    #[error("margin too small at x = {x}: outer root is only unique for x <= {limit}")]
    MarginTooSmall { x: f64, limit: f64 },

    #[error("{what} = {value} outside validity window [{lo}, {hi}]")]
    OutsideWindow {
        what: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("missing zero: {0}")]
    MissingZero(String),

    #[error("insufficient runs: need {needed}, got {got}")]
    InsufficientRuns { needed: usize, got: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidSpec(_)
            | Error::NoRoot { .. }
            | Error::AmbiguousRoot { .. }
            | Error::AssumptionViolated { .. }
            | Error::MarginTooSmall { .. }
            | Error::OutsideWindow { .. }
            | Error::InsufficientRuns { .. }
            | Error::Json(_) => ErrorKind::Config,
            Error::Nonconvergence { .. } | Error::Divergence { .. } => ErrorKind::Nonconvergence,
            Error::UnexpectedTopology { .. }
            | Error::Topology { .. }
            | Error::SignViolation { .. }
            | Error::BranchCapture { .. }
            | Error::PoleDetected { .. }
            | Error::ConventionFailure { .. }
            | Error::MissingZero(_) => ErrorKind::Topology,
            Error::DegenerateQuotient { .. }
            | Error::NonFiniteQuotient { .. }
            | Error::NonFinite(_)
            | Error::Io(_) => ErrorKind::Other,
        }
    }

    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::NoRoot { .. } => "no_root",
            Error::AmbiguousRoot { .. } => "ambiguous_root",
            Error::AssumptionViolated { .. } => "assumption_violated",
            Error::DegenerateQuotient { .. } => "degenerate_quotient",
            Error::NonFiniteQuotient { .. } => "non_finite_quotient",
            Error::NonFinite(_) => "non_finite",
            Error::Nonconvergence { .. } => "nonconvergence",
            Error::UnexpectedTopology { .. } => "unexpected_topology",
            Error::Topology { .. } => "topology",
            Error::SignViolation { .. } => "sign_violation",
            Error::Divergence { .. } => "divergence",
            Error::BranchCapture { .. } => "branch_capture_failure",
            Error::PoleDetected { .. } => "pole_detected",
            Error::ConventionFailure { .. } => "convention_failure",
            Error::MarginTooSmall { .. } => "margin_too_small",
            Error::OutsideWindow { .. } => "outside_window",
            Error::MissingZero(_) => "missing_zero",
            Error::InsufficientRuns { .. } => "insufficient_runs",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }

    /// Structured details for error reports.
    pub fn context(&self) -> Value {
        match self {
            Error::NoRoot { lo, hi } => json!({ "lo": lo, "hi": hi }),
            Error::AmbiguousRoot { lo, hi, count } => json!({ "lo": lo, "hi": hi, "count": count }),
            Error::AssumptionViolated { failures, report } => {
                json!({ "failures": failures, "report": report })
            }
            Error::DegenerateQuotient { x, denominator } => {
                json!({ "x": x, "denominator": denominator })
            }
            Error::NonFiniteQuotient { x } => json!({ "x": x }),
            Error::Nonconvergence { diagnostics, .. } => json!({ "diagnostics": diagnostics }),
            Error::UnexpectedTopology { sign_changes, solution } => json!({
                "sign_changes": sign_changes,
                "epsilon": solution.epsilon,
                "a": solution.a,
                "energy": solution.energy,
            }),
            Error::Topology { sign_changes } => json!({ "sign_changes": sign_changes }),
            Error::SignViolation { x, value } => json!({ "x": x, "value": value }),
            Error::Divergence { trace } => json!({ "residual_trace": trace }),
            Error::BranchCapture {
                wanted,
                sign_changes,
                detail,
            } => json!({ "wanted": wanted, "sign_changes": sign_changes, "detail": detail }),
            Error::PoleDetected { s, denominator } => json!({ "s": s, "denominator": denominator }),
            Error::ConventionFailure { residuals } => json!({ "residuals": residuals }),
            Error::MarginTooSmall { x, limit } => json!({ "x": x, "limit": limit }),
            Error::OutsideWindow { what, value, lo, hi } => {
                json!({ "what": what, "value": value, "lo": lo, "hi": hi })
            }
            Error::InsufficientRuns { needed, got } => json!({ "needed": needed, "got": got }),
            _ => json!({}),
        }
    }
}
