use num_complex::Complex64;
use thiserror::Error;

/// Pipeline stage tags carried by [`Error::Stage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Surface,
    Synthesize,
    Extract,
    Recover,
    Match,
}

impl Stage {
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Surface => "surface",
            Stage::Synthesize => "synthesize",
            Stage::Extract => "extract",
            Stage::Recover => "recover",
            Stage::Match => "match",
        }
    }
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("series window underflow: nonzero coefficient at exponent {exponent} below low cut {low_cut}")]
    WindowUnderflow { exponent: i32, low_cut: i32 },
    #[error("series window overflow: exponent {exponent} is outside the exact window (exact through {valid_to})")]
    WindowOverflow { exponent: i32, valid_to: i32 },
    #[error("exponent {exponent} outside window [{low_cut}, {high_cut}]")]
    OutOfWindow { exponent: i32, low_cut: i32, high_cut: i32 },
    #[error("unsupported series operation: {0}")]
    UnsupportedSeries(&'static str),

    #[error("zero form has no root divisor")]
    ZeroForm,
    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigenvalue iteration did not converge after {iterations} iterations ({} of {n} eigenvalues deflated)", converged.len())]
    EigNonConvergence {
        n: usize,
        iterations: usize,
        /// Eigenvalues that had deflated before the budget ran out.
        converged: Vec<Complex64>,
    },
    #[error("singular matrix")]
    Singular,

    #[error("discriminant vanishes identically: isotrivial, not an elliptic fibration with varying fibers in the required sense")]
    ZeroDiscriminant,
    #[error("transvectant vanishes identically: isotrivial or degenerate family")]
    Isotrivial,
    #[error("inequality gate fails: need h >= q + 3 and 8h > 10(q - 1), got h = {h}, q = {q}")]
    Gate { h: i64, q: i64 },
    #[error("unimplemented: base curves of genus q = {0} (only q = 0 is supported)")]
    UnsupportedGenus(u32),
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("rejection budget of {0} draws exhausted")]
    RejectionBudget(usize),

    #[error("surface is not general: {0}")]
    NotGeneral(String),
    #[error("degenerate presentation: {0}")]
    DegeneratePresentation(String),
    #[error("interpolation dimension mismatch: expected {expected} quadrics, found {found}")]
    InterpolationMismatch { expected: usize, found: usize },
    #[error("recovered points do not match: max chordal distance {max_chordal:e} exceeds {threshold:e}")]
    MatchFailed { max_chordal: f64, threshold: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Stage tag if this error was raised inside a tagged pipeline stage.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
