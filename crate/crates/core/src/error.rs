use thiserror::Error;

/// Every failure the library can report.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`])
/// that the CLI and the HTTP service put in their error payloads.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label count {labels} does not match point count {points}")]
    LabelCountMismatch { points: usize, labels: usize },
    #[error("id count {ids} does not match point count {points}")]
    IdCountMismatch { points: usize, ids: usize },
    #[error("duplicate point id {0}")]
    DuplicateId(u64),
    #[error("non-finite coordinate in point {id}")]
    NonFinite { id: u64 },
    #[error("{n} points exceed the dense distance matrix cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown quality class `{0}`")]
    UnknownClass(String),

    #[error("max_scale must be positive, got {0}")]
    BadScale(f64),
    #[error("homology dimension {0} is not supported (only 0 and 1)")]
    UnsupportedDimension(usize),
    #[error("dimension {dim}: {left} vs {right} infinite bars")]
    InfiniteBarMismatch { dim: usize, left: usize, right: usize },

    #[error("covariance is degenerate; PCA lens is undefined")]
    DegenerateCovariance,
    #[error("invalid lens: {0}")]
    BadLens(String),
    #[error("overlap fraction {0} outside [0, 0.9]")]
    BadOverlap(f64),
    #[error("cover needs at least one interval")]
    BadIntervals,
    #[error("invalid clustering parameters: {0}")]
    BadClustering(String),
    #[error("invalid graph: {0}")]
    BadGraph(String),

    #[error("budget {budget} is smaller than the node count {nodes}")]
    BudgetTooSmall { budget: usize, nodes: usize },
    #[error("operation requires a labeled point cloud")]
    UnlabeledCloud,
    #[error("calibration cloud is empty")]
    EmptyCalibration,
    #[error("calibrated novelty threshold is zero")]
    DegenerateTau,
    #[error("quantile {0} outside (0, 1)")]
    BadQuantile(f64),
    #[error("representative set has no calibrated threshold")]
    UncalibratedReps,
    #[error("unknown novelty candidate {0}")]
    UnknownCandidate(usize),

    #[error("stage {got} skips ahead of the next expected stage {expected}")]
    StageGap { expected: usize, got: usize },
    #[error("stage {0} cannot be analyzed before its predecessor")]
    UnanalyzedPredecessor(usize),
    #[error("stage {0} has already been analyzed")]
    StageAlreadyAnalyzed(usize),
    #[error("stage {0} is unknown or not analyzed")]
    UnknownStage(usize),
    #[error("prediction model has no representatives")]
    EmptyModel,
    #[error("k must be at least 1")]
    BadK,
    #[error("no pending novelty report")]
    NoPendingReport,
    #[error("no analyzed stages")]
    EmptyHistory,

    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("stage {0} is outside the dataset")]
    BadStage(usize),
}

impl Error {
    /// Stable identifier used in machine-readable error payloads.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            EmptyCloud => "EmptyCloud",
            DimensionMismatch { .. } => "DimensionMismatch",
            LabelCountMismatch { .. } => "LabelCountMismatch",
            IdCountMismatch { .. } => "IdCountMismatch",
            DuplicateId(_) => "DuplicateId",
            NonFinite { .. } => "NonFinite",
            TooLarge { .. } => "TooLarge",
            Parse { .. } => "Parse",
            UnknownClass(_) => "UnknownClass",
            BadScale(_) => "BadScale",
            UnsupportedDimension(_) => "UnsupportedDimension",
            InfiniteBarMismatch { .. } => "InfiniteBarMismatch",
            DegenerateCovariance => "DegenerateCovariance",
            BadLens(_) => "BadLens",
            BadOverlap(_) => "BadOverlap",
            BadIntervals => "BadIntervals",
            BadClustering(_) => "BadClustering",
            BadGraph(_) => "BadGraph",
            BudgetTooSmall { .. } => "BudgetTooSmall",
            UnlabeledCloud => "UnlabeledCloud",
            EmptyCalibration => "EmptyCalibration",
            DegenerateTau => "DegenerateTau",
            BadQuantile(_) => "BadQuantile",
            UncalibratedReps => "UncalibratedReps",
            UnknownCandidate(_) => "UnknownCandidate",
            StageGap { .. } => "StageGap",
            UnanalyzedPredecessor(_) => "UnanalyzedPredecessor",
            StageAlreadyAnalyzed(_) => "StageAlreadyAnalyzed",
            UnknownStage(_) => "UnknownStage",
            EmptyModel => "EmptyModel",
            BadK => "BadK",
            NoPendingReport => "NoPendingReport",
            EmptyHistory => "EmptyHistory",
            BadConfig(_) => "BadConfig",
            BadStage(_) => "BadStage",
        }
    }

    /// True for errors caused by malformed or out-of-range user input, as
    /// opposed to failures that arise while running an otherwise valid job.
    pub fn is_input_error(&self) -> bool {
        use Error::*;
        matches!(
            self,
            EmptyCloud
                | DimensionMismatch { .. }
                | LabelCountMismatch { .. }
                | IdCountMismatch { .. }
                | DuplicateId(_)
                | NonFinite { .. }
                | TooLarge { .. }
                | Parse { .. }
                | UnknownClass(_)
                | BadScale(_)
                | UnsupportedDimension(_)
                | BadLens(_)
                | BadOverlap(_)
                | BadIntervals
                | BadClustering(_)
                | BadGraph(_)
                | BadQuantile(_)
                | BadK
                | BadConfig(_)
                | BadStage(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
