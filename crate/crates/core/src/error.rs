use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("expected a {expected} region")]
    WrongRegion { expected: &'static str },
    #[error("{what} leaves the sampled domain")]
    OutsideDomain { what: &'static str },
    #[error("region does not meet the support of the current")]
    EmptyIntersection,
    #[error("point lies in a defect column, tangent undefined")]
    DefectColumn,
    #[error("test field support is not inside the function domain")]
    SupportViolation,
    #[error("radius ladder is empty")]
    EmptyLadder,
    #[error("good set is empty")]
    EmptyGoodSet,
    #[error("values violate Lipschitz bound: measured {measured:.3e} > bound {bound:.3e}")]
    LipschitzViolation { measured: f64, bound: f64 },
    #[error("excess {excess:.3e} exceeds threshold {limit:.3e}")]
    ExcessTooLarge { excess: f64, limit: f64 },
    #[error("projection is multi-sheeted beyond the defect allowance")]
    MultiSheeted,
    #[error("gradient too large: {0:.3e}")]
    GradientTooLarge(f64),
    #[error("kernel under-resolved: rho {rho:.3e} < 2h = {two_h:.3e}")]
    UnderResolved { rho: f64, two_h: f64 },
    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },
    #[error("degenerate ball: radius {radius:.3e} below {min:.3e}")]
    DegenerateBall { radius: f64, min: f64 },
    #[error("rotation precondition violated: {0}")]
    RotationPrecondition(String),
    #[error("triple not admissible: excess {lhs:.3e} > budget {rhs:.3e}")]
    NotAdmissible { lhs: f64, rhs: f64 },
    #[error("dyadic depth bounds violated: need 5 < n0 < k, got n0={n0}, k={k}")]
    DepthBounds { n0: u32, k: u32 },
    #[error("no interpolant for active cube {0:?}")]
    MissingInterpolant([i64; 2]),
    #[error("partition denominator {0:.3e} below 1e-6")]
    ProfileTooNarrow(f64),
    #[error("query point lies in the boundary collar")]
    BoundaryCollar,
    #[error("optimizer stagnated in every start")]
    Stagnation,
    #[error("polynomial fit residual {residual:.3e} too large")]
    FitResidual { residual: f64 },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("too few samples: {0}")]
    TooFewSamples(usize),
    #[error("surface is not a graph on the requested domain: {0}")]
    NotAGraph(String),
    #[error("mass {mass} exceeds omega_m + eps_h = {limit}")]
    MassHypothesis { mass: f64, limit: f64 },
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("level k={k}, cube {cube:?}: {source}")]
    Cube {
        k: u32,
        cube: [i64; 2],
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// True for errors caused by malformed input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::Json(_) | Error::Io(_) | Error::NotAGraph(_) | Error::MassHypothesis { .. }
                | Error::DepthBounds { .. }
        )
    }
}
