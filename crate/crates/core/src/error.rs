use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid tangent vector: {0}")]
    InvalidTangent(String),

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The minimizing geodesic is not unique (antipodal pair on the sphere).
    #[error("points lie on each other's cut locus (distance {distance})")]
    CutLocus { distance: f64 },

    #[error("geodesic integration diverged at parameter {at}")]
    IntegrationDiverged { at: f64 },

    #[error("geodesic entered the chart singularity band at {coords:?}")]
    ChartSingularity { coords: Vec<f64> },

    #[error("geodesic length {length} exceeds the chart horizon {horizon}")]
    BeyondHorizon { length: f64, horizon: f64 },

    #[error("shooting did not converge: residual {residual:e} after {iterations} iterations")]
    ShootingNoConverge { residual: f64, iterations: usize },

    #[error("operation requires a chart manifold")]
    NotAChart,

    #[error("no direction override stored for point {0:?}")]
    MissingOverride(Vec<f64>),

    #[error("direction override does not reach its target (miss {miss:e})")]
    InvalidOverride { miss: f64 },

    #[error("contraction parameter {0} outside (0, 1]")]
    InvalidLambda(f64),

    #[error("sampler exhausted after {attempts} attempts: {reason}")]
    SamplerExhausted { attempts: usize, reason: String },

    #[error("base point is not interior: probe {probe:?} leaves the region")]
    NotInterior { probe: Vec<f64> },

    #[error("base point is not a member of the region")]
    BaseNotInRegion,

    #[error("element {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("pair ({first}, {second}): {source}")]
    AtPair {
        first: usize,
        second: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("a curve needs at least two samples, got {0}")]
    CurveTooShort(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at(index: usize, source: Error) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(source),
        }
    }

    /// Strips `AtIndex` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIndex { source, .. } | Error::AtPair { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_cut_locus(&self) -> bool {
        matches!(self.root(), Error::CutLocus { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
