use thiserror::Error;

/// Errors raised by framework construction and the certification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix or configuration contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error(
        "configuration does not have a full {dimension}-dimensional affine span (rank {rank})"
    )]
    DegenerateConfiguration { dimension: usize, rank: usize },

    #[error("adjacent vertices {0} and {1} coincide")]
    CoincidentVertices(usize, usize),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("point does not lie on the quadric (value {value:e})")]
    NotOnQuadric { value: f64 },

    #[error("flex parameter t = {t} leaves the range where I + tQ is positive definite")]
    FlexOutOfRange { t: f64 },

    #[error("slide scale for vertex {0} is zero")]
    ZeroSlideScale(usize),

    #[error("cone height must be nonzero")]
    ZeroConeHeight,

    #[error("hyperplane contains the cone apex")]
    ApexOnHyperplane,

    #[error("ray from the apex to vertex {0} is parallel to the hyperplane")]
    ParallelRay(usize),

    #[error("not a cone framework: {0}")]
    NotCone(String),

    #[error("cone framework is not flat")]
    NotFlat,

    #[error("matrix is not an equilibrium stress (relative residual {residual:e})")]
    NotEquilibrium { residual: f64 },

    #[error("matrix is not supported on the graph: entry ({0}, {1}) is nonzero on a non-edge")]
    NotGraphSupported(usize, usize),

    #[error("apex row of the stress is not zero (max entry {max_entry:e})")]
    ApexRowNonzero { max_entry: f64 },

    #[error("projective transform is singular")]
    SingularTransform,

    #[error("projective transform sends vertex {0} to infinity")]
    VertexAtInfinity(usize),

    #[error("kernel of the matrix does not contain the all-ones vector")]
    OnesNotInKernel,

    #[error("stress rank {rank} on {n} vertices is not n - d - 1 for any d >= 1")]
    RankInconsistent { rank: usize, n: usize },

    #[error("expected {expected} weights, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("unknown gallery generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
