use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("unknown odd parameter `{0}`")]
    UnknownOddParam(String),
    #[error("invalid ring signature: {0}")]
    InvalidSignature(String),
    #[error("clifford algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("operation requires a complex algebra")]
    RealField,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("clifford relations violated (residual {residual:.3e})")]
    CliffordRelations { residual: f64 },
    #[error("operator is not clifford-linear (commutator norm {residual:.3e})")]
    NotCliffordLinear { residual: f64 },
    #[error("operator is not self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("eigensolver failure: {0}")]
    Eigen(String),
    #[error("semigroup representation is not the identity at the origin (residual {residual:.3e})")]
    NotUnital { residual: f64 },
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("cover failure: {0}")]
    Cover(String),
    #[error("no smooth cutoff at lambda = {lambda}: {reason}")]
    NoSmoothCutoff { lambda: f64, reason: String },
    #[error("spectral margin violated: {0}")]
    Margin(String),
    #[error("cocycle validation failed: {0}")]
    Cocycle(String),
    #[error("class mismatch: {0}")]
    ClassMismatch(String),
    #[error("size guard: {0}")]
    SizeGuard(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }
}
