use thiserror::Error;

#[derive(Debug, Error)]
pub enum NcError {
    #[error("invalid word: letter {letter} not in 1..={d}")]
    InvalidWord { letter: usize, d: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("letter {k} out of range for d = {d}")]
    LetterOutOfRange { k: usize, d: usize },
    #[error("degree {degree} exceeds window degree {max}")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("no factorization: range containment fails with residual {residual:e}")]
    NoFactorization { residual: f64 },
    #[error("window overflow: {0}; enlarge N")]
    WindowOverflow(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not contractive: norm {norm}")]
    NotContractive { norm: f64 },
    #[error("impure row contraction: purity residual {residual:e}")]
    Impure { residual: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NcError>;
