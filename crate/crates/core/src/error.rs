use std::fmt;

use thiserror::Error;

/// Position of a parse error inside its source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    /// Byte offset.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn locate(src: &str, offset: usize) -> Span {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        Span { offset, line, column }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("constant term present")]
    ConstantTerm,
    #[error("fractional power on variable `{0}` which is neither hermitian nor positive")]
    FractionalPowerOnGeneral(String),
    #[error("fractional power of a compound expression")]
    FractionalPowerOfCompound,
    #[error("type error: {0}")]
    Type(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub span: Span,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(src: &str, offset: usize, kind: ParseErrorKind) -> Self {
        ParseError { span: Span::locate(src, offset), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not hermitian: |a - a*| = {defect:e} exceeds {allowed:e}")]
    NotHermitian { defect: f64, allowed: f64 },
    #[error("negative spectrum: eigenvalue {eigenvalue:e} below {allowed:e}")]
    NegativeSpectrum { eigenvalue: f64, allowed: f64 },
    #[error("empty list of matrices")]
    EmptyList,
    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("invalid tolerance {0:e}: must lie in (0, 1e-2]")]
    InvalidTolerance(f64),
    #[error("variable `{0}` is not assigned")]
    Unassigned(String),
    #[error("variable sets differ")]
    VariableSetMismatch,
    #[error("zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("polynomial `{0}` is not homogeneous")]
    NotHomogeneous(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
