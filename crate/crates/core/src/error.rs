use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("delta derivative order {0} is not one of 0, 1, 2")]
    InvalidOrder(u32),

    #[error("width must be strictly positive, got {0}")]
    NonPositiveWidth(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("negative count at line {line}, column {column}")]
    NegativeCount { line: usize, column: usize },

    #[error("record has no non-discarded pulses")]
    EmptyRecord,

    #[error("incomplete grid, missing (alpha_deg, beta_deg) nodes: {}", format_nodes(.missing))]
    IncompleteGrid { missing: Vec<(f64, f64)> },

    #[error("non-uniform grid: {0}")]
    NonUniformGrid(String),

    #[error("point with beta = {beta} lies outside the upper hemisphere")]
    OutsideDomain { beta: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("singular probe: {0}")]
    SingularProbe(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_nodes(nodes: &[(f64, f64)]) -> String {
    let shown: Vec<String> = nodes
        .iter()
        .take(20)
        .map(|(a, b)| format!("({a}, {b})"))
        .collect();
    let mut out = shown.join(", ");
    if nodes.len() > 20 {
        out.push_str(&format!(" and {} more", nodes.len() - 20));
    }
    out
}
