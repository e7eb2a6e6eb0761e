use crate::geometry::Point;

/// Errors produced by the simulator, estimators and bounds.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distance {distance} m is below the model reference distance {reference} m")]
    OutOfModelRange { distance: f64, reference: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionError { expected: usize, actual: usize },

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("singular Fisher information (det = {det:e}){}", fmt_theta(.theta))]
    SingularFim { det: f64, theta: Option<Point> },

    #[error("closed-form bound undefined: AP {ap} seen at bearing {bearing_rad} rad from ({}, {})", .theta.x, .theta.y)]
    SingularTerm {
        ap: usize,
        bearing_rad: f64,
        theta: Point,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_theta(theta: &Option<Point>) -> String {
    match theta {
        Some(p) => format!(" at ({}, {})", p.x, p.y),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
