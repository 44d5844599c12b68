use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polynomial coefficients must be finite")]
    DegenerateCoefficients,
    #[error("query point coincides with the ellipse center")]
    AtCenter,
    #[error("line intersects the ellipse")]
    LineIntersectsEllipse,
    #[error("shapes overlap")]
    Penetration,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("invalid ellipse: semi-axes must be positive and finite (a={a}, b={b})")]
    InvalidEllipse { a: f64, b: f64 },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("CLF weight matrix is not symmetric positive definite")]
    NonPositiveDefiniteQ,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("configuration is penetrating; barrier value undefined")]
    Penetration,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
