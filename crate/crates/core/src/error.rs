use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid size {n_theta}x{n_phi} (need n_theta >= 2, n_phi >= 4)")]
    InvalidGrid { n_theta: usize, n_phi: usize },

    #[error("expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("function has grid samples only and no evaluation rule")]
    NotEvaluable,

    #[error("grid {n_theta}x{n_phi} too coarse for band limit {band}")]
    GridTooCoarse { n_theta: usize, n_phi: usize, band: usize },

    #[error("odd-degree content {fraction:e} of total norm exceeds tolerance")]
    OddContent { fraction: f64 },

    #[error("multiplier at degree {degree} is {value:e}, below the inversion floor")]
    MultiplierFloor { degree: usize, value: f64 },

    #[error("band limit {band} exceeds the inversion ceiling {ceiling}")]
    BandTooHigh { band: usize, ceiling: usize },

    #[error("caps too close: separation {separation} < required {required}")]
    CapsTooClose { separation: f64, required: f64 },

    #[error("cap overlaps its antipode (angular radius {radius} rad)")]
    CapOverlapsAntipode { radius: f64 },

    #[error("rotation does not fix the symmetry axis (defect {defect:e})")]
    RotationNotAxial { defect: f64 },

    #[error("axis does not match the grid ring axis")]
    AxisMismatch,

    #[error("density is negative ({min:e}) after even symmetrization")]
    NegativeDensity { min: f64 },

    #[error("support certificate failed: min radius {min_eig:e}, max radius {max_eig:e}")]
    NotConvex { min_eig: f64, max_eig: f64 },

    #[error("degenerate radii of curvature at u (r1 = {r1:e})")]
    DegenerateRadii { r1: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("source body is a cylinder on the cap band")]
    Cylinder,

    #[error("cap must be centred on e3 and strictly inside the upper hemisphere")]
    CapNotAdmissible,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
