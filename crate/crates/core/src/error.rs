//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- mesh file parsing ---
    #[error("unsupported msh version {0} (only ASCII 4.1 is supported)")]
    UnsupportedVersion(String),
    #[error("binary msh files are not supported")]
    BinaryNotSupported,
    #[error("malformed ${section} section: {detail}")]
    MalformedSection { section: String, detail: String },
    #[error("unsupported element type code {0}")]
    UnsupportedElementType(i32),
    #[error("duplicate node id {0}")]
    DuplicateNodeId(u64),
    #[error("element type {code} does not match degree {degree}")]
    DegreeMismatch { code: i32, degree: usize },
    #[error("mesh mixes element orders (type codes {0} and {1})")]
    MixedDegrees(i32, i32),

    // --- reference elements / quadrature ---
    #[error("unsupported polynomial degree {0} (supported: 1..=4)")]
    UnsupportedDegree(usize),
    #[error("quadrature degree {0} exceeds the implemented range (max {1})")]
    DegreeTooHigh(usize, usize),

    // --- geometry ---
    #[error("degenerate element {0} (|det B| = {1:.3e})")]
    DegenerateElement(usize, f64),
    #[error("element {0} has negative orientation (det B = {1:.3e})")]
    NegativeOrientation(usize, f64),
    #[error("non-conformal mesh: face {0:?} shared by more than two tetrahedra")]
    NonConformal([usize; 3]),
    #[error("unknown physical group \"{0}\"")]
    UnknownGroup(String),

    // --- expressions ---
    #[error("syntax error at byte {offset}: {detail}")]
    SyntaxError { offset: usize, detail: String },
    #[error("unknown identifier \"{name}\" at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("non-finite value from expression \"{expr}\" at ({x}, {y}, {z})")]
    NonFiniteValue {
        expr: String,
        x: f64,
        y: f64,
        z: f64,
    },

    // --- linear algebra / solving ---
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular system detected at pivot {0}")]
    SingularSystem(usize),
    #[error("bicgstab breakdown (rho = {0:.3e})")]
    BreakdownDetected(f64),

    // --- postprocessing ---
    #[error("point {index} at ({x}, {y}, {z}) lies outside the mesh")]
    UnlocatedPoint {
        index: usize,
        x: f64,
        y: f64,
        z: f64,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    // --- configuration ---
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Exit code the CLI maps this error to (config errors are 2, the rest 1).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
