use thiserror::Error;

/// Every failure the solver can report.  Input errors are distinguished from
/// numerical ones by [`Error::is_input`], which drives the CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("potential is not a spiked oscillator: {0}")]
    NotSpiked(String),
    #[error("no admissible z = r^(1/k) transform: {0}")]
    NonIntegrizable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("circuit-matrix integration diverged: {0}")]
    IntegrationDiverged(String),
    #[error(
        "Floquet indices are degenerate (nu1 = {nu1}, nu2 = {nu2}): at a critical coupling the two indices \
         merge (for V = r^2 + A r^-4 both take the value 0.5 for A = 0.1305..., E = 3.6454...) and the second \
         solution becomes logarithmic, which is not supported; move the coupling or the energy bracket off \
         the critical point"
    )]
    DegenerateIndices { nu1: String, nu2: String },
    #[error("truncated recurrence matrix is singular: {0}")]
    SingularTruncation(String),
    #[error("{what} did not converge (last residual {residual:e})")]
    NoConvergence { what: String, residual: f64 },
    #[error("Floquet window too small: {0}")]
    InsufficientWindow(String),
    #[error("Wronskian extraction unstable: {0}")]
    ExtractionUnstable(String),
    #[error("quantization residual has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("physical coefficients inconsistent (relative residual {0:e})")]
    InconsistentSystem(f64),
    #[error("no representation accurate at z = {0}")]
    RegionGap(f64),
    #[error("normalization quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("shooting integration failed: {0}")]
    StiffnessFailure(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the problem description rather than the numerics.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::NotSpiked(_) | Error::NonIntegrizable(_) | Error::Parse(_) | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
