use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("m(0,0) = {m00} is not above the zero-intensity threshold")]
    M00NonPositive { m00: f64 },

    #[error("diattenuation vector magnitude {magnitude} exceeds 1")]
    DOutOfRange { magnitude: f64 },

    #[error("input contains NaN or infinite entries")]
    NonFinite,

    #[error("coherency matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("cube carries element mask {mask:#06x}; numeric decomposition needs the full matrix")]
    MaskedInput { mask: u16 },

    #[error("pixel with status {0} has no reconstruction")]
    DegenerateNoReconstruction(&'static str),

    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { found: [u8; 4], expected: [u8; 4] },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("malformed header: {0}")]
    BadHeader(String),

    #[error("file truncated: need {needed} bytes, have {available}")]
    TruncatedFile { needed: u64, available: u64 },

    #[error("declared dimensions overflow the addressable payload size")]
    DimOverflow,

    #[error("{extra} unexpected trailing bytes after payload")]
    TrailingData { extra: u64 },

    #[error("missing {kind} plane for wavelength {wavelength} nm")]
    MissingPlane { kind: &'static str, wavelength: String },

    #[error("no such file or directory: {0}")]
    BadPath(String),

    #[error("need at least 3 specimens for nested cross-validation, got {0}")]
    TooFewSpecimens(usize),

    #[error("fraction {0} is outside (0, 1]")]
    InvalidFraction(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used by the CLI and host-language bindings.
    pub fn name(&self) -> &'static str {
        match self {
            Error::M00NonPositive { .. } => "M00NonPositive",
            Error::DOutOfRange { .. } => "DOutOfRange",
            Error::NonFinite => "NonFinite",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::MaskedInput { .. } => "MaskedInput",
            Error::DegenerateNoReconstruction(_) => "DegenerateNoReconstruction",
            Error::BadMagic { .. } => "BadMagic",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::BadHeader(_) => "BadHeader",
            Error::TruncatedFile { .. } => "TruncatedFile",
            Error::DimOverflow => "DimOverflow",
            Error::TrailingData { .. } => "TrailingData",
            Error::MissingPlane { .. } => "MissingPlane",
            Error::BadPath(_) => "BadPath",
            Error::TooFewSpecimens(_) => "TooFewSpecimens",
            Error::InvalidFraction(_) => "InvalidFraction",
            Error::EmptyInput(_) => "EmptyInput",
            Error::Io(_) => "Io",
        }
    }
}
