use thiserror::Error;

/// Errors raised by the arithmetic, character, coefficient and twist modules.
///
/// Variant names double as the error tags printed by the command-line tool.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("NotSquarefree: {0} is not squarefree")]
    NotSquarefree(i64),
    #[error("NarrowClassNumberNotOne: Q(sqrt {0}) is not in the narrow class number one set")]
    NarrowClassNumberNotOne(i64),
    #[error("NormTooLarge: norm {norm} exceeds bound {bound}")]
    NormTooLarge { norm: i128, bound: i128 },
    #[error("MixedFields: operands live in Q(sqrt {0}) and Q(sqrt {1})")]
    MixedFields(i64, i64),
    #[error("PNotPrime: {0} is not a prime ideal")]
    PNotPrime(String),
    #[error("ZeroIdeal: the zero ideal has no generator")]
    ZeroIdeal,
    #[error("NotIntegral: {0}")]
    NotIntegral(String),
    #[error("ModuliNotCoprime: {0} and {1} are not coprime")]
    ModuliNotCoprime(String, String),
    #[error("NotCoprime: {0} and {1} are not coprime")]
    NotCoprime(String, String),
    #[error("ModulusMismatch: expected modulus {expected}, found {found}")]
    ModulusMismatch { expected: String, found: String },
    #[error("NotExtendable: character is nontrivial on the totally positive units")]
    NotExtendable,
    #[error("EnumerationTooLarge: {0} residues exceed the enumeration bound")]
    EnumerationTooLarge(i128),
    #[error("NonPrimaryConductor: conductor {0} is not a prime power")]
    NonPrimaryConductor(String),
    #[error("InsufficientTruncation: need norm bound {needed}, have {have}")]
    InsufficientTruncation { needed: u64, have: u64 },
    #[error("MissingEigenvalue: no eigenvalue recorded at {0}")]
    MissingEigenvalue(String),
    #[error("ConductorDoesNotDivideLevel: conductor {conductor} does not divide level {level}")]
    ConductorDoesNotDivideLevel { conductor: String, level: String },
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("WrongRegime: {0}")]
    WrongRegime(String),
    #[error("PNotDividingLevel: {p} does not divide {level}")]
    PNotDividingLevel { p: String, level: String },
    #[error("Parse: {0}")]
    Parse(String),
}

impl Error {
    /// The variant name, used as the error tag on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotSquarefree(_) => "NotSquarefree",
            Error::NarrowClassNumberNotOne(_) => "NarrowClassNumberNotOne",
            Error::NormTooLarge { .. } => "NormTooLarge",
            Error::MixedFields(..) => "MixedFields",
            Error::PNotPrime(_) => "PNotPrime",
            Error::ZeroIdeal => "ZeroIdeal",
            Error::NotIntegral(_) => "NotIntegral",
            Error::ModuliNotCoprime(..) => "ModuliNotCoprime",
            Error::NotCoprime(..) => "NotCoprime",
            Error::ModulusMismatch { .. } => "ModulusMismatch",
            Error::NotExtendable => "NotExtendable",
            Error::EnumerationTooLarge(_) => "EnumerationTooLarge",
            Error::NonPrimaryConductor(_) => "NonPrimaryConductor",
            Error::InsufficientTruncation { .. } => "InsufficientTruncation",
            Error::MissingEigenvalue(_) => "MissingEigenvalue",
            Error::ConductorDoesNotDivideLevel { .. } => "ConductorDoesNotDivideLevel",
            Error::InvalidInput(_) => "InvalidInput",
            Error::WrongRegime(_) => "WrongRegime",
            Error::PNotDividingLevel { .. } => "PNotDividingLevel",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
