use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime or the square of one")]
    UnsupportedModulus(u64),
    #[error("{x} is not a unit modulo {modulus}")]
    NotAUnit { x: u64, modulus: u64 },
    #[error("moduli {a} and {b} are not coprime")]
    NotCoprime { a: u64, b: u64 },
    #[error("{omega} is not a primitive element modulo {q}")]
    NotPrimitive { omega: u64, q: u64 },
    #[error("residue {value} out of range for modulus {modulus}")]
    OutOfRange { value: u64, modulus: u64 },
    #[error("pair {{{x}, {y}}} is degenerate modulo {v} (x ≡ ±y)")]
    DegeneratePair { x: u64, y: u64, v: u64 },
    #[error("invalid excluded-set specification: {0}")]
    InvalidSpec(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("input set does not verify: {0}")]
    InvalidInput(String),
    #[error("1+√2 = {theta} does not generate the units modulo {modulus} up to sign")]
    GenerationFails { theta: u64, modulus: u64 },
    #[error("no suitable witness found: {0}")]
    NoWitness(String),
    #[error("no APS({0}) exists for any α, β")]
    NoAps(u64),
    #[error("parameter scan for v = {v} exceeds the cutoff {cutoff}")]
    ScanCutoff { v: u64, cutoff: u64 },
    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("catalog: {0}")]
    Catalog(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
