use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("field order {0} is not a prime below 256")]
    NotPrime(u32),

    #[error("ambient dimension must be at least 1")]
    ZeroDimension,

    #[error("the zero vector does not span a point")]
    ZeroVector,

    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("entry {value} is not an element of GF({q})")]
    EntryOutOfRange { value: u32, q: u32 },

    #[error("objects live in different spaces: GF({q1})^{v1} vs GF({q2})^{v2}")]
    SpaceMismatch {
        q1: u32,
        v1: usize,
        q2: u32,
        v2: usize,
    },

    #[error("subspace dimension {r} out of range 0..={v}")]
    DimensionOutOfRange { r: usize, v: usize },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(&'static str),

    #[error("generator {index} is not invertible over GF({q})")]
    SingularGenerator { index: usize, q: u32 },

    #[error("generator {index} is not a {v}x{v} matrix")]
    GeneratorShape { index: usize, v: usize },

    #[error("group order exceeds the cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("{count} subspaces exceed the enumeration limit of {limit}")]
    EnumerationLimit { count: u128, limit: u128 },

    #[error("operation requires q = 2, got q = {0}")]
    RequiresBinaryField(u32),

    #[error(
        "sigma[{l}][{r}][{s}] depends on the representative ({first} vs {second}); \
         the partition is not group-induced"
    )]
    SigmaMismatch {
        l: usize,
        r: usize,
        s: usize,
        first: u64,
        second: u64,
    },

    #[error("inconsistent sigma table: negative cap coefficient {coefficient} at ({l},{r},{s})")]
    InconsistentSigma {
        l: usize,
        r: usize,
        s: usize,
        coefficient: i128,
    },

    #[error("invalid design parameters: {0}")]
    InvalidParams(String),

    #[error(
        "inadmissible parameters: lambda1 = {lambda1_num}/{lambda1_den}, b = {b_num}/{b_den} \
         (remainders {lambda1_remainder} and {b_remainder})"
    )]
    Inadmissible {
        lambda1_num: u128,
        lambda1_den: u128,
        lambda1_remainder: u128,
        b_num: u128,
        b_den: u128,
        b_remainder: u128,
    },

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("malformed tactical matrix: {0}")]
    MalformedMatrix(String),

    #[error("triple sum at ({l},{r},{s}) is not an integer")]
    NonIntegralTripleSum { l: usize, r: usize, s: usize },

    #[error("the group does not preserve the block set (generator {generator})")]
    NotAnAutomorphism { generator: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),
}

pub type Result<T> = std::result::Result<T, Error>;
