use thiserror::Error;

/// Errors raised by the group-theoretic layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("letter {letter} out of range for alphabet of rank {rank}")]
    LetterOutOfRange { letter: i32, rank: u32 },
    #[error("identity input not allowed")]
    IdentityInput,
    #[error("alphabet mismatch: expected rank {expected}, got {got}")]
    AlphabetMismatch { expected: u32, got: u32 },
    #[error("arity mismatch: expected {expected} components, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("homomorphism is not surjective: {0}")]
    NotSurjective(String),
    #[error("homomorphism target mismatch: {0}")]
    TargetMismatch(String),
    #[error("source group is not free abelian")]
    NonFreeSource,
    #[error("coset table is incomplete at coset {coset}, letter {letter}")]
    IncompleteTable { coset: usize, letter: u32 },
    #[error("group order {order} exceeds configured bound {bound}")]
    OrderBound { order: usize, bound: usize },
    #[error("element lies outside the subgroup")]
    OutsideSubgroup,
    #[error("{0}")]
    Invalid(String),
}
