use thiserror::Error;

/// Every failure the engine can surface. Variants are grouped by the exit
/// code the command line front end maps them to.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    // input / hypothesis violations
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("subset is not a normal subgroup")]
    NotNormal,
    #[error("bad syllable: {0}")]
    BadSyllable(String),
    #[error("cartesian computations need finite factors")]
    InfiniteFactor,
    #[error("word is not in the cartesian subgroup")]
    NotInCartesian,
    #[error("trivial target")]
    TrivialTarget,
    #[error("word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("word is a factor element")]
    FactorElement,
    #[error("conflicting surgery marks: {0}")]
    ConflictingMarks(String),
    #[error("targets {0} and {1} are conjugate up to inversion")]
    ConjugatePair(usize, usize),
    #[error("both factors have nontrivial elements of order {0}")]
    SharedFactorOrder(u64),
    #[error("empty target list")]
    EmptyTargets,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no factor homomorphism found: {0}")]
    NoFactorHom(String),

    // budgets
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("search budget exceeded (seed {seed}, {attempts} attempts)")]
    SearchBudgetExceeded { seed: u64, attempts: usize },
    #[error("iteration budget exceeded after {0} surgeries")]
    IterationBudgetExceeded(usize),
    #[error("modulus budget exceeded at {0}")]
    ModulusBudgetExceeded(u64),
    #[error("repair budget exceeded after {0} rounds")]
    RepairBudgetExceeded(usize),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    // defects
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotAGroup(_) => "NotAGroup",
            Error::NotNormal => "NotNormal",
            Error::BadSyllable(_) => "BadSyllable",
            Error::InfiniteFactor => "InfiniteFactor",
            Error::NotInCartesian => "NotInCartesian",
            Error::TrivialTarget => "TrivialTarget",
            Error::NotCyclicallyReduced => "NotCyclicallyReduced",
            Error::FactorElement => "FactorElement",
            Error::ConflictingMarks(_) => "ConflictingMarks",
            Error::ConjugatePair(..) => "ConjugatePair",
            Error::SharedFactorOrder(_) => "SharedFactorOrder",
            Error::EmptyTargets => "EmptyTargets",
            Error::Precondition(_) => "Precondition",
            Error::NoFactorHom(_) => "NoFactorHom",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::SearchBudgetExceeded { .. } => "SearchBudgetExceeded",
            Error::IterationBudgetExceeded(_) => "IterationBudgetExceeded",
            Error::ModulusBudgetExceeded(_) => "ModulusBudgetExceeded",
            Error::RepairBudgetExceeded(_) => "RepairBudgetExceeded",
            Error::Overflow(_) => "Overflow",
            Error::PostconditionFailed(_) => "PostconditionFailed",
            Error::Internal(_) => "InternalError",
            Error::VerificationFailed(_) => "VerificationFailed",
            Error::Parse(_) => "ParseError",
        }
    }

    /// Process exit code: 2 hypothesis, 3 budget, 4 defect, 5 parse.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded(_)
            | Error::SearchBudgetExceeded { .. }
            | Error::IterationBudgetExceeded(_)
            | Error::ModulusBudgetExceeded(_)
            | Error::RepairBudgetExceeded(_)
            | Error::Overflow(_) => 3,
            Error::PostconditionFailed(_) | Error::Internal(_) | Error::VerificationFailed(_) => 4,
            Error::Parse(_) => 5,
            _ => 2,
        }
    }

    /// Budget-type failures that a fresh seed or prime may get around.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded(_)
                | Error::SearchBudgetExceeded { .. }
                | Error::IterationBudgetExceeded(_)
                | Error::PostconditionFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
