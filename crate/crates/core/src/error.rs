use thiserror::Error;

/// Child-index path from the root to a node, leftmost child = 0.
pub type Path = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("duplicate sort `{0}`")]
    DuplicateSort(String),

    #[error("duplicate constructor `{0}`")]
    DuplicateConstructor(String),

    #[error("reference to undeclared sort `{0}`")]
    UndeclaredSort(String),

    #[error("reserved builtin sort `{0}` cannot be redeclared")]
    ReservedSort(String),

    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),

    #[error("unknown constructor `{0}`")]
    UnknownConstructor(String),

    #[error("arity mismatch at {path:?}: constructor `{con}` expects {expected} children, got {got}")]
    ArityMismatch { path: Path, con: String, expected: usize, got: usize },

    #[error("sort mismatch at {path:?}: expected `{expected}`, got `{got}`")]
    SortMismatch { path: Path, expected: String, got: String },

    #[error("operation requires a zero-capable effect, but the effect kind is total")]
    UnsupportedEffect,

    #[error("effect kind mismatch: {0} vs {1}")]
    KindMismatch(String, String),

    #[error("sort violation: type-specific case for `{tag}` produced a term of sort `{got}`")]
    SortViolation { tag: String, got: String },

    #[error("unknown monoid `{0}`")]
    UnknownMonoid(String),

    #[error("monoid `{name}` cannot combine {lhs} with {rhs}")]
    MonoidTypeError { name: String, lhs: String, rhs: String },

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("rule `{rule}`: {msg}")]
    InvalidRule { rule: String, msg: String },

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("flavor mismatch: {0}")]
    FlavorMismatch(String),

    #[error("type error in template evaluation: {0}")]
    TemplateType(String),

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
