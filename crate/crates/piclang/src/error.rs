use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid picture: {0}")]
    Picture(String),
    #[error("reserved symbol {0:?} in alphabet")]
    ReservedSymbol(String),
    #[error("symbol {0:?} is not in the alphabet")]
    NotInAlphabet(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("invalid tiling system: {0}")]
    Tiling(String),
    #[error("invalid automaton: {0}")]
    Automaton(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("ill-formed sentence: {0}")]
    Sentence(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("outside the supported fragment: {0}")]
    Fragment(String),
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(format!("json: {e}"))
    }
}
