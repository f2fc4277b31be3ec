use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error in {context} at {line}:{column}: {message}")]
    Parse {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("exact perfection certification needs exactly 2 players, got {0}")]
    PlayerCountUnsupported(usize),
    #[error("best-response iteration did not converge (residual {residual})")]
    NonConvergence { residual: Rational },
    #[error("set {set} is not decided by the base {base}")]
    UndeterminedByBase { set: String, base: String },
    #[error("map is not measurable here: {0}")]
    NonMeasurableMap(String),
    #[error("no approximant reaches tolerance {tol}")]
    NoApproximant { tol: Rational },
    #[error("inconclusive at tolerance {tol}: {detail}")]
    Inconclusive { tol: Rational, detail: String },
    #[error("player {player} has infinitely many actions and the game supplies no tail bound")]
    MissingTailBound { player: usize },
    #[error("invalid best-response list: {0}")]
    InvalidK(String),
    #[error("charge is not diffuse (countably additive mass {0})")]
    NotDiffuse(Rational),
    #[error("mass {0} is outside the open interval (0,1)")]
    MassOutOfRange(Rational),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("cannot certify: {0}")]
    UncertifiableInput(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn parse(context: &str, src: &str, offset: usize, message: impl Into<String>) -> Self {
        let upto = &src[..offset.min(src.len())];
        let line = upto.matches('\n').count() + 1;
        let column = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Parse {
            context: context.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }
}
