use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Numbered conditions of the subsequence selection, used to name infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// `diam(g_{n_k}) <= (1 - a_{k-1}) alpha_d(g_{n_{k-1}}) / 2`
    Diameter,
    /// `n_k vol(g_{n_{k-1}}) >= n_k^{(3+f)/(2+2f)}`
    Volume,
    /// `log n_k >= n_{k-1}` (strict) or `n_k >= 4 n_{k-1}` (relaxed)
    Growth,
    /// At least the configured number of children per parent.
    Branching,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Diameter => "(7) diameter",
            Condition::Volume => "(8) volume",
            Condition::Growth => "(9) growth",
            Condition::Branching => "branching",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("rectangle with edges {inner:?} does not fit inside edges {outer:?}")]
    DoesNotFit { inner: Vec<f64>, outer: Vec<f64> },
    #[error("matrix is not injective (smallest singular value {0:e})")]
    NotInjective(f64),
    #[error("matrix is not contractive (largest singular value {0})")]
    NotContractive(f64),
    #[error("singular value function is >= 1 at n = {n}; raise the window start")]
    NotContractiveYet { n: u64 },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("plan infeasible at level {level}: {} exceeds 2^63", fmt_conditions(.conditions))]
    Infeasible { level: usize, conditions: Vec<Condition> },
    #[error("degenerate plan: level {level} has no children per parent")]
    DegeneratePlan { level: usize },
    #[error("index stream exhausted at n = {0}")]
    StreamExhausted(u64),
    #[error("resolution 2^-{j} in dimension {d} exceeds the memory budget")]
    ResolutionTooFine { j: u32, d: usize },
}

fn fmt_conditions(c: &[Condition]) -> String {
    c.iter().map(|c| c.label()).collect::<Vec<_>>().join(", ")
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
