use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("k^2 + i k sigma lies on the negative real axis (k = {k}, sigma = {sigma})")]
    BranchCut { k: Complex64, sigma: f64 },

    #[error("wrap-around guard tripped at t = {t}: boundary/peak amplitude ratio {ratio:.3e}")]
    WrapAround { t: f64, ratio: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("sweep cell (sigma = {sigma}, K = {k_max}, noise = {noise}, seed = {seed}) failed: {source}")]
    Cell {
        sigma: f64,
        k_max: f64,
        noise: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            what,
            expected,
            got,
        })
    }
}
