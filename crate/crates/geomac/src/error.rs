use crate::spatial::Point2;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("extent {extent} is smaller than the grid spacing {d}")]
    DegenerateExtent { extent: f64, d: f64 },

    #[error("evaluation point coincides with a transmitter")]
    Singularity,

    #[error("no interferers: SIR is infinite")]
    InfiniteSir,

    #[error("moment E[F^{s}] diverges for this fading model")]
    DivergentMoment { s: f64 },

    #[error("lattice sum diverges for alpha = {alpha} (need alpha > 2)")]
    DivergentSum { alpha: f64 },

    #[error("{0} is not supported for this fading model")]
    Unsupported(String),

    #[error("no SIR crossing within the extent: reception area is unbounded along this ray")]
    Unbounded,

    #[error("contour did not close within {steps} steps")]
    NonClosure { steps: usize, partial: Vec<Point2> },

    #[error("SIR gradient vanished at ({x}, {y})")]
    StationaryPoint { x: f64, y: f64 },

    #[error("series lost precision: largest term is {condition:.3e} times the sum")]
    PrecisionLoss { condition: f64 },

    #[error("series did not converge within {terms} terms")]
    SeriesTruncated { terms: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
