use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Stage of the bootstrap fit, used to tag propagated errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStage {
    C2Axis,
    QOrientation,
    ZeemanOnly,
    Full,
}

impl fmt::Display for FitStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FitStage::C2Axis => "c2-axis estimate",
            FitStage::QOrientation => "Q orientation estimate",
            FitStage::ZeemanOnly => "Zeeman-only fit",
            FitStage::Full => "full refinement",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("doublet pairing is ambiguous: inter-doublet gap {gap_mhz} MHz is below 10x the intra-doublet splitting {splitting_mhz} MHz")]
    DegeneracyAmbiguous { gap_mhz: f64, splitting_mhz: f64 },

    #[error("quadratic form is ill-conditioned: {0}")]
    IllConditioned(&'static str),

    #[error("found {found} subsite coincidence directions, need at least 2")]
    InsufficientCoincidences { found: usize },

    #[error("scan index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid input: {0}")]
    InvalidInput(&'static str),

    #[error("observation set is empty")]
    EmptyObservations,

    #[error("model evaluation failed: {0}")]
    ModelEvaluationFailed(Box<Error>),

    #[error("normal matrix is singular; unidentifiable parameter combination {null_direction:?}")]
    SingularNormalMatrix { null_direction: Vec<f64> },

    #[error("bootstrap stage `{stage}` failed: {source}")]
    Stage {
        stage: FitStage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(self, stage: FitStage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
