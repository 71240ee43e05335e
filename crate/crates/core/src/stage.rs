//! Stream/stage indexing and detector selection shared by the analytic and
//! Monte Carlo sides.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("stage {stage} is outside 1..={n_tx}")]
pub struct StageError {
    pub stage: usize,
    pub n_tx: usize,
}

/// 1-based SIC stage. Stage 1 is the Rician stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StageIndex(usize);

impl StageIndex {
    pub const FIRST: StageIndex = StageIndex(1);

    pub fn new(stage: usize, n_tx: usize) -> Result<Self, StageError> {
        if stage == 0 || stage > n_tx {
            return Err(StageError { stage, n_tx });
        }
        Ok(Self(stage))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn is_rician(self) -> bool {
        self.0 == 1
    }

    /// All stages 1..=n_tx.
    pub fn all(n_tx: usize) -> impl Iterator<Item = StageIndex> {
        (1..=n_tx).map(StageIndex)
    }
}

impl fmt::Display for StageIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    /// Plain ZF: every stream sees all M columns.
    Zf,
    /// ZF with genie-aided SIC: stage i sees columns i..M.
    ZfSic,
}

impl Detector {
    /// Chi-square order (complex DoF) of stream `stage`.
    pub fn dof(self, n_rx: usize, n_tx: usize, stage: StageIndex) -> usize {
        match self {
            Detector::Zf => n_rx - n_tx + 1,
            Detector::ZfSic => n_rx - n_tx + stage.get(),
        }
    }

    /// Index of the first channel column still present at `stage` (0-based).
    pub fn first_column(self, stage: StageIndex) -> usize {
        match self {
            Detector::Zf => 0,
            Detector::ZfSic => stage.get() - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnrModel {
    /// 1/(κ_T² + ψ_exact [(HᴴH)⁻¹]_des) on the true channel.
    Statistic,
    /// Exact post-filter SINR with the filter built from Ĥ.
    FullSystem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectionMode {
    pub detector: Detector,
    pub snr_model: SnrModel,
}

impl DetectionMode {
    pub const fn new(detector: Detector, snr_model: SnrModel) -> Self {
        Self { detector, snr_model }
    }
}
