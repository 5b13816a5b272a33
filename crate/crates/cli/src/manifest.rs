use serde::Serialize;

use quadflow::{
    classify, corner_constants, ClassificationTag, Coefficients, CornerConstants, Direction,
    IntegratorConfig,
};

/// Everything needed to reproduce an emitted artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub coefficients: Coefficients,
    pub classification: ClassificationTag,
    pub direction: Option<Direction>,
    pub direction_overridden: bool,
    pub corner_constants: Option<CornerConstants>,
    pub config: IntegratorConfig,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        coeffs: &Coefficients,
        direction: Option<&Direction>,
        direction_overridden: bool,
        config: &IntegratorConfig,
        seed: u64,
    ) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            coefficients: *coeffs,
            classification: classify(coeffs).tag(),
            direction: direction.copied(),
            direction_overridden,
            corner_constants: direction.and_then(|d| corner_constants(coeffs, d).ok()),
            config: *config,
            seed,
        }
    }
}
