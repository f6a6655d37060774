use clap::Args;
use torelli_core::ivhs::SynthConfig;
use torelli_core::torelli::RecoveryConfig;

use crate::error::CliError;

pub mod analyze;
pub mod generate;
pub mod ivhs;
pub mod oracle;
pub mod plumb;
pub mod recover;
pub mod roundtrip;

/// Tolerances for rank-one extraction and quadric recovery.
#[derive(Args, Clone, Debug)]
pub struct RecoveryArgs {
    /// Minimum slice confidence `1 - s2/s1` for an extracted factor.
    #[arg(long, default_value_t = 0.999)]
    pub confidence: f64,
    /// Relative singular-value cut for numerical rank decisions.
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    /// Chordal distance below which recovered and true points match.
    #[arg(long, default_value_t = 1e-6)]
    pub match_threshold: f64,
    /// Random restarts of the simultaneous diagonalization.
    #[arg(long, default_value_t = 10)]
    pub max_retries: usize,
}

impl RecoveryArgs {
    pub fn config(&self) -> Result<RecoveryConfig, CliError> {
        let cfg = RecoveryConfig {
            confidence: self.confidence,
            rel_tol: self.rel_tol,
            match_threshold: self.match_threshold,
            max_retries: self.max_retries,
            ..RecoveryConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Shape of the synthetic period data.
#[derive(Args, Clone, Debug)]
pub struct SynthArgs {
    /// Smallest modulus of the rank-one weights.
    #[arg(long, default_value_t = 0.1)]
    pub lambda_min: f64,
    /// Largest modulus of the rank-one weights.
    #[arg(long, default_value_t = 10.0)]
    pub lambda_max: f64,
    /// Upper bound on the condition number of the basis mixer.
    #[arg(long, default_value_t = 100.0)]
    pub mixer_cond: f64,
}

impl SynthArgs {
    pub fn config(&self, with_gram: bool) -> Result<SynthConfig, CliError> {
        let cfg = SynthConfig {
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            mixer_cond: self.mixer_cond,
            with_gram,
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Rejects genera outside the supported range before any work is done.
pub fn check_genus(h: i64) -> Result<(), CliError> {
    torelli_core::surface::check_gate(h, 0).map_err(|e| CliError::Usage(e.to_string()))
}
