use std::path::PathBuf;

use clap::Args;
use torelli_core::ivhs::synthesize;
use torelli_core::surface::{SurfaceJson, WeierstrassSurface};
use torelli_core::{Error, Stage};

use super::SynthArgs;
use crate::error::CliError;
use crate::output::{emit, read_json};

/// Synthesize a presentation of the infinitesimal period data of a general surface.
#[derive(Args)]
pub struct Opts {
    surface: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the hidden ground truth (points, weights, frames) to this file.
    #[arg(long)]
    emit_truth: Option<PathBuf>,
    /// Leave the Gram matrix out of the presentation.
    #[arg(long)]
    no_gram: bool,
    #[command(flatten)]
    synth: SynthArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    let cfg = o.synth.config(!o.no_gram)?;
    let json: SurfaceJson = read_json(&o.surface)?;
    let s = WeierstrassSurface::from_json(&json).map_err(|e| e.at(Stage::Surface))?;
    let (pres, truth) = synthesize(&s, o.seed, &cfg).map_err(|e: Error| e.at(Stage::Synthesize))?;
    if let Some(path) = &o.emit_truth {
        emit(&truth.to_json(), Some(path))?;
    }
    emit(&pres.to_json(), o.output.as_ref())
}
