use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use torelli_core::ivhs::{GroundTruth, IvhsJson, IvhsPresentation, TruthJson};
use torelli_core::torelli::{extract_rank_ones, match_points, recover_geometry, GeometryJson};
use torelli_core::Stage;

use super::RecoveryArgs;
use crate::error::CliError;
use crate::output::{emit, read_json};

/// Recover the ramification points and the canonical curve from a presentation.
#[derive(Args)]
pub struct Opts {
    /// Presentation JSON as written by `ivhs`.
    presentation: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ground truth from `ivhs --emit-truth`; adds a matching summary.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    recovery: RecoveryArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct MatchSummary {
    max_chordal: f64,
    mean_chordal: f64,
}

#[derive(Serialize)]
struct Recovered {
    #[serde(flatten)]
    geometry: GeometryJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    matching: Option<MatchSummary>,
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    let cfg = o.recovery.config()?;
    let json: IvhsJson = read_json(&o.presentation)?;
    let pres = IvhsPresentation::from_json(&json)?;
    let truth = match &o.truth {
        Some(p) => Some(GroundTruth::from_json(&read_json::<TruthJson>(p)?)?),
        None => None,
    };
    let factors = extract_rank_ones(&pres, o.seed, &cfg).map_err(|e| e.at(Stage::Extract))?;
    let geom = recover_geometry(&factors, pres.h, &cfg).map_err(|e| e.at(Stage::Recover))?;
    let matching = match truth {
        Some(t) => {
            let true_points: Vec<_> = t.points.iter().map(|p| p.x.clone()).collect();
            let m = match_points(&geom.z_points, &true_points).map_err(|e| e.at(Stage::Match))?;
            Some(MatchSummary {
                max_chordal: m.max_chordal,
                mean_chordal: m.mean_chordal,
            })
        }
        None => None,
    };
    emit(
        &Recovered {
            geometry: geom.to_json(),
            matching,
        },
        o.output.as_ref(),
    )
}
