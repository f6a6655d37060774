use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use torelli_core::surface::make_random_general;
use torelli_core::torelli::{roundtrip_with, RoundtripOptions, RoundtripReport};
use torelli_core::Stage;

use super::{RecoveryArgs, SynthArgs};
use crate::error::CliError;
use crate::output::{emit, Report};

/// Generate, synthesize, recover and compare, once per seed.
#[derive(Args)]
pub struct Opts {
    #[arg(long)]
    h: i64,
    /// Explicit seeds; each drives both the surface and the synthesis.
    #[arg(long, value_delimiter = ',', conflicts_with = "trials")]
    seeds: Vec<u64>,
    /// Run seeds `0..k`.
    #[arg(long)]
    trials: Option<u64>,
    /// Add a random matrix to the presentation so the span is no longer rank-one built.
    #[arg(long)]
    corrupt_span: bool,
    /// Include per-stage wall-clock timings (makes the report nondeterministic).
    #[arg(long)]
    timings: bool,
    #[command(flatten)]
    synth: SynthArgs,
    #[command(flatten)]
    recovery: RecoveryArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct Trial {
    seed: u64,
    #[serde(flatten)]
    report: RoundtripReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct Summary {
    h: i64,
    trials: Vec<Trial>,
    passed: usize,
    failed: usize,
    worst_max_chordal: Option<f64>,
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    super::check_genus(o.h)?;
    let opts = RoundtripOptions {
        synth: o.synth.config(true)?,
        recovery: o.recovery.config()?,
        corrupt_span: o.corrupt_span,
    };
    let seeds: Vec<u64> = match o.trials {
        Some(0) => return Err(CliError::Usage("--trials must be positive".into())),
        Some(k) => (0..k).collect(),
        None if o.seeds.is_empty() => vec![0],
        None => o.seeds.clone(),
    };
    let mut trials: Vec<Trial> = seeds
        .par_iter()
        .map(|&seed| run_one(o.h, seed, &opts))
        .collect();
    trials.sort_by_key(|t| t.seed);
    if !o.timings {
        for t in &mut trials {
            t.report.stage_timings_ms.clear();
        }
    }
    for t in &trials {
        if let Some(e) = &t.error {
            eprintln!("seed {}: {e}", t.seed);
        }
    }
    let failed = trials.iter().filter(|t| !t.report.is_ok()).count();
    let summary = Summary {
        h: o.h,
        passed: trials.len() - failed,
        failed,
        worst_max_chordal: trials
            .iter()
            .filter_map(|t| t.report.max_chordal)
            .reduce(f64::max),
        trials,
    };
    emit(&Report::new("roundtrip", summary), o.output.as_ref())?;
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} round trips failed", seeds.len())));
    }
    Ok(())
}

fn run_one(h: i64, seed: u64, opts: &RoundtripOptions) -> Trial {
    let outcome = make_random_general(h, seed)
        .map_err(|e| (e.at(Stage::Surface), BTreeMap::new()))
        .and_then(|s| roundtrip_with(&s, seed, opts));
    match outcome {
        Ok((report, _)) => Trial {
            seed,
            report,
            error: None,
        },
        Err((e, timings)) => {
            let error = match e.stage() {
                Some(stage) => format!("error[{stage}]: {}", source_of(&e)),
                None => format!("error: {e}"),
            };
            Trial {
                seed,
                report: RoundtripReport::failed(&e, timings),
                error: Some(error),
            }
        }
    }
}

fn source_of(e: &torelli_core::Error) -> &torelli_core::Error {
    match e {
        torelli_core::Error::Stage { source, .. } => source,
        other => other,
    }
}
