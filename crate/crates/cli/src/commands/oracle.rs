use std::path::PathBuf;

use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use torelli_core::binform::ProjectivePointP1;
use torelli_core::ivhs::{canonical_point, synthesize_from_points, IvhsPresentation, SynthConfig};
use torelli_core::numlin::CMatrix;
use torelli_core::torelli::{extract_rank_ones, rank_one_oracle_bruteforce, same_factor_set, RecoveryConfig};

use crate::error::CliError;
use crate::output::{emit, Report};

/// Cross-check the extractor against brute-force search on a tiny instance.
#[derive(Args)]
pub struct Opts {
    /// Rows of each tensor (at most 3).
    #[arg(long, default_value_t = 2)]
    h: usize,
    /// Number of rank-one tensors and columns (at most 6).
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also count rank-one elements of a generic subspace of the same size.
    #[arg(long)]
    negative_control: bool,
    /// Agreement tolerance on chordal distances.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct OracleReport {
    h: usize,
    #[serde(rename = "N")]
    n: usize,
    seed: u64,
    extractor_count: usize,
    oracle_count: usize,
    agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    generic_oracle_count: Option<usize>,
}

fn uniform(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    if !(1..=3).contains(&o.h) || !(2..=6).contains(&o.n) {
        return Err(CliError::Usage("the oracle needs 1 <= h <= 3 and 2 <= N <= 6".into()));
    }
    if !(o.tol > 0.0 && o.tol < 1.0) {
        return Err(CliError::Usage("--tol must lie in (0, 1)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let points = (0..o.n)
        .map(|_| {
            let z = uniform(&mut rng) * 2.0;
            canonical_point(&ProjectivePointP1::from_affine(z), o.h)
        })
        .collect();
    let (pres, _) = synthesize_from_points(points, o.seed, &SynthConfig::default())?;
    let extracted = extract_rank_ones(&pres, o.seed.wrapping_add(1), &RecoveryConfig::default())?;
    let brute = rank_one_oracle_bruteforce(&pres)?;
    let agree = same_factor_set(&extracted, &brute, o.tol);
    let generic_oracle_count = if o.negative_control {
        let basis = (0..o.n)
            .map(|_| CMatrix::from_fn(o.h, o.n, |_, _| uniform(&mut rng)))
            .collect();
        let generic = IvhsPresentation::new(o.h, o.n, basis, None)?;
        Some(rank_one_oracle_bruteforce(&generic)?.len())
    } else {
        None
    };
    let report = OracleReport {
        h: o.h,
        n: o.n,
        seed: o.seed,
        extractor_count: extracted.len(),
        oracle_count: brute.len(),
        agree,
        generic_oracle_count,
    };
    emit(&Report::new("oracle", report), o.output.as_ref())?;
    if agree {
        Ok(())
    } else {
        Err(CliError::Failed("extractor and brute-force oracle disagree".into()))
    }
}
