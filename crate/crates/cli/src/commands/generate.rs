use std::path::PathBuf;

use clap::Args;
use torelli_core::series::parse_rational;
use torelli_core::surface::{make_random_general, make_with_i2};

use crate::error::CliError;
use crate::output::emit;

/// Generate a random Weierstrass surface over P^1.
#[derive(Args)]
pub struct Opts {
    /// Geometric genus; deg L = h + 1.
    #[arg(long)]
    h: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rational points forced to carry I2 fibers, e.g. `0,1/2,-3`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    i2: Vec<String>,
    /// Write the surface here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    super::check_genus(o.h)?;
    let points = o
        .i2
        .iter()
        .map(|s| parse_rational(s.trim()).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let surface = if points.is_empty() {
        make_random_general(o.h, o.seed)?
    } else {
        make_with_i2(o.h, &points, o.seed)?
    };
    emit(&surface.to_json(), o.output.as_ref())
}
