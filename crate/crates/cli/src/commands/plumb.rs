use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use torelli_core::plumb::{
    check_closed_forms, check_leading_term, check_residue_law, residue_coefficient, residue_pair,
    verify_random, JetCoefficients, PlumbJson, ResidueAudit, DEFAULT_MAX_ORDER,
};
use torelli_core::series::format_rational;

use crate::error::CliError;
use crate::output::{emit, read_json, Report};

/// Exact check of the plumbing residue identities.
#[derive(Args)]
pub struct Opts {
    /// Highest total degree m + n of the local coefficients (an input file's own
    /// `max_order` takes precedence).
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    order: u32,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check one coefficient set from JSON instead of random ones.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

const MAX_ORDER: u32 = 12;

#[derive(Serialize)]
struct SingleCheck {
    order: u32,
    closed_forms: bool,
    leading_term: bool,
    residue_law: bool,
    omega_at_point: String,
    residue: ResidueAudit,
    all_passed: bool,
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    if o.order > MAX_ORDER {
        return Err(CliError::Usage(format!("--order must be at most {MAX_ORDER}")));
    }
    let all_passed = match &o.input {
        Some(path) => {
            let mut json: PlumbJson = read_json(path)?;
            json.max_order.get_or_insert(o.order);
            let b = JetCoefficients::from_json(&json)?;
            let check = single(&b)?;
            let ok = check.all_passed;
            emit(&Report::new("plumb-verify", check), o.output.as_ref())?;
            ok
        }
        None => {
            if o.trials == 0 {
                return Err(CliError::Usage("--trials must be positive".into()));
            }
            let report = verify_random(o.order, o.trials, o.seed)?;
            let ok = report.all_passed;
            emit(&Report::new("plumb-verify", report), o.output.as_ref())?;
            ok
        }
    };
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Failed("some plumbing identities did not hold".into()))
    }
}

fn single(b: &JetCoefficients) -> Result<SingleCheck, CliError> {
    let closed_forms = check_closed_forms(b)?.is_none();
    let leading_term = check_leading_term(b)?;
    let residue_law = check_residue_law(b)?;
    let eta = residue_pair(b)?.eta;
    Ok(SingleCheck {
        order: b.max_order(),
        closed_forms,
        leading_term,
        residue_law,
        omega_at_point: format_rational(&b.omega_at_point()),
        residue: ResidueAudit {
            b01: format_rational(&b.get(0, 1)),
            b10: format_rational(&b.get(1, 0)),
            residue: format_rational(&residue_coefficient(&eta)?),
        },
        all_passed: closed_forms && leading_term && residue_law,
    })
}
