use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use torelli_core::binform::{DivisorJson, PointCoord, ProjectivePointP1};
use torelli_core::ramlocus::{is_general, multiplicity_warnings, ramification_divisor, schottky_degrees};
use torelli_core::surface::{Invariants, SurfaceJson, WeierstrassSurface};

use crate::error::CliError;
use crate::output::{emit, read_json, Report};

/// Invariants, singular fibers, ramification divisor and genericity of a surface.
#[derive(Args)]
pub struct Opts {
    /// Surface JSON as written by `generate`.
    surface: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Serialize)]
struct FiberRow {
    z: PointCoord,
    delta_val: u32,
    kodaira: String,
}

#[derive(Serialize)]
struct Genericity {
    is_general: bool,
    all_i1: bool,
    w_reduced: bool,
    disjoint_from_delta: bool,
    failed_clauses: Vec<&'static str>,
}

#[derive(Serialize)]
struct Schottky {
    deg_z: u32,
    #[serde(rename = "N")]
    n: i64,
    via_canonical: i64,
    via_l: i64,
    passed: bool,
}

#[derive(Serialize)]
struct Analysis {
    invariants: Invariants,
    h11: i64,
    fibers: Vec<FiberRow>,
    total_delta: u32,
    ramification: DivisorJson,
    genericity: Genericity,
    schottky: Schottky,
    warnings: Vec<String>,
}

fn coord(p: &ProjectivePointP1) -> PointCoord {
    match p.affine() {
        Some(z) => PointCoord::Affine([z.re, z.im]),
        None => PointCoord::Infinity("inf".into()),
    }
}

pub fn run(o: &Opts) -> Result<(), CliError> {
    let json: SurfaceJson = read_json(&o.surface)?;
    let s = WeierstrassSurface::from_json(&json)?;
    let fibers = s.classify_fibers()?;
    let z = ramification_divisor(&s)?;
    let g = is_general(&s);
    let inv = s.invariants();
    let (n, via_canonical, via_l) = schottky_degrees(inv.h, inv.q);
    let deg_z = z.total_degree;
    let analysis = Analysis {
        invariants: inv,
        h11: inv.h11(),
        total_delta: fibers.total_delta(),
        fibers: fibers
            .fibers
            .iter()
            .map(|f| FiberRow {
                z: coord(&f.point),
                delta_val: f.delta_val,
                kodaira: f.kodaira.to_string(),
            })
            .collect(),
        ramification: z.divisor.to_json(),
        genericity: Genericity {
            is_general: g.is_general(),
            all_i1: g.all_i1,
            w_reduced: g.w_reduced,
            disjoint_from_delta: g.disjoint_from_delta,
            failed_clauses: g.failed_clauses(),
        },
        schottky: Schottky {
            deg_z,
            n,
            via_canonical,
            via_l,
            passed: [n, via_canonical, via_l].iter().all(|&d| d == deg_z as i64),
        },
        warnings: multiplicity_warnings(&s),
    };
    emit(&Report::new("analyze", analysis), o.output.as_ref())
}
