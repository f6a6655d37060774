//! Recovery of the ramification points and the canonical curve from an
//! infinitesimal period presentation.
//!
//! The presentation is a 3-tensor `T[j, i, l]` (basis index, canonical
//! coordinate, lattice coordinate). When the span is built from rank-one
//! tensors `x_k ⊗ y_k` with pairwise independent `x_k`, those tensors are the
//! only rank-one elements of the span, and simultaneous diagonalization of two
//! random contractions along the canonical mode recovers them. The `x_k` are
//! then the points of `Z` on the canonical curve, and the curve is cut out by
//! the quadrics through them.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::binform::ProjectivePointP1;
use crate::error::{Error, Result, Stage};
use crate::ivhs::{
    self, canonical_point, chordal_distance, normalize_projective, CVector, IvhsPresentation,
    SynthConfig,
};
use crate::numlin::{self, CMatrix};
use crate::ramlocus::is_general;
use crate::surface::WeierstrassSurface;

#[derive(Clone, Debug)]
pub struct RankOneFactor {
    pub x: CVector,
    pub y: CVector,
    /// `1 − σ₂/σ₁` of the slice the factor was read from.
    pub confidence: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveryConfig {
    pub confidence: f64,
    pub rel_tol: f64,
    pub match_threshold: f64,
    pub max_retries: usize,
    pub eig_gap: f64,
    pub max_cond: f64,
    pub residual_samples: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            confidence: 0.999,
            rel_tol: 1e-8,
            match_threshold: 1e-6,
            max_retries: 10,
            eig_gap: 1e-6,
            max_cond: 1e8,
            residual_samples: 100,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.confidence) || !unit(self.rel_tol) || !unit(self.eig_gap) {
            return Err(Error::InvalidArgument(
                "confidence, rel_tol and eig_gap must lie in (0, 1)".into(),
            ));
        }
        if !(self.match_threshold > 0.0) || !(self.max_cond > 1.0) || self.max_retries == 0 {
            return Err(Error::InvalidArgument(
                "match threshold must be positive, max_cond > 1 and at least one attempt".into(),
            ));
        }
        Ok(())
    }
}

fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Frobenius-orthonormal basis of the same span, as `h × N` matrices.
fn orthonormal_basis(w: &IvhsPresentation) -> Result<Vec<CMatrix>> {
    let flat = w.flattened();
    let dec = numlin::svd(&flat);
    let (hi, lo) = match (dec.singular_values.first(), dec.singular_values.last()) {
        (Some(&hi), Some(&lo)) => (hi, lo),
        _ => return Err(Error::DegeneratePresentation("empty basis".into())),
    };
    if !(hi > 0.0) || lo / hi <= ivhs::INDEPENDENCE_TOL {
        return Err(Error::DegeneratePresentation(
            "basis matrices are linearly dependent".into(),
        ));
    }
    let n = w.n;
    Ok((0..w.dim())
        .map(|j| CMatrix::from_fn(w.h, n, |i, l| dec.v[(i * n + l, j)].conj()))
        .collect())
}

/// `Σ_i u_i · T[j, i, l]`, an `r × N` matrix.
fn contract(basis: &[CMatrix], u: &CVector) -> CMatrix {
    let n = basis[0].ncols();
    CMatrix::from_fn(basis.len(), n, |j, l| {
        (0..u.len()).map(|i| u[i] * basis[j][(i, l)]).sum()
    })
}

fn relative_gap(values: &[Complex64]) -> f64 {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut gap = f64::INFINITY;
    for (a, va) in values.iter().enumerate() {
        for vb in &values[a + 1..] {
            gap = gap.min((va - vb).norm());
        }
    }
    gap / scale
}

fn jennrich_attempt(
    basis: &[CMatrix],
    h: usize,
    cfg: &RecoveryConfig,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Vec<RankOneFactor>, String> {
    let n = basis[0].ncols();
    let u1 = gaussian_vector(h, rng);
    let u2 = gaussian_vector(h, rng);
    let p1 = contract(basis, &u1);
    let p2 = contract(basis, &u2);
    let cond = numlin::condition_number(&p2);
    if !(cond <= cfg.max_cond) {
        return Err(format!("contraction condition number {cond:e}"));
    }
    // (P₂⁻¹P₁)ᵀ = Y·D·Y⁻¹ with the y-frame as eigenvectors
    let m = numlin::solve(&p2, &p1).map_err(|e| e.to_string())?.transpose();
    let eig = numlin::eig_general(&m).map_err(|e| e.to_string())?;
    if eig.defective {
        return Err("defective eigenproblem".into());
    }
    let gap = relative_gap(&eig.values);
    if gap < cfg.eig_gap {
        return Err(format!("eigenvalue gap {gap:e}"));
    }
    let y = eig.vectors;
    let y_inv = numlin::solve(&y, &CMatrix::identity(n, n)).map_err(|e| e.to_string())?;
    // column k of stacked·Y⁻ᵀ holds the slice Σ_l T[j, i, l]·Y⁻¹[k, l] = m_k x_kᵀ
    let r = basis.len();
    let stacked = CMatrix::from_fn(r * h, n, |row, l| basis[row / h][(row % h, l)]);
    let slices = stacked * y_inv.transpose();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let s_t = CMatrix::from_fn(h, r, |i, j| slices[(j * h + i, k)]);
        let dec = numlin::svd(&s_t);
        let s1 = dec.singular_values[0];
        let s2 = dec.singular_values.get(1).copied().unwrap_or(0.0);
        let confidence = if s1 > 0.0 { 1.0 - s2 / s1 } else { 0.0 };
        if !(confidence > cfg.confidence) {
            return Err(format!("slice {k} has confidence {confidence:.6}"));
        }
        let x = normalize_projective(&dec.u.column(0).into_owned())
            .ok_or_else(|| "zero slice".to_string())?;
        let y_k = normalize_projective(&y.column(k).into_owned())
            .ok_or_else(|| "zero eigenvector".to_string())?;
        out.push(RankOneFactor {
            x,
            y: y_k,
            confidence,
        });
    }
    Ok(out)
}

/// The `N` rank-one tensors spanning `W`, by simultaneous diagonalization.
pub fn extract_rank_ones(
    w: &IvhsPresentation,
    seed: u64,
    cfg: &RecoveryConfig,
) -> Result<Vec<RankOneFactor>> {
    cfg.validate()?;
    if w.n < 2 || w.h == 0 {
        return Err(Error::Dimension(format!("need N >= 2 and h >= 1, got h={} N={}", w.h, w.n)));
    }
    if w.dim() != w.n {
        return Err(Error::Dimension(format!(
            "span has dimension {}, expected N = {}",
            w.dim(),
            w.n
        )));
    }
    let basis = orthonormal_basis(w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::new();
    for _ in 0..cfg.max_retries {
        match jennrich_attempt(&basis, w.h, cfg, &mut rng) {
            Ok(f) => return Ok(f),
            Err(reason) => last = reason,
        }
    }
    Err(Error::DegeneratePresentation(format!(
        "{} attempts failed, last: {last}",
        cfg.max_retries
    )))
}

pub const ORACLE_STARTS: usize = 200;
const ORACLE_ITERATIONS: usize = 80;
const ORACLE_ACCEPT: f64 = 1e-8;
const ORACLE_DEDUP: f64 = 1e-6;

/// Rank-one elements of `W` found by Gauss–Newton on the 2×2-minor system
/// from many random starts. Independent of [`extract_rank_ones`].
pub fn rank_one_oracle_bruteforce(w: &IvhsPresentation) -> Result<Vec<RankOneFactor>> {
    if w.n > 6 || w.h > 3 {
        return Err(Error::InvalidArgument(format!(
            "brute-force oracle is limited to N <= 6 and h <= 3, got h={} N={}",
            w.h, w.n
        )));
    }
    let r = w.dim();
    if r == 0 {
        return Ok(Vec::new());
    }
    let (h, n) = (w.h, w.n);
    // coordinates in which the coefficient space is isometric to the span
    let q = w.flattened().transpose().qr().q();
    let basis: Vec<CMatrix> = (0..r)
        .map(|j| CMatrix::from_fn(h, n, |i, l| q[(i * n + l, j)]))
        .collect();
    let minors: Vec<(usize, usize, usize, usize)> = (0..h)
        .flat_map(|i1| (i1 + 1..h).map(move |i2| (i1, i2)))
        .flat_map(|(i1, i2)| {
            (0..n).flat_map(move |l1| (l1 + 1..n).map(move |l2| (i1, i2, l1, l2)))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bad_5eed);
    let combine = |lambda: &CVector| {
        (0..r).fold(CMatrix::zeros(h, n), |acc, j| acc + &basis[j] * lambda[j])
    };
    // affine chart ⟨start, λ⟩ = 1, centred on each start
    let residual = |lambda: &CVector, chart: &CVector| {
        let m = combine(lambda);
        let mut f = CMatrix::zeros(minors.len() + 1, 1);
        for (row, &(i1, i2, l1, l2)) in minors.iter().enumerate() {
            f[(row, 0)] = m[(i1, l1)] * m[(i2, l2)] - m[(i1, l2)] * m[(i2, l1)];
        }
        f[(minors.len(), 0)] = chart.dot(lambda) - Complex64::new(1.0, 0.0);
        (m, f)
    };
    let mut found: Vec<CVector> = Vec::new();
    for _ in 0..ORACLE_STARTS {
        let start = gaussian_vector(r, &mut rng);
        let chart = start.map(|z| z.conj()) / Complex64::new(start.norm_squared(), 0.0);
        let mut lambda = start;
        let (mut m, mut f) = residual(&lambda, &chart);
        for _ in 0..ORACLE_ITERATIONS {
            let rows = minors.len() + 1;
            let mut jac = CMatrix::zeros(rows, r);
            for (row, &(i1, i2, l1, l2)) in minors.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    jac[(row, j)] = b[(i1, l1)] * m[(i2, l2)] + m[(i1, l1)] * b[(i2, l2)]
                        - b[(i1, l2)] * m[(i2, l1)]
                        - m[(i1, l2)] * b[(i2, l1)];
                }
            }
            for j in 0..r {
                jac[(rows - 1, j)] = chart[j];
            }
            let Ok(step) = numlin::lstsq(&jac, &(-&f)) else {
                break;
            };
            let step = step.column(0).into_owned();
            // halve the step until the residual does not grow
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = &lambda + &step * Complex64::new(t, 0.0);
                let (tm, tf) = residual(&trial, &chart);
                if tf.iter().all(|z| z.is_finite()) && tf.norm() <= f.norm() {
                    (lambda, m, f) = (trial, tm, tf);
                    accepted = true;
                    break;
                }
                t /= 2.0;
            }
            if !accepted || t * step.norm() <= 1e-15 * lambda.norm() {
                break;
            }
        }
        let sv = numlin::singular_values(&m);
        if sv[0] > 0.0 && sv.get(1).copied().unwrap_or(0.0) / sv[0] < ORACLE_ACCEPT {
            let Some(unit) = normalize_projective(&lambda) else {
                continue;
            };
            if found.iter().all(|f| chordal_distance(f, &unit) > ORACLE_DEDUP) {
                found.push(unit);
            }
        }
    }
    Ok(found
        .iter()
        .map(|lambda| {
            let dec = numlin::svd(&combine(lambda));
            let s1 = dec.singular_values[0];
            let s2 = dec.singular_values.get(1).copied().unwrap_or(0.0);
            // M = σ₁ u vᴴ = x yᵀ up to scale, so y ∝ conj(v)
            let y = dec.v.column(0).map(|z| z.conj());
            RankOneFactor {
                x: normalize_projective(&dec.u.column(0).into_owned()).expect("nonzero"),
                y: normalize_projective(&y).expect("nonzero"),
                confidence: 1.0 - s2 / s1,
            }
        })
        .collect())
}

/// Whether two factor lists agree up to order, each `x` and `y` within `tol`.
pub fn same_factor_set(a: &[RankOneFactor], b: &[RankOneFactor], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|fa| {
        let hit = b.iter().enumerate().position(|(k, fb)| {
            !used[k] && chordal_distance(&fa.x, &fb.x) <= tol && chordal_distance(&fa.y, &fb.y) <= tol
        });
        match hit {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

/// Number of monomials `x_i x_j`, `i ≤ j`, in `h` variables.
pub fn quadric_monomials(h: usize) -> usize {
    h * (h + 1) / 2
}

/// Dimension of the space of quadrics containing the rational normal curve in `ℙ^{h−1}`.
pub fn expected_quadric_dim(h: usize) -> usize {
    (h.saturating_sub(1)) * (h.saturating_sub(2)) / 2
}

fn veronese_row(x: &CVector) -> Vec<Complex64> {
    let h = x.len();
    let mut row = Vec::with_capacity(quadric_monomials(h));
    for i in 0..h {
        for j in i..h {
            row.push(x[i] * x[j]);
        }
    }
    row
}

fn symmetric_from_coeffs(c: &[Complex64], h: usize) -> CMatrix {
    let mut q = CMatrix::zeros(h, h);
    let mut idx = 0;
    for i in 0..h {
        for j in i..h {
            if i == j {
                q[(i, i)] = c[idx];
            } else {
                q[(i, j)] = c[idx] / 2.0;
                q[(j, i)] = c[idx] / 2.0;
            }
            idx += 1;
        }
    }
    q
}

/// Quadrics through the given points of `ℙ^{h−1}`, as symmetric matrices.
pub fn quadrics_through(points: &[CVector], h: usize, rel_tol: f64) -> Vec<CMatrix> {
    let cols = quadric_monomials(h);
    let entries: Vec<Complex64> = points.iter().flat_map(veronese_row).collect();
    let v = CMatrix::from_row_slice(points.len(), cols, &entries);
    let null = numlin::nullspace(&v, rel_tol);
    (0..null.ncols())
        .map(|k| {
            let c: Vec<Complex64> = null.column(k).iter().copied().collect();
            symmetric_from_coeffs(&c, h)
        })
        .collect()
}

/// `|xᵀQx| / (‖Q‖_F ‖x‖²)`.
pub fn quadric_residual(q: &CMatrix, x: &CVector) -> f64 {
    let value = (x.transpose() * q * x)[(0, 0)].norm();
    value / (q.norm() * x.norm_squared())
}

#[derive(Clone, Debug)]
pub struct PointMatching {
    /// `permutation[i]` is the true point matched with recovered point `i`.
    pub permutation: Vec<usize>,
    pub max_chordal: f64,
    pub mean_chordal: f64,
}

/// Greedy nearest matching in chordal distance, refined by pairwise swaps that
/// lower the larger of the two distances involved.
pub fn match_points(recovered: &[CVector], truth: &[CVector]) -> Result<PointMatching> {
    let n = recovered.len();
    if truth.len() != n {
        return Err(Error::Dimension(format!(
            "{n} recovered points against {} true points",
            truth.len()
        )));
    }
    let dist: Vec<Vec<f64>> = recovered
        .iter()
        .map(|a| truth.iter().map(|b| chordal_distance(a, b)).collect())
        .collect();
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    // stable sort keeps index order on ties
    pairs.sort_by(|&(a, b), &(c, d)| dist[a][b].total_cmp(&dist[c][d]));
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for (i, j) in pairs {
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
        }
    }
    let mut improved = true;
    while improved {
        improved = false;
        for a in 0..n {
            for b in a + 1..n {
                let now = dist[a][perm[a]].max(dist[b][perm[b]]);
                let swapped = dist[a][perm[b]].max(dist[b][perm[a]]);
                if swapped < now {
                    perm.swap(a, b);
                    improved = true;
                }
            }
        }
    }
    let d: Vec<f64> = (0..n).map(|i| dist[i][perm[i]]).collect();
    Ok(PointMatching {
        permutation: perm,
        max_chordal: d.iter().copied().fold(0.0, f64::max),
        mean_chordal: if n == 0 { 0.0 } else { d.iter().sum::<f64>() / n as f64 },
    })
}

#[derive(Clone, Debug)]
pub struct RecoveredGeometry {
    pub z_points: Vec<CVector>,
    pub quadric_basis: Vec<CMatrix>,
    pub quadric_dim: usize,
    pub matching: Option<PointMatching>,
}

impl RecoveredGeometry {
    /// Largest scale-normalized quadric value over the given points.
    pub fn max_residual(&self, points: &[CVector]) -> f64 {
        self.quadric_basis
            .iter()
            .flat_map(|q| points.iter().map(move |x| quadric_residual(q, x)))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> GeometryJson {
        GeometryJson {
            h: self.z_points.first().map_or(0, |x| x.len()),
            z_points: self.z_points.iter().map(ivhs::vector_to_json).collect(),
            quadric_dim: self.quadric_dim,
            quadrics: self.quadric_basis.iter().map(ivhs::matrix_to_json).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GeometryJson {
    pub h: usize,
    pub z_points: Vec<Vec<[f64; 2]>>,
    pub quadric_dim: usize,
    pub quadrics: Vec<ivhs::JsonMatrix>,
}

/// `Z` as the factors' `x`'s and the curve as the quadrics through them.
pub fn recover_geometry(
    factors: &[RankOneFactor],
    h: usize,
    cfg: &RecoveryConfig,
) -> Result<RecoveredGeometry> {
    let n = 10 * h + 8;
    if factors.len() != n {
        return Err(Error::Dimension(format!(
            "expected {n} factors for h = {h}, got {}",
            factors.len()
        )));
    }
    if factors.iter().any(|f| f.x.len() != h) {
        return Err(Error::Dimension(format!("factor x must have length {h}")));
    }
    let z_points: Vec<CVector> = factors.iter().map(|f| f.x.clone()).collect();
    let quadric_basis = quadrics_through(&z_points, h, cfg.rel_tol);
    let expected = expected_quadric_dim(h);
    if quadric_basis.len() != expected {
        return Err(Error::InterpolationMismatch {
            expected,
            found: quadric_basis.len(),
        });
    }
    Ok(RecoveredGeometry {
        quadric_dim: quadric_basis.len(),
        z_points,
        quadric_basis,
        matching: None,
    })
}

/// Random points of the canonical curve, spread over several scales of `ℙ¹`.
pub fn sample_canonical_curve(h: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<CVector> {
    (0..count)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let scale = 10f64.powf(rng.gen_range(-1.5..1.5));
            let z = Complex64::new(re, im) * scale;
            canonical_point(&ProjectivePointP1::from_affine(z), h).x
        })
        .collect()
}

/// `deg L` read off from the degree of the recovered canonical curve.
pub fn recovered_deg_l(curve_degree: i64, q: i64) -> i64 {
    curve_degree - (2 * q - 2)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RoundtripReport {
    pub max_chordal: Option<f64>,
    pub mean_chordal: Option<f64>,
    pub quadric_dim: Option<usize>,
    pub residual_max: Option<f64>,
    #[serde(rename = "recovered_dL")]
    pub recovered_dl: Option<i64>,
    pub stage_timings_ms: BTreeMap<String, f64>,
    pub status: String,
}

impl RoundtripReport {
    pub fn failed(err: &Error, stage_timings_ms: BTreeMap<String, f64>) -> Self {
        RoundtripReport {
            max_chordal: None,
            mean_chordal: None,
            quadric_dim: None,
            residual_max: None,
            recovered_dl: None,
            stage_timings_ms,
            status: format!("error:{}", err.stage().map_or("unknown", |s| s.tag())),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RoundtripOptions {
    pub synth: SynthConfig,
    pub recovery: RecoveryConfig,
    /// Perturb the presentation so its span is no longer rank-one built.
    pub corrupt_span: bool,
}

fn timed<T>(
    timings: &mut BTreeMap<String, f64>,
    stage: Stage,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.at(stage));
    timings.insert(stage.tag().to_string(), start.elapsed().as_secs_f64() * 1e3);
    out
}

/// Full pipeline with ground truth: returns the report or the first stage error
/// together with the timings gathered so far.
pub fn roundtrip_with(
    s: &WeierstrassSurface,
    seed: u64,
    opts: &RoundtripOptions,
) -> std::result::Result<(RoundtripReport, RecoveredGeometry), (Error, BTreeMap<String, f64>)> {
    let mut t = BTreeMap::new();
    macro_rules! stage {
        ($stage:expr, $body:expr) => {
            match timed(&mut t, $stage, || $body) {
                Ok(v) => v,
                Err(e) => return Err((e, t)),
            }
        };
    }
    let cfg = opts.recovery;
    stage!(Stage::Surface, {
        let g = is_general(s);
        if g.is_general() {
            Ok(())
        } else {
            Err(Error::NotGeneral(format!("failed clause(s) {}", g.failed_clauses().join(","))))
        }
    });
    let (mut pres, truth) = stage!(Stage::Synthesize, ivhs::synthesize(s, seed, &opts.synth));
    if opts.corrupt_span {
        ivhs::corrupt_span(&mut pres, seed);
    }
    let factors = stage!(Stage::Extract, extract_rank_ones(&pres, seed.wrapping_add(1), &cfg));
    let h = s.h() as usize;
    let mut geom = stage!(Stage::Recover, recover_geometry(&factors, h, &cfg));
    let true_points: Vec<CVector> = truth.points.iter().map(|p| p.x.clone()).collect();
    let matching = stage!(Stage::Match, {
        let m = match_points(&geom.z_points, &true_points)?;
        if m.max_chordal < cfg.match_threshold {
            Ok(m)
        } else {
            Err(Error::MatchFailed {
                max_chordal: m.max_chordal,
                threshold: cfg.match_threshold,
            })
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let samples = sample_canonical_curve(h, cfg.residual_samples, &mut rng);
    let residual_max = geom.max_residual(&samples);
    let report = RoundtripReport {
        max_chordal: Some(matching.max_chordal),
        mean_chordal: Some(matching.mean_chordal),
        quadric_dim: Some(geom.quadric_dim),
        residual_max: Some(residual_max),
        recovered_dl: Some(recovered_deg_l(h as i64 - 1 + s.q() as i64, s.q() as i64)),
        stage_timings_ms: t,
        status: "ok".into(),
    };
    geom.matching = Some(matching);
    Ok((report, geom))
}

pub fn roundtrip(s: &WeierstrassSurface, seed: u64, cfg: &RecoveryConfig) -> Result<RoundtripReport> {
    let opts = RoundtripOptions {
        recovery: *cfg,
        ..Default::default()
    };
    roundtrip_with(s, seed, &opts).map(|(r, _)| r).map_err(|(e, _)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivhs::{synthesize_from_points, EmbeddedPoint};
    use crate::surface::make_random_general;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vecc(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&r| c(r, 0.0)))
    }

    /// x₁ = e₁, x₂ = e₂, x₃ = (1,1)/√2 against the standard frame, unmixed.
    fn tiny() -> (IvhsPresentation, Vec<CVector>) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let xs = vec![vecc(&[1.0, 0.0]), vecc(&[0.0, 1.0]), vecc(&[s, s])];
        let basis = (0..3)
            .map(|k| {
                let mut e = CVector::zeros(3);
                e[k] = c(1.0, 0.0);
                &xs[k] * e.transpose()
            })
            .collect();
        (IvhsPresentation::new(2, 3, basis, None).unwrap(), xs)
    }

    #[test]
    fn tiny_instance_recovers_three_factors() {
        let (w, xs) = tiny();
        let f = extract_rank_ones(&w, 1, &RecoveryConfig::default()).unwrap();
        assert_eq!(f.len(), 3);
        let m = match_points(&f.iter().map(|f| f.x.clone()).collect::<Vec<_>>(), &xs).unwrap();
        assert!(m.max_chordal < 1e-10, "{}", m.max_chordal);
        for (k, fk) in f.iter().enumerate() {
            let mut e = CVector::zeros(3);
            e[m.permutation[k]] = c(1.0, 0.0);
            assert!(chordal_distance(&fk.y, &e) < 1e-10);
            assert!(fk.confidence > 0.999);
        }
    }

    #[test]
    fn oracle_agrees_on_tiny_instance() {
        let (w, _) = tiny();
        let a = extract_rank_ones(&w, 3, &RecoveryConfig::default()).unwrap();
        let b = rank_one_oracle_bruteforce(&w).unwrap();
        assert_eq!(b.len(), 3);
        assert!(same_factor_set(&a, &b, 1e-8));
    }

    #[test]
    fn oracle_axis_case() {
        let e = |k: usize| {
            let mut v = CVector::zeros(2);
            v[k] = c(1.0, 0.0);
            v
        };
        let basis = vec![&e(0) * e(0).transpose(), &e(1) * e(1).transpose()];
        let w = IvhsPresentation::new(2, 2, basis, None).unwrap();
        let f = rank_one_oracle_bruteforce(&w).unwrap();
        assert_eq!(f.len(), 2);
        for k in 0..2 {
            assert!(f.iter().any(|g| chordal_distance(&g.x, &e(k)) < 1e-12 && chordal_distance(&g.y, &e(k)) < 1e-12));
        }
    }

    #[test]
    fn oracle_finds_nothing_in_generic_pencil() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let basis = (0..2)
            .map(|_| CMatrix::from_fn(3, 3, |_, _| gaussian_vector(1, &mut rng)[0]))
            .collect();
        // a pencil of 3x3 matrices, padded to the N x N convention by using N = 3 columns
        let w = IvhsPresentation::new(3, 3, basis, None).unwrap();
        assert!(rank_one_oracle_bruteforce(&w).unwrap().is_empty());
    }

    #[test]
    fn oracle_is_gated() {
        let s = make_random_general(3, 1).unwrap();
        let (w, _) = ivhs::synthesize(&s, 1, &SynthConfig::default()).unwrap();
        assert!(matches!(rank_one_oracle_bruteforce(&w), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn random_general_h3_extracts_38() {
        let s = make_random_general(3, 1).unwrap();
        let (w, truth) = ivhs::synthesize(&s, 1, &SynthConfig::default()).unwrap();
        let f = extract_rank_ones(&w, 1, &RecoveryConfig::default()).unwrap();
        assert_eq!(f.len(), 38);
        assert!(f.iter().all(|f| f.confidence > 0.999));
        let xs: Vec<CVector> = truth.points.iter().map(|p| p.x.clone()).collect();
        let m = match_points(&f.iter().map(|f| f.x.clone()).collect::<Vec<_>>(), &xs).unwrap();
        assert!(m.max_chordal < 1e-6);
    }

    #[test]
    fn generic_subspace_is_rejected_for_h3() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let basis = (0..38)
            .map(|_| CMatrix::from_fn(3, 38, |_, _| gaussian_vector(1, &mut rng)[0]))
            .collect();
        let w = IvhsPresentation::new(3, 38, basis, None).unwrap();
        assert!(matches!(
            extract_rank_ones(&w, 1, &RecoveryConfig::default()),
            Err(Error::DegeneratePresentation(_))
        ));
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let p = canonical_point(&ProjectivePointP1::from_affine(c(0.5, 0.25)), 3);
        let q = canonical_point(&ProjectivePointP1::from_affine(c(-1.0, 2.0)), 3);
        let r = canonical_point(&ProjectivePointP1::from_affine(c(3.0, 0.0)), 3);
        let pts: Vec<EmbeddedPoint> = vec![p.clone(), p, q, r];
        let (w, _) = synthesize_from_points(pts, 2, &SynthConfig::default()).unwrap();
        assert!(matches!(
            extract_rank_ones(&w, 1, &RecoveryConfig::default()),
            Err(Error::DegeneratePresentation(_))
        ));
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let (mut w, _) = tiny();
        w.basis[2] = w.basis[0].clone() * c(2.0, 0.0);
        assert!(extract_rank_ones(&w, 1, &RecoveryConfig::default()).is_err());
    }

    #[test]
    fn quadric_counts_on_rational_normal_curves() {
        // nullspace oracle on exact points of the true curve
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for h in 3..=6 {
            let pts = sample_canonical_curve(h, 10 * h + 8, &mut rng);
            let qs = quadrics_through(&pts, h, 1e-8);
            assert_eq!(qs.len(), expected_quadric_dim(h), "h = {h}");
            let fresh = sample_canonical_curve(h, 100, &mut rng);
            for q in &qs {
                assert!(fresh.iter().all(|x| quadric_residual(q, x) < 1e-9));
            }
        }
        assert_eq!([3, 4, 5].map(expected_quadric_dim), [1, 3, 6]);
    }

    #[test]
    fn conic_quadric_is_the_conic() {
        // x0 x2 − x1² vanishes on (1, t, t²)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let qs = quadrics_through(&sample_canonical_curve(3, 38, &mut rng), 3, 1e-8);
        let q = &qs[0];
        let scale = q[(1, 1)];
        assert!(((q[(0, 2)] / scale) + c(0.5, 0.0)).norm() < 1e-10);
        assert!((q[(0, 0)] / scale).norm() < 1e-10);
        assert!((q[(2, 2)] / scale).norm() < 1e-10);
    }

    #[test]
    fn recover_geometry_needs_n_factors() {
        let f = vec![
            RankOneFactor {
                x: vecc(&[1.0, 0.0, 0.0]),
                y: vecc(&[1.0]),
                confidence: 1.0,
            };
            37
        ];
        assert!(matches!(recover_geometry(&f, 3, &RecoveryConfig::default()), Err(Error::Dimension(_))));
    }

    #[test]
    fn off_curve_points_break_interpolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<RankOneFactor> = (0..38)
            .map(|_| RankOneFactor {
                x: normalize_projective(&gaussian_vector(3, &mut rng)).unwrap(),
                y: vecc(&[1.0]),
                confidence: 1.0,
            })
            .collect();
        assert!(matches!(
            recover_geometry(&f, 3, &RecoveryConfig::default()),
            Err(Error::InterpolationMismatch { expected: 1, found: 0 })
        ));
    }

    #[test]
    fn matching_undoes_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let truth = sample_canonical_curve(3, 20, &mut rng);
        let perm: Vec<usize> = (0..20).map(|i| (i * 7) % 20).collect();
        let rec: Vec<CVector> = perm.iter().map(|&j| truth[j].map(|z| z * c(0.0, 1.0))).collect();
        let m = match_points(&rec, &truth).unwrap();
        assert_eq!(m.permutation, perm);
        assert!(m.max_chordal < 1e-15);
        assert!(match_points(&rec[1..], &truth).is_err());
    }

    #[test]
    fn roundtrip_h3_and_h5() {
        let cfg = RecoveryConfig::default();
        let r = roundtrip(&make_random_general(3, 1).unwrap(), 1, &cfg).unwrap();
        assert!(r.is_ok());
        assert!(r.max_chordal.unwrap() < 1e-6);
        assert_eq!(r.quadric_dim, Some(1));
        assert_eq!(r.recovered_dl, Some(4));
        let r = roundtrip(&make_random_general(5, 3).unwrap(), 2, &cfg).unwrap();
        assert!(r.max_chordal.unwrap() < 1e-6);
        assert_eq!(r.quadric_dim, Some(6));
        assert!(r.residual_max.unwrap() <= 1e-9);
    }

    #[test]
    fn corrupted_span_fails_at_extraction() {
        let opts = RoundtripOptions {
            corrupt_span: true,
            ..Default::default()
        };
        let (err, timings) = roundtrip_with(&make_random_general(3, 1).unwrap(), 1, &opts).unwrap_err();
        assert_eq!(err.stage(), Some(Stage::Extract));
        assert!(timings.contains_key("synthesize"));
        assert_eq!(RoundtripReport::failed(&err, timings).status, "error:extract");
    }

    #[test]
    fn confidence_bound_and_tolerances_validate() {
        let bad = RecoveryConfig {
            confidence: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(RecoveryConfig::default().validate().is_ok());
    }
}
