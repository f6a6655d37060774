//! Synthetic infinitesimal period data.
//!
//! For a general surface with ramification points `a ∈ Z`, the derivative of
//! the period map has image spanned by rank-one tensors `x_a ⊗ y_a`, where
//! `x_a ∈ ℂ^h` evaluates sections of the canonical system at `a` and the
//! `y_a ∈ ℂ^N` form an orthogonal frame. The `y_a` and the scalars in front of
//! each tensor are not computable without period integrals, so they are drawn
//! at random here; the recovery side only ever uses the span.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::binform::{PointCoord, ProjectivePointP1};
use crate::error::{Error, Result};
use crate::numlin::{self, CMatrix};
use crate::ramlocus::{is_general, ramification_divisor};
use crate::surface::WeierstrassSurface;

pub type CVector = DVector<Complex64>;

/// Relative floor for the smallest singular value of the flattened basis.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

/// Unit vector, phase-fixed so its first nonzero entry is real and positive.
pub fn normalize_projective(v: &CVector) -> Option<CVector> {
    let norm = v.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    let lead = v.iter().find(|z| z.norm() > 0.0)?;
    let phase = lead.conj() / lead.norm();
    Some(v.map(|z| z * phase / norm))
}

/// Sine of the angle between the lines spanned by `u` and `v`.
pub fn chordal_distance(u: &CVector, v: &CVector) -> f64 {
    let (nu, nv) = (u.norm(), v.norm());
    let c = (u.dotc(v).norm() / (nu * nv)).min(1.0);
    // 1 − c² loses digits near c = 1; go through the residual instead.
    let proj = v - u * (u.dotc(v) / Complex64::new(nu * nu, 0.0));
    let s = proj.norm() / nv;
    if c > 0.9 {
        s
    } else {
        (1.0 - c * c).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddedPoint {
    pub base_point: ProjectivePointP1,
    pub x: CVector,
}

/// Image of `a` on the rational normal curve of degree `h − 1`:
/// `(Z0^{h−1}, Z0^{h−2}Z1, …, Z1^{h−1})`, normalized.
pub fn canonical_point(a: &ProjectivePointP1, h: usize) -> EmbeddedPoint {
    assert!(h >= 1, "canonical space needs h >= 1");
    let (z0, z1) = a.coords();
    let raw = CVector::from_iterator(
        h,
        (0..h).map(|i| z0.powu((h - 1 - i) as u32) * z1.powu(i as u32)),
    );
    EmbeddedPoint {
        base_point: *a,
        x: normalize_projective(&raw).expect("a point of P^1 has a nonzero Veronese image"),
    }
}

#[derive(Clone, Debug)]
pub struct IvhsPresentation {
    pub h: usize,
    pub n: usize,
    /// Each matrix is `h × N`; together they span the subspace of `U ⊗ V`.
    pub basis: Vec<CMatrix>,
    /// Modeled intersection form on `V` in the synthetic frame.
    pub gram: Option<CMatrix>,
}

impl IvhsPresentation {
    pub fn new(h: usize, n: usize, basis: Vec<CMatrix>, gram: Option<CMatrix>) -> Result<Self> {
        for b in &basis {
            if b.shape() != (h, n) {
                return Err(Error::Dimension(format!(
                    "basis matrix is {}x{}, expected {h}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            if !numlin::is_finite(b) {
                return Err(Error::NonFinite);
            }
        }
        if let Some(g) = &gram {
            if g.shape() != (n, n) {
                return Err(Error::Dimension("gram matrix must be N x N".into()));
            }
        }
        Ok(IvhsPresentation { h, n, basis, gram })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `dim × (h·N)` matrix whose rows are the row-major flattened basis matrices.
    pub fn flattened(&self) -> CMatrix {
        let (h, n) = (self.h, self.n);
        CMatrix::from_fn(self.basis.len(), h * n, |j, idx| self.basis[j][(idx / n, idx % n)])
    }

    /// `σ_min / σ_max` of the flattened basis.
    pub fn independence_ratio(&self) -> f64 {
        let s = numlin::singular_values(&self.flattened());
        match (s.first(), s.last()) {
            (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
            _ => 0.0,
        }
    }

    pub fn is_independent(&self) -> bool {
        self.independence_ratio() > INDEPENDENCE_TOL
    }

    pub fn to_json(&self) -> IvhsJson {
        IvhsJson {
            h: self.h,
            n: self.n,
            basis: self.basis.iter().map(matrix_to_json).collect(),
            gram: self.gram.as_ref().map(matrix_to_json),
        }
    }

    pub fn from_json(j: &IvhsJson) -> Result<Self> {
        let basis = j
            .basis
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        let gram = j.gram.as_ref().map(matrix_from_json).transpose()?;
        Self::new(j.h, j.n, basis, gram)
    }
}

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(m: &JsonMatrix) -> Result<CMatrix> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix".into()));
    }
    let entries: Vec<Complex64> = m
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    numlin::cmatrix(rows, cols, &entries)
}

pub fn vector_to_json(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&[re, im]| Complex64::new(re, im)))
}

/// `{ "h": int, "N": int, "basis": [[[ [re, im], … ], …], …] }`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IvhsJson {
    pub h: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub basis: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<JsonMatrix>,
}

/// Hidden data behind a synthetic presentation; only used to grade recovery.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub points: Vec<EmbeddedPoint>,
    pub lambdas: Vec<Complex64>,
    pub y_frame: CMatrix,
    pub mixer: CMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TruthPointJson {
    pub z: PointCoord,
    pub x: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TruthJson {
    pub points: Vec<TruthPointJson>,
    pub lambdas: Vec<[f64; 2]>,
    pub y_frame: JsonMatrix,
    pub mixer: JsonMatrix,
}

impl GroundTruth {
    pub fn to_json(&self) -> TruthJson {
        TruthJson {
            points: self
                .points
                .iter()
                .map(|p| TruthPointJson {
                    z: match p.base_point.affine() {
                        Some(z) => PointCoord::Affine([z.re, z.im]),
                        None => PointCoord::Infinity("inf".into()),
                    },
                    x: vector_to_json(&p.x),
                })
                .collect(),
            lambdas: self.lambdas.iter().map(|z| [z.re, z.im]).collect(),
            y_frame: matrix_to_json(&self.y_frame),
            mixer: matrix_to_json(&self.mixer),
        }
    }

    pub fn from_json(j: &TruthJson) -> Result<Self> {
        let points = j
            .points
            .iter()
            .map(|p| {
                let base_point = match &p.z {
                    PointCoord::Affine([re, im]) => ProjectivePointP1::from_affine(Complex64::new(*re, *im)),
                    PointCoord::Infinity(_) => ProjectivePointP1::infinity(),
                };
                EmbeddedPoint {
                    base_point,
                    x: vector_from_json(&p.x),
                }
            })
            .collect();
        Ok(GroundTruth {
            points,
            lambdas: j.lambdas.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
            y_frame: matrix_from_json(&j.y_frame)?,
            mixer: matrix_from_json(&j.mixer)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub mixer_cond: f64,
    pub with_gram: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            lambda_min: 0.1,
            lambda_max: 10.0,
            mixer_cond: 100.0,
            with_gram: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_min <= self.lambda_max && self.lambda_max.is_finite()) {
            return Err(Error::InvalidArgument("need 0 < lambda_min <= lambda_max".into()));
        }
        if !(self.mixer_cond >= 1.0 && self.mixer_cond.is_finite()) {
            return Err(Error::InvalidArgument("mixer condition bound must be >= 1".into()));
        }
        Ok(())
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

/// Haar-distributed unitary matrix (QR of a Gaussian matrix, phases fixed).
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `U·diag(σ)·V*` with `σ` log-uniform in `[1, cond]`.
pub fn random_mixer(n: usize, cond: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    let u = random_unitary(n, rng);
    let v = random_unitary(n, rng);
    let sigma = DVector::from_iterator(
        n,
        (0..n).map(|_| Complex64::new(cond.powf(rng.gen_range(0.0..=1.0)), 0.0)),
    );
    u * CMatrix::from_diagonal(&sigma) * v.adjoint()
}

/// Presentation spanned by `λ_k x_k ⊗ y_k` for the given `x`'s, mixed by a random basis change.
pub fn synthesize_from_points(
    points: Vec<EmbeddedPoint>,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<(IvhsPresentation, GroundTruth)> {
    cfg.validate()?;
    let n = points.len();
    let h = points.first().map_or(0, |p| p.x.len());
    if n == 0 || points.iter().any(|p| p.x.len() != h) {
        return Err(Error::InvalidArgument("need a nonempty set of points in one ambient space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y_frame = random_unitary(n, &mut rng);
    let (lo, hi) = (cfg.lambda_min.ln(), cfg.lambda_max.ln());
    let lambdas: Vec<Complex64> = (0..n)
        .map(|_| {
            let mag = if hi > lo { rng.gen_range(lo..=hi).exp() } else { cfg.lambda_min };
            Complex64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let mixer = random_mixer(n, cfg.mixer_cond, &mut rng);
    let x = CMatrix::from_fn(h, n, |i, k| points[k].x[i]);
    let yt = y_frame.transpose();
    let basis = (0..n)
        .map(|j| {
            let weights = DVector::from_iterator(n, (0..n).map(|k| mixer[(j, k)] * lambdas[k]));
            &x * CMatrix::from_diagonal(&weights) * &yt
        })
        .collect();
    let gram = cfg
        .with_gram
        .then(|| CMatrix::identity(n, n) * Complex64::new(-2.0, 0.0));
    let pres = IvhsPresentation::new(h, n, basis, gram)?;
    Ok((
        pres,
        GroundTruth {
            points,
            lambdas,
            y_frame,
            mixer,
        },
    ))
}

/// Synthetic presentation for a general surface: one rank-one tensor per point of `Z`.
pub fn synthesize(
    s: &WeierstrassSurface,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<(IvhsPresentation, GroundTruth)> {
    let report = is_general(s);
    if !report.is_general() {
        return Err(Error::NotGeneral(format!(
            "failed clause(s) {}",
            report.failed_clauses().join(",")
        )));
    }
    let z = ramification_divisor(s)?;
    let n = s.invariants().n as usize;
    if !z.divisor.is_reduced() || z.divisor.points.len() != n {
        return Err(Error::NotGeneral(format!(
            "expected {n} distinct ramification points, found {}",
            z.divisor.points.len()
        )));
    }
    let h = s.h() as usize;
    let points = z
        .divisor
        .points
        .iter()
        .map(|(p, _)| canonical_point(p, h))
        .collect();
    synthesize_from_points(points, seed, cfg)
}

/// Replaces the first basis matrix by itself plus a random full-rank matrix of
/// comparable size, destroying the rank-one structure of the span.
pub fn corrupt_span(p: &mut IvhsPresentation, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let scale = p.basis[0].norm().max(1.0) / ((p.h * p.n) as f64).sqrt();
    let noise = CMatrix::from_fn(p.h, p.n, |_, _| gaussian(&mut rng) * scale);
    p.basis[0] += noise;
}

/// Largest sine of the principal angles between the spans of two presentations.
pub fn subspace_distance(a: &IvhsPresentation, b: &IvhsPresentation) -> f64 {
    let qa = numlin::svd(&a.flattened().transpose()).u;
    let qb = numlin::svd(&b.flattened().transpose()).u;
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    numlin::singular_values(&resid).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;
    use crate::surface::{make_random_general, make_with_i2};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn canonical_point_examples() {
        let p = canonical_point(&ProjectivePointP1::from_affine(c(2.0)), 3);
        let want = CVector::from_vec(vec![c(1.0), c(2.0), c(4.0)]);
        assert!(chordal_distance(&p.x, &want) < 1e-15);
        assert!((p.x.norm() - 1.0).abs() < 1e-15);
        let inf = canonical_point(&ProjectivePointP1::infinity(), 3);
        assert_eq!(inf.x, CVector::from_vec(vec![c(0.0), c(0.0), c(1.0)]));
        let zero = canonical_point(&ProjectivePointP1::from_affine(c(0.0)), 5);
        assert_eq!(zero.x[0], c(1.0));
        assert!(zero.x.iter().skip(1).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn presentation_shape_and_frame() {
        let s = make_random_general(3, 1).unwrap();
        let (p, truth) = synthesize(&s, 11, &SynthConfig::default()).unwrap();
        assert_eq!((p.h, p.n, p.dim()), (3, 38, 38));
        assert!(p.basis.iter().all(|b| b.shape() == (3, 38)));
        assert!(p.is_independent());
        let g = p.gram.as_ref().unwrap();
        assert_eq!(*g, CMatrix::identity(38, 38) * c(-2.0));
        // orthonormal y-frame, λ window, mixer conditioning
        let y = &truth.y_frame;
        assert!((y.adjoint() * y - CMatrix::identity(38, 38)).norm() < 1e-12);
        assert!(truth.lambdas.iter().all(|l| (0.1..=10.0).contains(&l.norm())));
        assert!(numlin::condition_number(&truth.mixer) <= 100.0 * (1.0 + 1e-9));
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let s = make_random_general(3, 1).unwrap();
        let cfg = SynthConfig::default();
        let (a, _) = synthesize(&s, 1, &cfg).unwrap();
        let (a2, _) = synthesize(&s, 1, &cfg).unwrap();
        assert_eq!(a.basis, a2.basis);
        // the y-frame is part of the data, so another seed moves the span
        let (b, _) = synthesize(&s, 2, &cfg).unwrap();
        assert!(subspace_distance(&a, &b) > 1e-3);
        assert!(subspace_distance(&a, &a2) < 1e-12);
    }

    #[test]
    fn remixing_keeps_the_span() {
        let s = make_random_general(3, 1).unwrap();
        let (a, truth) = synthesize(&s, 4, &SynthConfig::default()).unwrap();
        let (b, _) = synthesize_from_points(truth.points.clone(), 4, &SynthConfig::default()).unwrap();
        assert!(subspace_distance(&a, &b) < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_mixer(a.dim(), 10.0, &mut rng);
        let mixed: Vec<CMatrix> = (0..a.dim())
            .map(|j| (0..a.dim()).fold(CMatrix::zeros(a.h, a.n), |acc, k| acc + &a.basis[k] * g[(j, k)]))
            .collect();
        let c2 = IvhsPresentation::new(a.h, a.n, mixed, None).unwrap();
        assert!(subspace_distance(&a, &c2) < 1e-10);
    }

    #[test]
    fn basis_matrices_have_full_rank() {
        let s = make_random_general(4, 3).unwrap();
        let (p, _) = synthesize(&s, 5, &SynthConfig::default()).unwrap();
        for b in &p.basis {
            let sv = numlin::singular_values(b);
            assert_eq!(sv.len(), 4);
            assert!(sv[3] / sv[0] > 1e-6);
        }
    }

    #[test]
    fn non_general_surface_is_rejected() {
        let s = make_with_i2(3, &[rat(0)], 5).unwrap();
        assert!(matches!(synthesize(&s, 1, &SynthConfig::default()), Err(Error::NotGeneral(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let s = make_random_general(3, 1).unwrap();
        let (p, truth) = synthesize(&s, 3, &SynthConfig::default()).unwrap();
        let text = serde_json::to_string(&p.to_json()).unwrap();
        let back = IvhsPresentation::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.basis, p.basis);
        let t = serde_json::to_string(&truth.to_json()).unwrap();
        let tb = GroundTruth::from_json(&serde_json::from_str(&t).unwrap()).unwrap();
        assert_eq!(tb.y_frame, truth.y_frame);
        assert_eq!(tb.points.len(), 38);
    }

    #[test]
    fn presentation_rejects_bad_shapes() {
        assert!(IvhsPresentation::new(2, 3, vec![CMatrix::zeros(3, 2)], None).is_err());
        let mut bad = CMatrix::zeros(2, 3);
        bad[(0, 0)] = c(f64::INFINITY);
        assert!(IvhsPresentation::new(2, 3, vec![bad], None).is_err());
    }

    #[test]
    fn corruption_changes_the_span() {
        let s = make_random_general(3, 1).unwrap();
        let (p, _) = synthesize(&s, 3, &SynthConfig::default()).unwrap();
        let mut q = p.clone();
        corrupt_span(&mut q, 1);
        assert!(subspace_distance(&p, &q) > 1e-3);
    }
}
