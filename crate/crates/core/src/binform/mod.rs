//! Binary forms over ℚ and over ℂ, points of ℙ¹, and divisors on ℙ¹.
//!
//! A form of degree `d` stores `d + 1` coefficients; index `k` holds the
//! coefficient of `Z0^{d−k} Z1^k`. On the chart `Z0 = 1` with `z = Z1/Z0` the
//! form becomes the polynomial `Σ cₖ zᵏ`, and the point `(0, 1)` is `z = ∞`.

pub mod poly;
pub mod roots;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Rational;
use poly::QPoly;

/// Chordal radius below which numerically computed roots are merged.
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryForm<T> {
    coeffs: Vec<T>,
}

pub type RationalForm = BinaryForm<Rational>;
pub type ComplexForm = BinaryForm<Complex64>;

impl<T> BinaryForm<T>
where
    T: Clone + Num + FromPrimitive,
{
    /// Builds a form from its `degree + 1` coefficients.
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a form needs degree + 1 coefficients".into()));
        }
        Ok(BinaryForm { coeffs })
    }

    pub fn zero(degree: usize) -> Self {
        BinaryForm {
            coeffs: vec![T::zero(); degree + 1],
        }
    }

    /// Embeds an affine polynomial (ascending) as a form of the given degree.
    pub fn from_affine(degree: usize, affine: &[T]) -> Result<Self> {
        let top = affine.iter().rposition(|c| !c.is_zero()).map_or(0, |k| k);
        if top > degree {
            return Err(Error::InvalidArgument(format!(
                "affine polynomial of degree {top} does not fit in a form of degree {degree}"
            )));
        }
        let mut coeffs = vec![T::zero(); degree + 1];
        for (k, c) in affine.iter().enumerate().take(degree + 1) {
            coeffs[k] = c.clone();
        }
        Ok(BinaryForm { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Degree of the affine part, `None` for the zero form.
    pub fn affine_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Multiplicity of the root at `(0, 1)`; zero forms report their degree.
    pub fn multiplicity_at_infinity(&self) -> usize {
        self.degree() - self.affine_degree().unwrap_or(0)
    }

    pub fn scale(&self, c: &T) -> Self {
        BinaryForm {
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = BinaryForm {
            coeffs: vec![T::one()],
        };
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// `∂/∂Z0`, a form of degree `d − 1`.
    pub fn d_z0(&self) -> Self {
        let d = self.degree();
        BinaryForm {
            coeffs: (0..d)
                .map(|k| self.coeffs[k].clone() * T::from_usize(d - k).expect("small integer"))
                .collect(),
        }
    }

    /// `∂/∂Z1`, a form of degree `d − 1`.
    pub fn d_z1(&self) -> Self {
        let d = self.degree();
        BinaryForm {
            coeffs: (1..=d)
                .map(|k| self.coeffs[k].clone() * T::from_usize(k).expect("small integer"))
                .collect(),
        }
    }
}

impl<'a, T> Mul<&'a BinaryForm<T>> for &'a BinaryForm<T>
where
    T: Clone + Num + FromPrimitive,
{
    type Output = BinaryForm<T>;

    fn mul(self, rhs: &BinaryForm<T>) -> BinaryForm<T> {
        let mut coeffs = vec![T::zero(); self.degree() + rhs.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        BinaryForm { coeffs }
    }
}

impl<'a, T> Add<&'a BinaryForm<T>> for &'a BinaryForm<T>
where
    T: Clone + Num + FromPrimitive,
{
    type Output = BinaryForm<T>;

    /// Forms must share a degree.
    fn add(self, rhs: &BinaryForm<T>) -> BinaryForm<T> {
        assert_eq!(self.degree(), rhs.degree(), "adding forms of different degrees");
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<'a, T> Sub<&'a BinaryForm<T>> for &'a BinaryForm<T>
where
    T: Clone + Num + FromPrimitive,
{
    type Output = BinaryForm<T>;

    fn sub(self, rhs: &BinaryForm<T>) -> BinaryForm<T> {
        assert_eq!(self.degree(), rhs.degree(), "subtracting forms of different degrees");
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

/// First transvectant as the Jacobian determinant `f_{Z0} g_{Z1} − f_{Z1} g_{Z0}`.
///
/// On the chart `Z0 = 1` this equals `hcf(m, n)·(m′ f g′ − n′ g f′)` with
/// `m′ = m / hcf`, `n′ = n / hcf` (Euler's identity `m f = Z0 f_{Z0} + Z1 f_{Z1}`).
pub fn transvectant_first<T>(f: &BinaryForm<T>, g: &BinaryForm<T>) -> Result<BinaryForm<T>>
where
    T: Clone + Num + FromPrimitive,
{
    if f.degree() == 0 || g.degree() == 0 {
        return Err(Error::InvalidArgument(
            "transvectant needs forms of positive degree".into(),
        ));
    }
    Ok(&(&f.d_z0() * &g.d_z1()) - &(&f.d_z1() * &g.d_z0()))
}

impl RationalForm {
    /// Affine part `f(1, z)` as a trimmed polynomial.
    pub fn affine(&self) -> QPoly {
        poly::trim(self.coeffs.clone())
    }

    pub fn to_complex(&self) -> ComplexForm {
        BinaryForm {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect(),
        }
    }

    /// Exact value of the affine part at `z = p`.
    pub fn eval_affine(&self, p: &Rational) -> Rational {
        poly::eval(&self.coeffs, p)
    }

    /// Order of vanishing at the affine point `z = p` (`None` for the zero form).
    pub fn valuation_at(&self, p: &Rational) -> Option<usize> {
        poly::valuation_at(&self.coeffs, p)
    }

    /// Exact squarefreeness as a form: affine part squarefree and at most a simple root at ∞.
    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.multiplicity_at_infinity() <= 1 && poly::is_squarefree(&self.affine())
    }

    /// Exact: no common root on ℙ¹ (including ∞).
    pub fn is_coprime_to(&self, other: &RationalForm) -> bool {
        if self.multiplicity_at_infinity() > 0 && other.multiplicity_at_infinity() > 0 {
            return false;
        }
        poly::coprime(&self.affine(), &other.affine())
    }

    /// Root divisor with multiplicities from an exact squarefree decomposition.
    pub fn roots_projective(&self) -> Result<DivisorP1> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        let mut points = Vec::new();
        for (factor, mult) in poly::squarefree_decomposition(&self.affine()) {
            let c: Vec<Complex64> = poly::to_f64_scaled(&factor)
                .into_iter()
                .map(|x| Complex64::new(x, 0.0))
                .collect();
            for z in roots::aberth(&c)? {
                points.push((ProjectivePointP1::from_affine(z), mult as u32));
            }
        }
        let inf = self.multiplicity_at_infinity();
        if inf > 0 {
            points.push((ProjectivePointP1::infinity(), inf as u32));
        }
        Ok(DivisorP1 { points })
    }
}

impl ComplexForm {
    pub fn eval(&self, p: &ProjectivePointP1) -> Complex64 {
        let d = self.degree();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * p.z0.powu((d - k) as u32) * p.z1.powu(k as u32))
            .sum()
    }

    /// Root divisor; roots within [`CLUSTER_TOL`] chordal distance are merged
    /// and the cluster size becomes the multiplicity.
    pub fn roots_projective(&self) -> Result<DivisorP1> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        let top = self.affine_degree().expect("nonzero");
        let raw: Vec<ProjectivePointP1> = roots::aberth(&self.coeffs[..=top])?
            .into_iter()
            .map(ProjectivePointP1::from_affine)
            .collect();
        let mut points = cluster(&raw);
        let inf = self.multiplicity_at_infinity();
        if inf > 0 {
            points.push((ProjectivePointP1::infinity(), inf as u32));
        }
        Ok(DivisorP1 { points })
    }
}

fn cluster(raw: &[ProjectivePointP1]) -> Vec<(ProjectivePointP1, u32)> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if raw[i].chordal(&raw[j]) <= CLUSTER_TOL {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            // Average homogeneous coordinates after aligning phases to the first member.
            let first = raw[members[0]];
            let (mut s0, mut s1) = (Complex64::zero(), Complex64::zero());
            for &m in &members {
                let p = raw[m];
                let phase = first.z0.conj() * p.z0 + first.z1.conj() * p.z1;
                let align = if phase.norm() > 0.0 { phase.conj() / phase.norm() } else { Complex64::new(1.0, 0.0) };
                s0 += p.z0 * align;
                s1 += p.z1 * align;
            }
            (ProjectivePointP1::new(s0, s1).unwrap_or(first), members.len() as u32)
        })
        .collect()
}

/// Exact `(squarefree(f), coprime(f, g))` for rational forms.
pub fn squarefree_and_coprime(f: &RationalForm, g: &RationalForm) -> Result<(bool, bool)> {
    if f.is_zero() || g.is_zero() {
        return Err(Error::ZeroForm);
    }
    Ok((f.is_squarefree(), f.is_coprime_to(g)))
}

/// A point of ℙ¹ with unit-norm homogeneous coordinates whose first nonzero
/// coordinate is real and positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectivePointP1 {
    z0: Complex64,
    z1: Complex64,
}

impl ProjectivePointP1 {
    pub fn new(z0: Complex64, z1: Complex64) -> Option<Self> {
        let norm = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return None;
        }
        let lead = if z0 != Complex64::zero() { z0 } else { z1 };
        let phase = lead.conj() / lead.norm();
        Some(ProjectivePointP1 {
            z0: z0 * phase / norm,
            z1: z1 * phase / norm,
        })
    }

    pub fn from_affine(z: Complex64) -> Self {
        if !z.is_finite() {
            return Self::infinity();
        }
        Self::new(Complex64::new(1.0, 0.0), z).expect("nonzero first coordinate")
    }

    pub fn infinity() -> Self {
        ProjectivePointP1 {
            z0: Complex64::zero(),
            z1: Complex64::new(1.0, 0.0),
        }
    }

    pub fn coords(&self) -> (Complex64, Complex64) {
        (self.z0, self.z1)
    }

    pub fn is_infinity(&self) -> bool {
        self.z0 == Complex64::zero()
    }

    /// `Z1/Z0`, or `None` at infinity.
    pub fn affine(&self) -> Option<Complex64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.z1 / self.z0)
        }
    }

    /// Sine of the angle between the two lines in ℂ².
    pub fn chordal(&self, other: &ProjectivePointP1) -> f64 {
        (self.z0 * other.z1 - self.z1 * other.z0).norm()
    }
}

#[derive(Clone, Debug, Default)]
pub struct DivisorP1 {
    pub points: Vec<(ProjectivePointP1, u32)>,
}

impl DivisorP1 {
    pub fn degree(&self) -> u32 {
        self.points.iter().map(|(_, m)| m).sum()
    }

    pub fn is_reduced(&self) -> bool {
        self.points.iter().all(|(_, m)| *m == 1)
    }

    pub fn to_json(&self) -> DivisorJson {
        DivisorJson {
            points: self
                .points
                .iter()
                .map(|(p, m)| DivisorPointJson {
                    z: match p.affine() {
                        Some(z) => PointCoord::Affine([z.re, z.im]),
                        None => PointCoord::Infinity("inf".into()),
                    },
                    mult: *m,
                })
                .collect(),
            degree: self.degree(),
        }
    }

    pub fn from_json(j: &DivisorJson) -> Result<Self> {
        let points = j
            .points
            .iter()
            .map(|p| {
                let pt = match &p.z {
                    PointCoord::Affine([re, im]) => ProjectivePointP1::from_affine(Complex64::new(*re, *im)),
                    PointCoord::Infinity(s) if s == "inf" => ProjectivePointP1::infinity(),
                    PointCoord::Infinity(s) => {
                        return Err(Error::Parse(format!("bad divisor point {s:?}")))
                    }
                };
                Ok((pt, p.mult))
            })
            .collect::<Result<Vec<_>>>()?;
        let d = DivisorP1 { points };
        if d.degree() != j.degree {
            return Err(Error::Parse("divisor degree does not match its points".into()));
        }
        Ok(d)
    }
}

/// `{ "points": [{"z": [re, im] | "inf", "mult": int}], "degree": int }`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DivisorJson {
    pub points: Vec<DivisorPointJson>,
    pub degree: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DivisorPointJson {
    pub z: PointCoord,
    pub mult: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PointCoord {
    Affine([f64; 2]),
    Infinity(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rat, rat_frac};
    use num_integer::Integer;
    use proptest::prelude::*;

    fn qf(cs: &[i64]) -> RationalForm {
        RationalForm::new(cs.iter().map(|&c| rat(c)).collect()).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let f = ComplexForm::new(vec![c(0., 0.), c(1., 0.), c(0., 0.)]).unwrap(); // Z0 Z1
        assert_eq!(f.eval(&ProjectivePointP1::new(c(1., 0.), c(0., 0.)).unwrap()), c(0., 0.));
        let g = ComplexForm::new(vec![c(1., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        let p = ProjectivePointP1::from_affine(c(1., 0.));
        assert!((g.eval(&p) - c(1., 0.)).norm() < 1e-15);
        assert_eq!(ComplexForm::zero(3).eval(&p), c(0., 0.));
    }

    #[test]
    fn point_normalization() {
        let p = ProjectivePointP1::new(c(0., 2.), c(0., -2.)).unwrap();
        let (z0, z1) = p.coords();
        assert!((z0.norm_sqr() + z1.norm_sqr() - 1.0).abs() < 1e-14);
        assert_eq!(z0.im, 0.0);
        assert!(z0.re > 0.0);
        assert!(p.chordal(&ProjectivePointP1::from_affine(c(-1., 0.))) < 1e-15);
        assert!(ProjectivePointP1::new(c(0., 0.), c(0., 0.)).is_none());
    }

    fn find(d: &DivisorP1, z: Option<f64>) -> u32 {
        let target = match z {
            Some(x) => ProjectivePointP1::from_affine(c(x, 0.)),
            None => ProjectivePointP1::infinity(),
        };
        d.points
            .iter()
            .filter(|(p, _)| p.chordal(&target) < 1e-10)
            .map(|(_, m)| *m)
            .sum()
    }

    #[test]
    fn roots_examples() {
        // Z1^2 - Z0^2
        let d = qf(&[-1, 0, 1]).roots_projective().unwrap();
        assert_eq!((find(&d, Some(1.)), find(&d, Some(-1.)), d.degree()), (1, 1, 2));
        // Z0^3 has the single root (0, 1) of multiplicity 3
        let d = qf(&[1, 0, 0, 0]).roots_projective().unwrap();
        assert_eq!(d.points.len(), 1);
        assert_eq!(find(&d, None), 3);
        // Z0 (Z1^2 - Z0^2)
        let d = qf(&[-1, 0, 1, 0]).roots_projective().unwrap();
        assert_eq!((find(&d, Some(1.)), find(&d, Some(-1.)), find(&d, None)), (1, 1, 1));
        assert!(matches!(qf(&[0, 0]).roots_projective(), Err(Error::ZeroForm)));
    }

    #[test]
    fn exact_multiplicities() {
        // (z-2)^2 (z+1) z^0 as a degree-5 form: root at ∞ of multiplicity 2
        let a = poly::mul(&poly::mul(&[rat(-2), rat(1)], &[rat(-2), rat(1)]), &[rat(1), rat(1)]);
        let f = RationalForm::from_affine(5, &a).unwrap();
        let d = f.roots_projective().unwrap();
        assert_eq!((find(&d, Some(2.)), find(&d, Some(-1.)), find(&d, None)), (2, 1, 2));
    }

    #[test]
    fn complex_clustering() {
        // (z - 1)^2 (z + 3) in floats
        let f = ComplexForm::new(vec![c(3., 0.), c(-5., 0.), c(1., 0.), c(1., 0.)]).unwrap();
        let d = f.roots_projective().unwrap();
        assert_eq!(d.degree(), 3);
        let one = ProjectivePointP1::from_affine(c(1., 0.));
        let m: u32 = d.points.iter().filter(|(p, _)| p.chordal(&one) < 1e-6).map(|(_, m)| *m).sum();
        assert_eq!(m, 2);
    }

    #[test]
    fn transvectant_examples() {
        let f = qf(&[1, 2, 3, 4, 5]);
        assert!(transvectant_first(&f, &f).unwrap().is_zero());
        // Z0^4 and Z1^6 → 24 Z0^3 Z1^5
        let f = qf(&[1, 0, 0, 0, 0]);
        let mut g6 = vec![0; 7];
        g6[6] = 1;
        let w = transvectant_first(&f, &qf(&g6)).unwrap();
        let mut want = vec![0; 9];
        want[5] = 24;
        assert_eq!(w, qf(&want));
        // Z0^4 and Z0^5 Z1: affine m'FG' − n'GF' = 2, Jacobian affine part = hcf(4,6)·2 = 4
        let mut g = vec![0; 7];
        g[1] = 1;
        let w = transvectant_first(&f, &qf(&g)).unwrap();
        assert_eq!(w.affine(), vec![rat(4)]);
        assert_eq!(w.degree(), 8);
    }

    #[test]
    fn transvectant_rejects_constants() {
        assert!(transvectant_first(&qf(&[1]), &qf(&[1, 1])).is_err());
    }

    #[test]
    fn squarefree_and_coprime_examples() {
        assert_eq!(squarefree_and_coprime(&qf(&[-1, 0, 1]), &qf(&[1, 0])).unwrap(), (true, true));
        assert!(!squarefree_and_coprime(&qf(&[0, 1, 0, 0]), &qf(&[1, 0])).unwrap().0); // Z0^2 Z1
        assert!(!qf(&[0, 0, 1, 0]).is_squarefree()); // Z0 Z1^2: double root at z = 0
        assert_eq!(squarefree_and_coprime(&qf(&[0, 1, 0]), &qf(&[0, 1])).unwrap(), (true, false));
        assert!(squarefree_and_coprime(&qf(&[0, 0]), &qf(&[1])).is_err());
    }

    #[test]
    fn divisor_json_round_trip() {
        let d = qf(&[-1, 0, 1, 0]).roots_projective().unwrap();
        let j = d.to_json();
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"inf\""));
        let back = DivisorP1::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.degree(), 3);
    }

    fn arb_form(max_deg: usize) -> impl Strategy<Value = RationalForm> {
        (1..=max_deg).prop_flat_map(|d| {
            prop::collection::vec((-9i64..=9, 1i64..=3), d + 1).prop_map(|cs| {
                RationalForm::new(cs.into_iter().map(|(n, q)| rat_frac(n, q)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn root_multiplicities_sum_to_degree(f in arb_form(20)) {
            prop_assume!(!f.is_zero());
            let d = f.roots_projective().unwrap();
            prop_assert_eq!(d.degree() as usize, f.degree());
        }

        #[test]
        fn simple_roots_have_small_backward_error(f in arb_form(20)) {
            prop_assume!(!f.is_zero());
            let cf: Vec<Complex64> = poly::to_f64_scaled(&f.affine()).into_iter().map(|x| c(x, 0.)).collect();
            let d = f.roots_projective().unwrap();
            for (p, m) in &d.points {
                if let (Some(z), 1) = (p.affine(), m) {
                    prop_assert!(roots::backward_error(&cf, z) <= 1e-9);
                }
            }
        }

        #[test]
        fn transvectant_antisymmetric_bilinear(f in arb_form(6), g in arb_form(6), h in arb_form(6)) {
            prop_assume!(g.degree() == h.degree());
            let fg = transvectant_first(&f, &g).unwrap();
            let gf = transvectant_first(&g, &f).unwrap();
            prop_assert!((&fg + &gf).is_zero());
            let lhs = transvectant_first(&f, &(&g + &h)).unwrap();
            let rhs = &fg + &transvectant_first(&f, &h).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn jacobian_is_hcf_times_affine_transvectant(f in arb_form(8), g in arb_form(8)) {
            let (m, n) = (f.degree() as i64, g.degree() as i64);
            let hcf = m.gcd(&n);
            let (mp, np) = (m / hcf, n / hcf);
            let (fa, ga) = (f.affine(), g.affine());
            let affine = poly::sub(
                &poly::scale(&poly::mul(&fa, &poly::derivative(&ga)), &rat(mp)),
                &poly::scale(&poly::mul(&ga, &poly::derivative(&fa)), &rat(np)),
            );
            let w = transvectant_first(&f, &g).unwrap();
            prop_assert_eq!(w.affine(), poly::scale(&affine, &rat(hcf)));
        }
    }
}
