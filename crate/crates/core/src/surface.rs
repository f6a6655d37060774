//! Weierstrass models `y² = 4x³ − g₄x − g₆` of Jacobian elliptic surfaces over ℙ¹.
//!
//! `g₄` and `g₆` are binary forms of degrees `4·dL` and `6·dL` with exact
//! rational coefficients, so every genericity predicate here is decided
//! exactly. Floats only appear when roots are located for reporting.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binform::{poly, transvectant_first, ProjectivePointP1, RationalForm};
use crate::error::{Error, Result};
use crate::series::{format_rational, parse_rational, rat, rat_frac, Rational};

pub const COEFF_RANGE: i64 = 20;
pub const REJECTION_BUDGET: usize = 1000;

/// Numerical invariants determined by `(h, q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    pub h: i64,
    pub q: i64,
    pub chi: i64,
    #[serde(rename = "N")]
    pub n: i64,
    pub c2: i64,
    pub deg_phi: i64,
    pub deg_canonical_curve: i64,
}

impl Invariants {
    pub fn from_genera(h: i64, q: i64) -> Self {
        let chi = h + 1 - q;
        Invariants {
            h,
            q,
            chi,
            n: 10 * h + 8 * (1 - q),
            c2: 12 * chi,
            deg_phi: 24 * chi,
            deg_canonical_curve: h + q - 1,
        }
    }

    /// `h^{1,1} = 10χ + 2q`.
    pub fn h11(&self) -> i64 {
        10 * self.chi + 2 * self.q
    }

    /// `h ≥ q + 3` and `8h > 10(q − 1)`.
    pub fn passes_gate(&self) -> bool {
        self.h >= self.q + 3 && 8 * self.h > 10 * (self.q - 1)
    }
}

pub fn check_gate(h: i64, q: i64) -> Result<()> {
    if Invariants::from_genera(h, q).passes_gate() {
        Ok(())
    } else {
        Err(Error::Gate { h, q })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassSurface {
    q: u32,
    dl: u32,
    g4: RationalForm,
    g6: RationalForm,
}

impl WeierstrassSurface {
    pub fn new(q: u32, dl: u32, g4: RationalForm, g6: RationalForm) -> Result<Self> {
        if q != 0 {
            return Err(Error::UnsupportedGenus(q));
        }
        if dl == 0 {
            return Err(Error::InvalidSurface("deg L must be positive".into()));
        }
        if g4.degree() != 4 * dl as usize || g6.degree() != 6 * dl as usize {
            return Err(Error::InvalidSurface(format!(
                "g4, g6 must have degrees {}, {} (got {}, {})",
                4 * dl,
                6 * dl,
                g4.degree(),
                g6.degree()
            )));
        }
        Ok(WeierstrassSurface { q, dl, g4, g6 })
    }

    /// Surface over ℙ¹ from affine polynomials (ascending in `z`).
    pub fn from_affine(dl: u32, g4: &[Rational], g6: &[Rational]) -> Result<Self> {
        let g4 = RationalForm::from_affine(4 * dl as usize, g4)?;
        let g6 = RationalForm::from_affine(6 * dl as usize, g6)?;
        Self::new(0, dl, g4, g6)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dl(&self) -> u32 {
        self.dl
    }

    /// Geometric genus `h = dL − 1 + q`.
    pub fn h(&self) -> i64 {
        self.dl as i64 - 1 + self.q as i64
    }

    pub fn g4(&self) -> &RationalForm {
        &self.g4
    }

    pub fn g6(&self) -> &RationalForm {
        &self.g6
    }

    pub fn invariants(&self) -> Invariants {
        Invariants::from_genera(self.h(), self.q as i64)
    }

    /// `Δ = g₄³ − 27·g₆²`, of degree `12·dL`.
    pub fn discriminant(&self) -> Result<RationalForm> {
        let d = &self.g4.pow(3) - &self.g6.pow(2).scale(&rat(27));
        if d.is_zero() {
            return Err(Error::ZeroDiscriminant);
        }
        Ok(d)
    }

    /// The first transvectant (Jacobian determinant) of `(g₄, g₆)`.
    pub fn ramification_form(&self) -> RationalForm {
        transvectant_first(&self.g4, &self.g6).expect("g4, g6 have positive degree")
    }

    pub fn classify_fibers(&self) -> Result<FiberReport> {
        let delta = self.discriminant()?;
        let g4a = self.g4.affine();
        let mut fibers = Vec::new();
        for (factor, mult) in poly::squarefree_decomposition(&delta.affine()) {
            // Roots of gcd(factor, g4) are where g4 also vanishes.
            let shared = poly::gcd(&factor, &g4a);
            let rest = poly::exact_div(&factor, &shared);
            for (part, additive) in [(shared, true), (rest, false)] {
                if poly::is_constant(&part) {
                    continue;
                }
                let probe = RationalForm::new(part)?;
                for (point, _) in probe.roots_projective()?.points {
                    fibers.push(Fiber::new(point, mult as u32, additive));
                }
            }
        }
        let at_inf = delta.multiplicity_at_infinity() as u32;
        if at_inf > 0 {
            let g4_zero = self.g4.multiplicity_at_infinity() > 0;
            fibers.push(Fiber::new(ProjectivePointP1::infinity(), at_inf, g4_zero));
        }
        Ok(FiberReport::new(fibers))
    }

    pub fn to_json(&self) -> SurfaceJson {
        SurfaceJson {
            q: self.q,
            dl: self.dl,
            g4: self.g4.coeffs().iter().map(format_rational).collect(),
            g6: self.g6.coeffs().iter().map(format_rational).collect(),
        }
    }

    pub fn from_json(j: &SurfaceJson) -> Result<Self> {
        let parse = |v: &[String]| -> Result<RationalForm> {
            RationalForm::new(v.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?)
        };
        Self::new(j.q, j.dl, parse(&j.g4)?, parse(&j.g6)?)
    }
}

/// `{ "q": 0, "dL": int, "g4": ["p/q", …], "g6": […] }`, coefficients ascending in the `Z1` exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceJson {
    pub q: u32,
    #[serde(rename = "dL")]
    pub dl: u32,
    pub g4: Vec<String>,
    pub g6: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kodaira {
    /// Multiplicative fiber, a cycle of `n` rational curves.
    I(u32),
    AdditiveOther,
}

#[derive(Clone, Debug)]
pub struct Fiber {
    pub point: ProjectivePointP1,
    pub delta_val: u32,
    pub g4_val_zero: bool,
    pub kodaira: Kodaira,
}

impl Fiber {
    fn new(point: ProjectivePointP1, delta_val: u32, g4_val_zero: bool) -> Self {
        let kodaira = if g4_val_zero {
            Kodaira::AdditiveOther
        } else {
            Kodaira::I(delta_val)
        };
        Fiber {
            point,
            delta_val,
            g4_val_zero,
            kodaira,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FiberReport {
    pub fibers: Vec<Fiber>,
    pub all_i1: bool,
    pub i2_count: usize,
}

impl FiberReport {
    fn new(fibers: Vec<Fiber>) -> Self {
        let all_i1 = fibers.iter().all(|f| f.kodaira == Kodaira::I(1));
        let i2_count = fibers.iter().filter(|f| f.kodaira == Kodaira::I(2)).count();
        FiberReport {
            fibers,
            all_i1,
            i2_count,
        }
    }

    pub fn total_delta(&self) -> u32 {
        self.fibers.iter().map(|f| f.delta_val).sum()
    }
}

fn random_affine(rng: &mut ChaCha8Rng, degree: usize) -> Vec<Rational> {
    let mut c: Vec<Rational> = (0..=degree)
        .map(|_| rat(rng.gen_range(-COEFF_RANGE..=COEFF_RANGE)))
        .collect();
    // Exact top degree.
    while c[degree].is_zero() {
        c[degree] = rat(rng.gen_range(-COEFF_RANGE..=COEFF_RANGE));
    }
    c
}

fn gated_dl(h: i64) -> Result<u32> {
    check_gate(h, 0)?;
    u32::try_from(h + 1).map_err(|_| Error::InvalidArgument(format!("h = {h} too large")))
}

/// Exact genericity test used by the random constructor: Δ squarefree (hence
/// every singular fiber is I₁), the ramification form squarefree and coprime to Δ.
pub fn is_general_exact(s: &WeierstrassSurface) -> GeneralityReport {
    let delta = s.discriminant().ok();
    let w = s.ramification_form();
    let all_i1 = delta.as_ref().is_some_and(|d| d.is_squarefree());
    let w_reduced = !w.is_zero() && w.is_squarefree();
    let disjoint = match &delta {
        Some(d) if !w.is_zero() => w.is_coprime_to(d),
        _ => false,
    };
    GeneralityReport {
        all_i1,
        w_reduced,
        disjoint_from_delta: disjoint,
    }
}

/// Which clauses of the genericity predicate hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralityReport {
    /// (a) every singular fiber is of type I₁.
    pub all_i1: bool,
    /// (b) the ramification form is squarefree.
    pub w_reduced: bool,
    /// (c) the ramification form and Δ have no common root.
    pub disjoint_from_delta: bool,
}

impl GeneralityReport {
    pub fn is_general(&self) -> bool {
        self.all_i1 && self.w_reduced && self.disjoint_from_delta
    }

    pub fn failed_clauses(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.all_i1 {
            out.push("a");
        }
        if !self.w_reduced {
            out.push("b");
        }
        if !self.disjoint_from_delta {
            out.push("c");
        }
        out
    }
}

/// Random surface with integer coefficients in `[−20, 20]` whose fibers are all
/// I₁ and whose ramification divisor is reduced and disjoint from `div Δ`.
pub fn make_random_general(h: i64, seed: u64) -> Result<WeierstrassSurface> {
    let dl = gated_dl(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_BUDGET {
        let g4 = random_affine(&mut rng, 4 * dl as usize);
        let g6 = random_affine(&mut rng, 6 * dl as usize);
        let s = WeierstrassSurface::from_affine(dl, &g4, &g6)?;
        if is_general_exact(&s).is_general() {
            return Ok(s);
        }
    }
    Err(Error::RejectionBudget(REJECTION_BUDGET))
}

/// Hermite interpolant of degree `< 2r` with prescribed values and first
/// derivatives at distinct points, by exact Gaussian elimination.
fn hermite(points: &[Rational], values: &[Rational], slopes: &[Rational]) -> Vec<Rational> {
    let n = 2 * points.len();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        let mut val = Vec::with_capacity(n + 1);
        let mut der = Vec::with_capacity(n + 1);
        for k in 0..n {
            val.push(num_traits::pow(p.clone(), k));
            der.push(if k == 0 {
                Rational::zero()
            } else {
                rat(k as i64) * num_traits::pow(p.clone(), k - 1)
            });
        }
        val.push(values[i].clone());
        der.push(slopes[i].clone());
        rows.push(val);
        rows.push(der);
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !rows[r][col].is_zero())
            .expect("confluent Vandermonde system at distinct points is nonsingular");
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for x in rows[col].iter_mut() {
            *x *= &inv;
        }
        let pivot = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot).skip(col) {
                    *x -= &f * p;
                }
            }
        }
    }
    rows.into_iter().map(|r| r[n].clone()).collect()
}

fn check_points(points: &[Rational]) -> Result<()> {
    if points.len() > 4 {
        return Err(Error::InvalidArgument(format!(
            "at most 4 prescribed points, got {}",
            points.len()
        )));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].contains(a) {
            return Err(Error::InvalidArgument(format!(
                "prescribed points must be distinct ({} repeats)",
                format_rational(a)
            )));
        }
    }
    Ok(())
}

/// `Hermite(values, slopes) + Π(z − pᵢ)²·R` with `R` random of exact degree `deg − 2r`.
fn jet_constrained(
    rng: &mut ChaCha8Rng,
    degree: usize,
    points: &[Rational],
    values: &[Rational],
    slopes: &[Rational],
) -> Vec<Rational> {
    let r = points.len();
    assert!(2 * r <= degree, "not enough interpolation freedom");
    let base = hermite(points, values, slopes);
    let mut square = vec![Rational::one()];
    for p in points {
        square = poly::mul(&square, &[-p.clone(), Rational::one()]);
        square = poly::mul(&square, &[-p.clone(), Rational::one()]);
    }
    let fill = random_affine(rng, degree - 2 * r);
    poly::add(&base, &poly::mul(&square, &fill))
}

/// Surface with fibers of type I₂ at the prescribed affine points.
///
/// At each point the jets `g₄ = a₀ + a₁z + …`, `g₆ = b₀ + b₁z + …` are set to
/// `a₀ = 3s²`, `b₀ = s³`, `b₁ = a₁s/2`, so `a₀³ = 27b₀²` and `2a₀b₁ = 3a₁b₀`.
pub fn make_with_i2(h: i64, points: &[Rational], seed: u64) -> Result<WeierstrassSurface> {
    let dl = gated_dl(h)?;
    check_points(points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_BUDGET {
        let mut a0 = Vec::new();
        let mut a1 = Vec::new();
        let mut b0 = Vec::new();
        let mut b1 = Vec::new();
        for _ in points {
            let mut num = 0;
            while num == 0 {
                num = rng.gen_range(-5..=5);
            }
            let s = rat_frac(num, rng.gen_range(1..=3));
            let slope = rat(rng.gen_range(-COEFF_RANGE..=COEFF_RANGE));
            a0.push(rat(3) * &s * &s);
            b0.push(&s * &s * &s);
            b1.push(&slope * &s / rat(2));
            a1.push(slope);
        }
        let g4 = jet_constrained(&mut rng, 4 * dl as usize, points, &a0, &a1);
        let g6 = jet_constrained(&mut rng, 6 * dl as usize, points, &b0, &b1);
        let s = WeierstrassSurface::from_affine(dl, &g4, &g6)?;
        let Ok(delta) = s.discriminant() else { continue };
        let w = s.ramification_form();
        if w.is_zero() {
            continue;
        }
        let exact_i2 = points.iter().all(|p| {
            delta.valuation_at(p) == Some(2) && !s.g4.eval_affine(p).is_zero() && w.eval_affine(p).is_zero()
        });
        if exact_i2 {
            return Ok(s);
        }
    }
    Err(Error::RejectionBudget(REJECTION_BUDGET))
}

/// Surface where `g₄` has a simple zero at `p` and `g₆(p) ≠ 0` (so `j = 0`
/// there), used to probe ramification of the classifying map at `j = 0`.
pub fn make_with_simple_g4_zero(h: i64, p: &Rational, seed: u64) -> Result<WeierstrassSurface> {
    let dl = gated_dl(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REJECTION_BUDGET {
        let rest = random_affine(&mut rng, 4 * dl as usize - 1);
        if poly::eval(&rest, p).is_zero() {
            continue;
        }
        let g4 = poly::mul(&[-p.clone(), Rational::one()], &rest);
        let g6 = random_affine(&mut rng, 6 * dl as usize);
        if poly::eval(&g6, p).is_zero() {
            continue;
        }
        let s = WeierstrassSurface::from_affine(dl, &g4, &g6)?;
        if s.discriminant().is_ok() && !s.ramification_form().is_zero() {
            return Ok(s);
        }
    }
    Err(Error::RejectionBudget(REJECTION_BUDGET))
}

impl std::fmt::Display for Kodaira {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::AdditiveOther => f.write_str("additive"),
        }
    }
}
