//! The ramification divisor `Z` of the classifying morphism, as the zero
//! divisor of the first transvectant `W` of `(g₄, g₆)`.
//!
//! `W` is a form of degree `10·dL − 2`, the degree of `10L + K_C` on ℙ¹. On the
//! general locus `div W = Z`.

use crate::binform::{poly, DivisorP1, RationalForm};
use crate::error::{Error, Result};
use crate::surface::{is_general_exact, GeneralityReport, Invariants, WeierstrassSurface};

#[derive(Clone, Debug)]
pub struct RamificationDivisor {
    pub divisor: DivisorP1,
    pub form: RationalForm,
    pub total_degree: u32,
}

pub fn ramification_divisor(s: &WeierstrassSurface) -> Result<RamificationDivisor> {
    let form = s.ramification_form();
    if form.is_zero() {
        return Err(Error::Isotrivial);
    }
    let expected = 10 * s.dl() as usize - 2;
    assert_eq!(form.degree(), expected, "transvectant has degree 10 dL - 2");
    let divisor = form.roots_projective()?;
    assert_eq!(divisor.degree() as usize, expected, "root count equals degree");
    Ok(RamificationDivisor {
        total_degree: divisor.degree(),
        divisor,
        form,
    })
}

/// (a) all fibers I₁, (b) `W` squarefree, (c) `W` coprime to `Δ`; all exact.
pub fn is_general(s: &WeierstrassSurface) -> GeneralityReport {
    is_general_exact(s)
}

/// Points where `g₄` and `Δ` vanish together: there the multiplicity of
/// `div W` is not certified to be that of the stacky ramification divisor.
pub fn multiplicity_warnings(s: &WeierstrassSurface) -> Vec<String> {
    let Ok(delta) = s.discriminant() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let shared = poly::gcd(&s.g4().affine(), &delta.affine());
    if !poly::is_constant(&shared) {
        out.push(format!(
            "g4 and the discriminant share {} affine root(s); ramification multiplicities there are not certified",
            poly::degree(&shared).unwrap_or(0)
        ));
    }
    if s.g4().multiplicity_at_infinity() > 0 && delta.multiplicity_at_infinity() > 0 {
        out.push("g4 and the discriminant both vanish at infinity".into());
    }
    out
}

/// `(N, deg(10H − 9K_C), deg(10L + K_C))` for a canonical curve of genus `q`:
/// `deg H = h + q − 1`, `deg K_C = 2q − 2`, `deg L = h + 1 − q`.
pub fn schottky_degrees(h: i64, q: i64) -> (i64, i64, i64) {
    let inv = Invariants::from_genera(h, q);
    let deg_h = h + q - 1;
    let deg_k = 2 * q - 2;
    let deg_l = inv.chi;
    (inv.n, 10 * deg_h - 9 * deg_k, 10 * deg_l + deg_k)
}

/// `deg Z` agrees with both degree formulas for the class of `Z`.
pub fn schottky_degree_check(s: &WeierstrassSurface) -> Result<bool> {
    let z = ramification_divisor(s)?;
    let (n, via_h, via_l) = schottky_degrees(s.h(), s.q() as i64);
    let deg = z.total_degree as i64;
    Ok(deg == n && deg == via_h && deg == via_l && z.form.degree() as i64 == deg)
}
