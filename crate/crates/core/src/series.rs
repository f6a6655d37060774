//! Exact rationals and truncated Laurent series in one local coordinate `q`
//! whose coefficients are taken modulo `t²`.
//!
//! A [`JetSeries`] stores, for each exponent `e` of `q`, the pair `(c₀, c₁)`
//! standing for `c₀ + c₁·t`. Products drop every `t²` contribution. Terms
//! above `high_cut` are discarded silently, but the series remembers the
//! highest exponent through which it is still exact, so a caller can ask for
//! a coefficient and get an error instead of a wrong answer.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"` or `"p/q"`; the result is reduced.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub const DEFAULT_LOW_CUT: i32 = -8;
pub const DEFAULT_HIGH_CUT: i32 = 12;

type Pair = (Rational, Rational);

fn pair_is_zero(p: &Pair) -> bool {
    p.0.is_zero() && p.1.is_zero()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSeries {
    terms: BTreeMap<i32, Pair>,
    low_cut: i32,
    high_cut: i32,
    /// `None` while nothing has been truncated; otherwise coefficients above
    /// this exponent are unreliable.
    valid_to: Option<i32>,
}

impl JetSeries {
    pub fn zero(low_cut: i32, high_cut: i32) -> Self {
        assert!(low_cut <= high_cut, "empty series window");
        JetSeries {
            terms: BTreeMap::new(),
            low_cut,
            high_cut,
            valid_to: None,
        }
    }

    pub fn zero_default() -> Self {
        Self::zero(DEFAULT_LOW_CUT, DEFAULT_HIGH_CUT)
    }

    /// `c·t^t_order·q^exponent` in the default window.
    pub fn monomial(c: Rational, exponent: i32, t_order: u8) -> Result<Self> {
        Self::zero_default().with_term(c, exponent, t_order)
    }

    pub fn one() -> Self {
        Self::monomial(Rational::one(), 0, 0).expect("0 is inside the default window")
    }

    /// Adds `c·t^t_order·q^exponent` to `self`.
    pub fn with_term(mut self, c: Rational, exponent: i32, t_order: u8) -> Result<Self> {
        if t_order > 1 {
            return Err(Error::UnsupportedSeries("t-order above 1"));
        }
        if exponent < self.low_cut {
            if c.is_zero() {
                return Ok(self);
            }
            return Err(Error::WindowUnderflow {
                exponent,
                low_cut: self.low_cut,
            });
        }
        if exponent > self.high_cut {
            if !c.is_zero() {
                self.mark_truncated(self.high_cut);
            }
            return Ok(self);
        }
        let slot = self
            .terms
            .entry(exponent)
            .or_insert_with(|| (Rational::zero(), Rational::zero()));
        if t_order == 0 {
            slot.0 += c;
        } else {
            slot.1 += c;
        }
        if pair_is_zero(slot) {
            self.terms.remove(&exponent);
        }
        Ok(self)
    }

    pub fn low_cut(&self) -> i32 {
        self.low_cut
    }

    pub fn high_cut(&self) -> i32 {
        self.high_cut
    }

    /// Highest exponent through which the stored coefficients are exact.
    pub fn valid_to(&self) -> i32 {
        self.valid_to.unwrap_or(self.high_cut)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Stored exponents, ascending, with their `(c₀, c₁)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational, &Rational)> {
        self.terms.iter().map(|(&e, (a, b))| (e, a, b))
    }

    fn min_exponent(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    fn mark_truncated(&mut self, at: i32) {
        self.valid_to = Some(self.valid_to.map_or(at, |v| v.min(at)));
    }

    pub fn coefficient(&self, exponent: i32, t_order: u8) -> Result<Rational> {
        if exponent < self.low_cut || exponent > self.high_cut {
            return Err(Error::OutOfWindow {
                exponent,
                low_cut: self.low_cut,
                high_cut: self.high_cut,
            });
        }
        if t_order > 1 {
            return Err(Error::UnsupportedSeries("t-order above 1"));
        }
        if let Some(v) = self.valid_to {
            if exponent > v {
                return Err(Error::WindowOverflow {
                    exponent,
                    valid_to: v,
                });
            }
        }
        Ok(self
            .terms
            .get(&exponent)
            .map(|p| if t_order == 0 { p.0.clone() } else { p.1.clone() })
            .unwrap_or_else(Rational::zero))
    }

    /// The `t⁰` part as a series (with zero `t¹` part).
    pub fn t0_part(&self) -> JetSeries {
        self.map_pairs(|(a, _)| (a.clone(), Rational::zero()))
    }

    /// The `t¹` coefficient, moved to `t⁰`.
    pub fn t1_part(&self) -> JetSeries {
        self.map_pairs(|(_, b)| (b.clone(), Rational::zero()))
    }

    fn map_pairs(&self, f: impl Fn(&Pair) -> Pair) -> JetSeries {
        let terms = self
            .terms
            .iter()
            .map(|(&e, p)| (e, f(p)))
            .filter(|(_, p)| !pair_is_zero(p))
            .collect();
        JetSeries {
            terms,
            low_cut: self.low_cut,
            high_cut: self.high_cut,
            valid_to: self.valid_to,
        }
    }

    pub fn scale(&self, c: &Rational) -> JetSeries {
        self.map_pairs(|(a, b)| (a * c, b * c))
    }

    pub fn neg(&self) -> JetSeries {
        self.map_pairs(|(a, b)| (-a, -b))
    }

    fn merged_window(&self, other: &JetSeries) -> (i32, i32) {
        let lo = self.low_cut.max(other.low_cut);
        let hi = self.high_cut.min(other.high_cut);
        assert!(lo <= hi, "incompatible series windows");
        (lo, hi)
    }

    pub fn add(&self, other: &JetSeries) -> Result<JetSeries> {
        let (lo, hi) = self.merged_window(other);
        let mut out = JetSeries::zero(lo, hi);
        out.valid_to = match (self.valid_to, other.valid_to) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        for src in [self, other] {
            for (&e, (a, b)) in &src.terms {
                out = out.with_term(a.clone(), e, 0)?.with_term(b.clone(), e, 1)?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &JetSeries) -> Result<JetSeries> {
        self.add(&other.neg())
    }

    /// Exact product modulo `t²`, truncated to the common window.
    pub fn mul(&self, other: &JetSeries) -> Result<JetSeries> {
        let (lo, hi) = self.merged_window(other);
        let mut acc: BTreeMap<i32, Pair> = BTreeMap::new();
        for (&e1, (a0, a1)) in &self.terms {
            for (&e2, (b0, b1)) in &other.terms {
                let slot = acc
                    .entry(e1 + e2)
                    .or_insert_with(|| (Rational::zero(), Rational::zero()));
                slot.0 += a0 * b0;
                slot.1 += a0 * b1 + a1 * b0;
            }
        }
        let mut out = JetSeries::zero(lo, hi);
        // Precision inherited from inputs: an unreliable tail of one factor
        // contaminates the product from (its valid_to + other's lowest exponent).
        let mut valid: Option<i32> = None;
        let mut bound = |v: i32| valid = Some(valid.map_or(v, |x: i32| x.min(v)));
        if let (Some(v), Some(m)) = (self.valid_to, other.min_exponent()) {
            bound(v + m);
        }
        if let (Some(v), Some(m)) = (other.valid_to, self.min_exponent()) {
            bound(v + m);
        }
        for (e, p) in acc {
            if pair_is_zero(&p) {
                continue;
            }
            if e < lo {
                return Err(Error::WindowUnderflow {
                    exponent: e,
                    low_cut: lo,
                });
            }
            if e > hi {
                bound(hi);
                continue;
            }
            out.terms.insert(e, p);
        }
        out.valid_to = valid;
        Ok(out)
    }

    /// Square root of `1 − u` for `u` divisible by `t`: `1 − u/2`.
    pub fn sqrt_one_minus(u: &JetSeries) -> Result<JetSeries> {
        if u.terms.values().any(|(a, _)| !a.is_zero()) {
            return Err(Error::UnsupportedSeries(
                "sqrt_one_minus needs an argument with zero t^0 part",
            ));
        }
        let one = JetSeries::zero(u.low_cut, u.high_cut).with_term(Rational::one(), 0, 0)?;
        let mut half = u.scale(&rat_frac(1, 2));
        half.valid_to = u.valid_to;
        one.sub(&half)
    }

    /// Integer power of a series whose `t⁰` part is a single monomial `c·q^k`:
    /// `(c·q^k + t·w)^n = cⁿ·q^{nk} + n·c^{n−1}·q^{(n−1)k}·t·w`, exact mod `t²`.
    pub fn powi(&self, n: i32) -> Result<JetSeries> {
        let lead: Vec<(i32, &Rational)> = self
            .terms
            .iter()
            .filter(|(_, p)| !p.0.is_zero())
            .map(|(&e, p)| (e, &p.0))
            .collect();
        let &[(k, c)] = lead.as_slice() else {
            return Err(Error::UnsupportedSeries(
                "powi needs a t^0 part that is a single monomial",
            ));
        };
        let c_pow = |m: i32| -> Rational {
            if m >= 0 {
                num_traits::pow(c.clone(), m as usize)
            } else {
                num_traits::pow(c.recip(), (-m) as usize)
            }
        };
        let mut out = JetSeries::zero(self.low_cut, self.high_cut)
            .with_term(c_pow(n), n * k, 0)?;
        let factor = rat(n as i64) * c_pow(n - 1);
        for (&e, (_, w)) in &self.terms {
            if !w.is_zero() {
                out = out.with_term(&factor * w, e + (n - 1) * k, 1)?;
            }
        }
        // A power of an exact series stays exact only if the window held every term.
        if let Some(v) = self.valid_to {
            out.mark_truncated(v + (n - 1) * k);
        }
        Ok(out)
    }
}

impl fmt::Display for JetSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, (a, b)) in &self.terms {
            for (c, t) in [(a, ""), (b, "t·")] {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    f.write_str(if c.is_negative() { " - " } else { " + " })?;
                } else if c.is_negative() {
                    f.write_str("-")?;
                }
                first = false;
                write!(f, "({}){}q^{}", c.abs(), t, e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(e: i32) -> JetSeries {
        JetSeries::monomial(rat(1), e, 0).unwrap()
    }

    fn tq(c: Rational, e: i32) -> JetSeries {
        JetSeries::monomial(c, e, 1).unwrap()
    }

    #[test]
    fn monomial_product() {
        // (1 + t q^-2) * q = q + t q^-1
        let a = JetSeries::one().add(&tq(rat(1), -2)).unwrap();
        let p = a.mul(&q(1)).unwrap();
        let want = q(1).add(&tq(rat(1), -1)).unwrap();
        assert_eq!(p, want);
        assert_eq!(p.coefficient(-1, 1).unwrap(), rat(1));
    }

    #[test]
    fn annihilation() {
        let a = q(1).sub(&q(-1)).unwrap();
        assert!(a.mul(&JetSeries::zero_default()).unwrap().is_zero());
    }

    #[test]
    fn t_squared_dropped() {
        let a = JetSeries::one().add(&tq(rat(1), 0)).unwrap();
        let sq = a.mul(&a).unwrap();
        assert_eq!(sq.coefficient(0, 0).unwrap(), rat(1));
        assert_eq!(sq.coefficient(0, 1).unwrap(), rat(2));
        assert_eq!(sq.terms().count(), 1);
    }

    #[test]
    fn sqrt_examples() {
        let s = JetSeries::sqrt_one_minus(&tq(rat(1), -2)).unwrap();
        assert_eq!(s.coefficient(0, 0).unwrap(), rat(1));
        assert_eq!(s.coefficient(-2, 1).unwrap(), rat_frac(-1, 2));

        let s = JetSeries::sqrt_one_minus(&JetSeries::zero_default()).unwrap();
        assert_eq!(s, JetSeries::one());

        let s = JetSeries::sqrt_one_minus(&tq(rat(3), 1)).unwrap();
        assert_eq!(s.coefficient(1, 1).unwrap(), rat_frac(-3, 2));
    }

    #[test]
    fn sqrt_rejects_nonzero_t0() {
        assert!(JetSeries::sqrt_one_minus(&q(1)).is_err());
    }

    #[test]
    fn coefficient_window() {
        let z = JetSeries::zero_default();
        assert_eq!(z.coefficient(3, 0).unwrap(), rat(0));
        assert!(matches!(z.coefficient(13, 0), Err(Error::OutOfWindow { .. })));
        assert!(matches!(z.coefficient(-9, 1), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn underflow_is_an_error() {
        let a = q(-5);
        assert!(matches!(a.mul(&a), Err(Error::WindowUnderflow { .. })));
    }

    #[test]
    fn truncation_is_tracked() {
        let a = q(7);
        let b = a.mul(&a).unwrap(); // q^14 dropped
        assert!(b.is_zero());
        assert_eq!(b.valid_to(), 12);
        let c = b.mul(&q(-4)).unwrap();
        assert!(matches!(c.coefficient(10, 0), Err(Error::WindowOverflow { .. })));
        assert_eq!(c.coefficient(8, 0).unwrap(), rat(0));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let v = q(1).add(&tq(rat_frac(-1, 2), -1)).unwrap();
        let cube = v.mul(&v).unwrap().mul(&v).unwrap();
        assert_eq!(v.powi(3).unwrap(), cube);
        let inv = v.powi(-1).unwrap();
        assert_eq!(inv.mul(&v).unwrap(), JetSeries::one());
        assert_eq!(v.powi(0).unwrap(), JetSeries::one());
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["3", "-7/4", "0", "12/8"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&parse_rational("12/8").unwrap()), "3/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn arb_series() -> impl Strategy<Value = JetSeries> {
        prop::collection::vec((-2i32..=3, 0u8..=1, -9i64..=9, 1i64..=4), 0..6).prop_map(|ts| {
            ts.into_iter().fold(JetSeries::zero_default(), |s, (e, t, n, d)| {
                s.with_term(rat_frac(n, d), e, t).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn sqrt_squares_back(ts in prop::collection::vec((-4i32..=4, -9i64..=9, 1i64..=5), 0..6)) {
            let u = ts.into_iter().fold(JetSeries::zero_default(), |s, (e, n, d)| {
                s.with_term(rat_frac(n, d), e, 1).unwrap()
            });
            let s = JetSeries::sqrt_one_minus(&u).unwrap();
            prop_assert_eq!(s.mul(&s).unwrap().add(&u).unwrap(), JetSeries::one());
        }
    }
}
