//! Residue calculus for plumbing deformations.
//!
//! A local 3-form `(q+v)·Σ b_{m,n} q^m v^n` has residue
//! `−½(q+v)·Σ b_{m,n} q^m v^{n−1}` along the exceptional curve. On the branch
//! `v = q·(1 − t·q⁻²)^{1/2}` this expands mod `t²` as `ω + t·η`. The chain is
//! evaluated here in exact jet arithmetic and compared with its closed forms
//!
//! ```text
//! ω = −Σ b_{m,n} q^{m+n}        η = Σ (2n−1)/4 · b_{m,n} · q^{m+n−2}
//! ```

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{format_rational, parse_rational, rat, rat_frac, JetSeries, Rational};

pub const DEFAULT_MAX_ORDER: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetCoefficients {
    b: BTreeMap<(u32, u32), Rational>,
    max_order: u32,
}

impl Default for JetCoefficients {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_ORDER)
    }
}

impl JetCoefficients {
    pub fn new(max_order: u32) -> Self {
        JetCoefficients {
            b: BTreeMap::new(),
            max_order,
        }
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Sets `b_{m,n}`; zero removes the entry.
    pub fn set(&mut self, m: u32, n: u32, c: Rational) -> Result<()> {
        if m + n > self.max_order {
            return Err(Error::InvalidArgument(format!(
                "b[{m},{n}] exceeds order {}",
                self.max_order
            )));
        }
        if c.is_zero() {
            self.b.remove(&(m, n));
        } else {
            self.b.insert((m, n), c);
        }
        Ok(())
    }

    pub fn with(mut self, m: u32, n: u32, c: Rational) -> Result<Self> {
        self.set(m, n, c)?;
        Ok(self)
    }

    pub fn get(&self, m: u32, n: u32) -> Rational {
        self.b.get(&(m, n)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &Rational)> {
        self.b.iter().map(|(&(m, n), c)| (m, n, c))
    }

    pub fn is_zero(&self) -> bool {
        self.b.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::new(self.max_order);
        for (m, n, v) in self.iter() {
            out.set(m, n, v * c).expect("same support");
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::new(self.max_order.max(other.max_order));
        for (m, n, v) in self.iter().chain(other.iter()) {
            let sum = out.get(m, n) + v;
            out.set(m, n, sum).expect("order is the max of both");
        }
        out
    }

    /// Every `b_{m,n}` with `m + n ≤ max_order` drawn uniformly from `[−bound, bound]`.
    pub fn random(max_order: u32, bound: i64, rng: &mut ChaCha8Rng) -> Self {
        let mut out = Self::new(max_order);
        for total in 0..=max_order {
            for m in 0..=total {
                out.set(m, total - m, rat(rng.gen_range(-bound..=bound)))
                    .expect("inside order");
            }
        }
        out
    }

    /// `ω(a) = −b_{0,0}`.
    pub fn omega_at_point(&self) -> Rational {
        -self.get(0, 0)
    }

    pub fn to_json(&self) -> PlumbJson {
        PlumbJson {
            b: self.iter().map(|(m, n, c)| (m, n, format_rational(c))).collect(),
            max_order: Some(self.max_order),
        }
    }

    pub fn from_json(j: &PlumbJson) -> Result<Self> {
        let order = j
            .max_order
            .unwrap_or_else(|| j.b.iter().map(|(m, n, _)| m + n).max().unwrap_or(0).max(DEFAULT_MAX_ORDER));
        let mut out = Self::new(order);
        for (m, n, c) in &j.b {
            let sum = out.get(*m, *n) + parse_rational(c)?;
            out.set(*m, *n, sum)?;
        }
        Ok(out)
    }
}

/// `{ "b": [[m, n, "p/q"], …] }`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlumbJson {
    pub b: Vec<(u32, u32, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResiduePair {
    pub omega: JetSeries,
    pub eta: JetSeries,
}

fn q_power(e: i32) -> Result<JetSeries> {
    JetSeries::monomial(Rational::one(), e, 0)
}

/// Expands the residue chain and splits it as `ω + t·η`.
pub fn residue_pair(b: &JetCoefficients) -> Result<ResiduePair> {
    // v = q·(1 − t·q⁻²)^{1/2}
    let u = JetSeries::monomial(Rational::one(), -2, 1)?;
    let v = q_power(1)?.mul(&JetSeries::sqrt_one_minus(&u)?)?;
    let q_plus_v = q_power(1)?.add(&v)?;
    let mut sum = JetSeries::zero_default();
    for (m, n, c) in b.iter() {
        let term = q_power(m as i32)?.mul(&v.powi(n as i32 - 1)?)?.scale(c);
        sum = sum.add(&term)?;
    }
    let full = q_plus_v.mul(&sum)?.scale(&rat_frac(-1, 2));
    let top = b.max_order as i32;
    if full.valid_to() < top {
        return Err(Error::WindowOverflow {
            exponent: top,
            valid_to: full.valid_to(),
        });
    }
    Ok(ResiduePair {
        omega: full.t0_part(),
        eta: full.t1_part(),
    })
}

/// The closed forms, written down directly from `b`.
pub fn closed_forms(b: &JetCoefficients) -> Result<ResiduePair> {
    let mut omega = JetSeries::zero_default();
    let mut eta = JetSeries::zero_default();
    for (m, n, c) in b.iter() {
        let e = (m + n) as i32;
        omega = omega.with_term(-c.clone(), e, 0)?;
        eta = eta.with_term(rat_frac(2 * n as i64 - 1, 4) * c, e - 2, 0)?;
    }
    Ok(ResiduePair { omega, eta })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub series: &'static str,
    pub exponent: i32,
    pub chain: String,
    pub closed_form: String,
}

fn first_difference(name: &'static str, a: &JetSeries, b: &JetSeries) -> Result<Option<Discrepancy>> {
    let lo = a.low_cut().max(b.low_cut());
    let hi = a.valid_to().min(b.valid_to());
    for e in lo..=hi {
        let (x, y) = (a.coefficient(e, 0)?, b.coefficient(e, 0)?);
        if x != y {
            return Ok(Some(Discrepancy {
                series: name,
                exponent: e,
                chain: format_rational(&x),
                closed_form: format_rational(&y),
            }));
        }
    }
    Ok(None)
}

/// First exponent where the chain and the closed forms disagree, if any.
pub fn check_closed_forms(b: &JetCoefficients) -> Result<Option<Discrepancy>> {
    let chain = residue_pair(b)?;
    let closed = closed_forms(b)?;
    if let Some(d) = first_difference("omega", &chain.omega, &closed.omega)? {
        return Ok(Some(d));
    }
    first_difference("eta", &chain.eta, &closed.eta)
}

/// Coefficient of `q⁻²` in `η`.
pub fn leading_coefficient(eta: &JetSeries) -> Result<Rational> {
    eta.coefficient(-2, 0)
}

/// Coefficient of `q⁻¹` in `η`.
pub fn residue_coefficient(eta: &JetSeries) -> Result<Rational> {
    eta.coefficient(-1, 0)
}

/// `η` starts with `¼·ω(a)·q⁻²` and nothing below.
pub fn check_leading_term(b: &JetCoefficients) -> Result<bool> {
    let pair = residue_pair(b)?;
    let below = pair.eta.terms().all(|(e, c0, _)| e >= -2 || c0.is_zero());
    Ok(below && leading_coefficient(&pair.eta)? == rat_frac(1, 4) * b.omega_at_point())
}

/// The `q⁻¹` coefficient of `η` is `(b_{0,1} − b_{1,0})/4`.
pub fn check_residue_law(b: &JetCoefficients) -> Result<bool> {
    let pair = residue_pair(b)?;
    Ok(residue_coefficient(&pair.eta)? == (b.get(0, 1) - b.get(1, 0)) * rat_frac(1, 4))
}

/// Whether `η^{(j)} = ω^{(j)}(a)·η_a` for every entry, where `η_a` is the `η`
/// of the first entry with `b_{0,0} ≠ 0`, normalized to `ω(a) = 1`.
pub fn check_eta_proportionality(list: &[JetCoefficients]) -> Result<bool> {
    let etas = list
        .iter()
        .map(|b| residue_pair(b).map(|p| p.eta))
        .collect::<Result<Vec<_>>>()?;
    let reference = list
        .iter()
        .zip(&etas)
        .find(|(b, _)| !b.get(0, 0).is_zero())
        .map(|(b, eta)| eta.scale(&b.omega_at_point().recip()));
    for (b, eta) in list.iter().zip(&etas) {
        let predicted = match &reference {
            Some(eta_a) => eta_a.scale(&b.omega_at_point()),
            None => JetSeries::zero_default(),
        };
        if first_difference("eta", eta, &predicted)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the chain is additive on the given pair.
pub fn check_linearity(a: &JetCoefficients, b: &JetCoefficients) -> Result<bool> {
    let (pa, pb, pab) = (residue_pair(a)?, residue_pair(b)?, residue_pair(&a.add(b))?);
    Ok(pa.omega.add(&pb.omega)? == pab.omega && pa.eta.add(&pb.eta)? == pab.eta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResult {
    pub identity: &'static str,
    pub passed: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_discrepancy: Option<Discrepancy>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidueAudit {
    pub b01: String,
    pub b10: String,
    pub residue: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlumbReport {
    pub order: u32,
    pub trials: usize,
    pub seed: u64,
    pub identities: Vec<IdentityResult>,
    pub residues: Vec<ResidueAudit>,
    pub all_passed: bool,
}

/// Runs every identity on `trials` random coefficient sets with entries in `[−9, 9]`.
pub fn verify_random(order: u32, trials: usize, seed: u64) -> Result<PlumbReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closed = IdentityResult {
        identity: "closed_forms",
        passed: 0,
        failed: 0,
        first_discrepancy: None,
    };
    let mut leading = IdentityResult {
        identity: "leading_term",
        ..closed.clone()
    };
    let mut residue = IdentityResult {
        identity: "residue_law",
        ..closed.clone()
    };
    let mut linear = IdentityResult {
        identity: "linearity",
        ..closed.clone()
    };
    let mut prop = IdentityResult {
        identity: "eta_proportionality",
        ..closed.clone()
    };
    let tally = |r: &mut IdentityResult, ok: bool| {
        if ok {
            r.passed += 1
        } else {
            r.failed += 1
        }
    };
    let mut residues = Vec::with_capacity(trials);
    for _ in 0..trials {
        let b = JetCoefficients::random(order, 9, &mut rng);
        match check_closed_forms(&b)? {
            None => tally(&mut closed, true),
            Some(d) => {
                tally(&mut closed, false);
                closed.first_discrepancy.get_or_insert(d);
            }
        }
        tally(&mut leading, check_leading_term(&b)?);
        tally(&mut residue, check_residue_law(&b)?);
        let other = JetCoefficients::random(order, 9, &mut rng);
        tally(&mut linear, check_linearity(&b, &other)?);
        let mut base = b.clone();
        if base.get(0, 0).is_zero() {
            base.set(0, 0, rat(1))?;
        }
        let family: Vec<JetCoefficients> = (0..5)
            .map(|_| base.scale(&rat_frac(rng.gen_range(-9..=9), rng.gen_range(1..=5))))
            .collect();
        tally(&mut prop, check_eta_proportionality(&family)?);
        let eta = residue_pair(&b)?.eta;
        residues.push(ResidueAudit {
            b01: format_rational(&b.get(0, 1)),
            b10: format_rational(&b.get(1, 0)),
            residue: format_rational(&residue_coefficient(&eta)?),
        });
    }
    let identities = vec![closed, leading, residue, linear, prop];
    Ok(PlumbReport {
        order,
        trials,
        seed,
        all_passed: identities.iter().all(|i| i.failed == 0),
        identities,
        residues,
    })
}
