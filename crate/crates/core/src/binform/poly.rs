//! Dense univariate polynomials over ℚ, coefficients ascending.
//!
//! gcd questions go through a modular certificate first: if `gcd(f mod p, g mod p)`
//! is constant for a prime not dividing the leading coefficient of the primitive
//! integer form of `f`, then `gcd(f, g)` is constant over ℚ. Only when every
//! prime fails do we fall back to an exact primitive remainder sequence.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::series::{rat, Rational};

pub type QPoly = Vec<Rational>;

const PRIMES: [u64; 4] = [2_147_483_647, 2_147_483_629, 2_147_483_587, 2_147_483_579];

pub fn trim(mut p: QPoly) -> QPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Degree of `p`, `None` for the zero polynomial.
pub fn degree(p: &[Rational]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn is_constant(p: &[Rational]) -> bool {
    degree(p).unwrap_or(0) == 0
}

pub fn add(a: &[Rational], b: &[Rational]) -> QPoly {
    let n = a.len().max(b.len());
    let z = Rational::zero();
    trim((0..n)
        .map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z))
        .collect())
}

pub fn sub(a: &[Rational], b: &[Rational]) -> QPoly {
    let n = a.len().max(b.len());
    let z = Rational::zero();
    trim((0..n)
        .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
        .collect())
}

pub fn mul(a: &[Rational], b: &[Rational]) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn scale(a: &[Rational], c: &Rational) -> QPoly {
    trim(a.iter().map(|x| x * c).collect())
}

pub fn derivative(a: &[Rational]) -> QPoly {
    trim(a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * rat(k as i64))
        .collect())
}

pub fn eval(a: &[Rational], x: &Rational) -> Rational {
    a.iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Coefficients of `a(x + p)`, i.e. the Taylor jet of `a` at `p`.
pub fn taylor_shift(a: &[Rational], p: &Rational) -> QPoly {
    // Repeated synthetic division.
    let mut c: QPoly = a.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = &c[j + 1] * p;
            c[j] += t;
        }
    }
    trim(c)
}

/// Order of vanishing of `a` at the rational point `p` (`None` for `a = 0`).
pub fn valuation_at(a: &[Rational], p: &Rational) -> Option<usize> {
    taylor_shift(a, p).iter().position(|c| !c.is_zero())
}

/// Exact division with remainder over ℚ.
pub fn divrem(a: &[Rational], b: &[Rational]) -> (QPoly, QPoly) {
    let db = degree(b).expect("division by the zero polynomial");
    let mut r = trim(a.to_vec());
    let lead_inv = b[db].recip();
    let mut quo = vec![Rational::zero(); r.len().saturating_sub(db).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] * &lead_inv;
        let shift = dr - db;
        for (k, bk) in b.iter().enumerate().take(db + 1) {
            r[shift + k] -= &c * bk;
        }
        r[dr] = Rational::zero();
        quo[shift] = c;
        r = trim(r);
    }
    (trim(quo), r)
}

pub fn exact_div(a: &[Rational], b: &[Rational]) -> QPoly {
    let (q, r) = divrem(a, b);
    debug_assert!(r.is_empty(), "inexact polynomial division");
    q
}

pub fn monic(a: &[Rational]) -> QPoly {
    match degree(a) {
        None => Vec::new(),
        Some(d) => {
            let inv = a[d].recip();
            trim(a.iter().map(|c| c * &inv).collect())
        }
    }
}

/// Primitive integer polynomial with positive leading coefficient proportional to `a`.
pub fn to_primitive_integer(a: &[Rational]) -> Vec<BigInt> {
    let a = trim(a.to_vec());
    if a.is_empty() {
        return Vec::new();
    }
    let l = a
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = a
        .iter()
        .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
        .collect();
    primitive(ints)
}

fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    let Some(last) = p.last() else { return p };
    let neg = last.is_negative();
    let g = p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() {
        return p;
    }
    for c in p.iter_mut() {
        *c /= &g;
        if neg {
            *c = -&*c;
        }
    }
    p
}

fn int_degree(p: &[BigInt]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

/// Primitive pseudo-remainder sequence gcd over ℤ[x].
fn gcd_integer(a: Vec<BigInt>, b: Vec<BigInt>) -> Vec<BigInt> {
    let (mut a, mut b) = (primitive(a), primitive(b));
    if int_degree(&a) < int_degree(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    while let Some(db) = int_degree(&b) {
        let lb = b[db].clone();
        let mut r = a.clone();
        while let Some(dr) = int_degree(&r) {
            if dr < db {
                break;
            }
            let lr = r[dr].clone();
            let shift = dr - db;
            for c in r.iter_mut() {
                *c *= &lb;
            }
            for (k, bk) in b.iter().enumerate().take(db + 1) {
                r[shift + k] -= &lr * bk;
            }
            r.truncate(dr);
            r = primitive(r);
        }
        a = b;
        b = primitive(r);
    }
    a
}

/// Monic gcd over ℚ (empty if both inputs are zero).
pub fn gcd(a: &[Rational], b: &[Rational]) -> QPoly {
    let g = gcd_integer(to_primitive_integer(a), to_primitive_integer(b));
    monic(&g.into_iter().map(Rational::from_integer).collect::<Vec<_>>())
}

fn mod_p(c: &BigInt, p: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits in u64")
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn trim_mod(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Option<usize> {
    trim_mod(&mut a);
    trim_mod(&mut b);
    while !b.is_empty() {
        let db = b.len() - 1;
        let inv = pow_mod(b[db], p - 2, p);
        while a.len() > db {
            let da = a.len() - 1;
            let c = a[da] * inv % p;
            let shift = da - db;
            for (k, &bk) in b.iter().enumerate() {
                a[shift + k] = (a[shift + k] + p - c * bk % p) % p;
            }
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

/// Exact decision: is `gcd(a, b)` a nonzero constant?
pub fn coprime(a: &[Rational], b: &[Rational]) -> bool {
    let ai = to_primitive_integer(a);
    let bi = to_primitive_integer(b);
    if ai.is_empty() || bi.is_empty() {
        // gcd(a, 0) = a
        let other = if ai.is_empty() { &bi } else { &ai };
        return int_degree(other) == Some(0);
    }
    for &p in &PRIMES {
        let lead = ai.last().expect("nonempty");
        if mod_p(lead, p) == 0 {
            continue;
        }
        let am: Vec<u64> = ai.iter().map(|c| mod_p(c, p)).collect();
        let bm: Vec<u64> = bi.iter().map(|c| mod_p(c, p)).collect();
        if gcd_degree_mod(am, bm, p) == Some(0) {
            return true;
        }
    }
    int_degree(&gcd_integer(ai, bi)) == Some(0)
}

/// Exact squarefreeness over ℚ (constants count as squarefree).
pub fn is_squarefree(a: &[Rational]) -> bool {
    match degree(a) {
        None => false,
        Some(0) => true,
        Some(_) => coprime(a, &derivative(a)),
    }
}

/// Yun's squarefree decomposition: `a = c · Π fᵢ^i` with the `fᵢ` monic,
/// squarefree and pairwise coprime. Returns `(fᵢ, i)` for nonconstant `fᵢ`.
pub fn squarefree_decomposition(a: &[Rational]) -> Vec<(QPoly, usize)> {
    let Some(d) = degree(a) else { return Vec::new() };
    if d == 0 {
        return Vec::new();
    }
    if is_squarefree(a) {
        return vec![(monic(a), 1)];
    }
    let da = derivative(a);
    let b = gcd(a, &da);
    let mut c = exact_div(a, &b);
    let mut dd = sub(&exact_div(&da, &b), &derivative(&c));
    let mut out = Vec::new();
    let mut i = 1;
    while !is_constant(&c) {
        let g = gcd(&c, &dd);
        c = exact_div(&c, &g);
        dd = sub(&exact_div(&dd, &g), &derivative(&c));
        if !is_constant(&g) {
            out.push((monic(&g), i));
        }
        i += 1;
    }
    out
}

/// Rough magnitude helper for float conversion of big coefficients.
pub fn to_f64_scaled(a: &[Rational]) -> Vec<f64> {
    let ints = to_primitive_integer(a);
    let max = ints
        .iter()
        .map(|c| c.abs())
        .max()
        .unwrap_or_else(BigInt::one);
    let max = if max.sign() == Sign::NoSign { BigInt::one() } else { max };
    ints.into_iter()
        .map(|c| Rational::new(c, max.clone()).to_f64().unwrap_or(0.0))
        .collect()
}
