//! Simultaneous (Aberth–Ehrlich) root iteration for complex polynomials.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOL: f64 = 1e-13;
pub const BACKWARD_TOL: f64 = 1e-9;

/// `p(z) / p'(z)` and the componentwise backward error `|p(z)| / Σ|aₖ||z|^k`.
///
/// Outside the unit disc the reversed polynomial is evaluated at `1/z`, which
/// keeps Horner's rule from overflowing on high degrees.
fn newton_ratio(coeffs: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let n = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp, mut mag) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
        let r = z.norm();
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            mag = mag * r + c.norm();
        }
        (p / dp, p.norm() / mag.max(f64::MIN_POSITIVE))
    } else {
        let w = z.inv();
        let r = w.norm();
        let (mut g, mut dg, mut mag) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
        for c in coeffs.iter() {
            dg = dg * w + g;
            g = g * w + c;
            mag = mag * r + c.norm();
        }
        // p(z) = z^n g(w)  ⇒  p/p' = z / (n − w g'(w)/g(w))
        let ratio = z / (Complex64::new(n as f64, 0.0) - w * dg / g);
        (ratio, g.norm() / mag.max(f64::MIN_POSITIVE))
    }
}

/// All roots of `Σ coeffs[k] z^k`; the leading coefficient must be nonzero.
pub fn aberth(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    if coeffs[n] == Complex64::new(0.0, 0.0) {
        return Err(Error::RootFinding("leading coefficient is zero".into()));
    }
    // Exact zero roots first.
    let zeros = coeffs.iter().position(|c| c.norm() != 0.0).unwrap_or(0);
    let reduced = &coeffs[zeros..];
    let m = reduced.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if m == 0 {
        return Ok(roots);
    }
    if m == 1 {
        roots.push(-reduced[0] / reduced[1]);
        return Ok(roots);
    }

    let radius = (reduced[0].norm() / reduced[m].norm()).powf(1.0 / m as f64);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4;
            let r = radius * (1.0 + 0.05 * ((k % 7) as f64 / 7.0));
            Complex64::from_polar(r, theta)
        })
        .collect();
    let mut done = vec![false; m];
    for _ in 0..MAX_ITERATIONS {
        if done.iter().all(|&d| d) {
            break;
        }
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (ratio, backward) = newton_ratio(reduced, z[i]);
            if backward == 0.0 || !ratio.is_finite() {
                done[i] = true;
                continue;
            }
            let repulsion: Complex64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= STEP_TOL * z[i].norm().max(f64::MIN_POSITIVE) {
                done[i] = true;
            }
        }
    }
    let worst = z
        .iter()
        .map(|&r| newton_ratio(reduced, r).1)
        .fold(0.0, f64::max);
    if !(worst <= BACKWARD_TOL) {
        return Err(Error::RootFinding(format!(
            "backward error {worst:e} above {BACKWARD_TOL:e} after {MAX_ITERATIONS} iterations"
        )));
    }
    roots.extend(z);
    Ok(roots)
}

/// Componentwise relative backward error of `z` as a root of `coeffs`.
pub fn backward_error(coeffs: &[Complex64], z: Complex64) -> f64 {
    newton_ratio(coeffs, z).1
}
