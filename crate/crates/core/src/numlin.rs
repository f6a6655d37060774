//! Dense complex linear algebra: SVD, nullspace, least squares and the
//! eigendecomposition of general (non-Hermitian) matrices.
//!
//! The SVD comes from faer, LU and Hessenberg reduction from nalgebra. The Schur iteration is
//! a shifted QR sweep on the Hessenberg form, written here so that a run that
//! exhausts its budget can report what had already deflated.

use faer::c64;
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const LSTSQ_CUTOFF: f64 = 1e-12;

fn czero() -> Complex64 {
    Complex64::zero()
}

/// Row-major constructor that refuses NaN or infinite entries.
pub fn cmatrix(rows: usize, cols: usize, entries: &[Complex64]) -> Result<CMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    if entries.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(CMatrix::from_row_slice(rows, cols, entries))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.is_finite())
}

/// `A = U · diag(σ) · V*` with `σ` descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

/// Thin SVD: `U` is `rows × k`, `V` is `cols × k` with `k = min(rows, cols)`.
pub fn try_svd(a: &CMatrix) -> Result<Svd> {
    let (r, c) = a.shape();
    let k = r.min(c);
    if k == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(r, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(c, 0),
        });
    }
    if !is_finite(a) {
        return Err(Error::NonFinite);
    }
    let m = faer::Mat::<c64>::from_fn(r, c, |i, j| c64::new(a[(i, j)].re, a[(i, j)].im));
    let dec = m
        .thin_svd()
        .map_err(|e| Error::Dimension(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
    let from = |z: c64| Complex64::new(z.re, z.im);
    Ok(Svd {
        u: CMatrix::from_fn(r, k, |i, j| from(u[(i, order[j])])),
        singular_values: order.iter().map(|&i| s[i].re).collect(),
        v: CMatrix::from_fn(c, k, |i, j| from(v[(i, order[j])])),
    })
}

/// [`try_svd`] for inputs known to be finite.
///
/// # Panics
/// On non-finite entries.
pub fn svd(a: &CMatrix) -> Svd {
    try_svd(a).expect("SVD of a finite matrix")
}

/// Singular values only, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd(a).singular_values
}

/// 2-norm condition number (`∞` for rank-deficient matrices).
pub fn condition_number(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Orthonormal basis (as columns) of the right singular vectors with
/// `σᵢ ≤ rel_tol · σ_max`, including directions beyond `rank ≤ rows`.
pub fn nullspace(a: &CMatrix, rel_tol: f64) -> CMatrix {
    let (r, c) = a.shape();
    if c == 0 {
        return CMatrix::zeros(0, 0);
    }
    // Zero rows leave the right singular subspaces unchanged and make V square.
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let dec = svd(&padded);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..c)
        .filter(|&i| dec.singular_values[i] <= rel_tol * smax)
        .collect();
    CMatrix::from_fn(c, keep.len(), |i, j| dec.v[(i, keep[j])])
}

/// Minimum-norm least-squares solution with singular values below
/// `1e−12·σ_max` discarded.
pub fn lstsq(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "lstsq: A has {} rows, b has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let dec = svd(a);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let mut x = CMatrix::zeros(a.ncols(), b.ncols());
    let utb = dec.u.adjoint() * b;
    for (i, &s) in dec.singular_values.iter().enumerate() {
        if s <= LSTSQ_CUTOFF * smax || s == 0.0 {
            continue;
        }
        let row = utb.row(i) / Complex64::new(s, 0.0);
        x += dec.v.column(i) * row;
    }
    Ok(x)
}

/// Solves `A X = B` for square nonsingular `A`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::Dimension("solve needs square A matching B".into()));
    }
    a.clone().lu().solve(b).ok_or(Error::Singular)
}

#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
    /// Set when two eigenvectors for (numerically) equal eigenvalues are
    /// parallel, i.e. the matrix looks defective.
    pub defective: bool,
}

const EIG_ITERATIONS_PER_VALUE: usize = 60;

/// Complex Schur form `A = Z T Z*`; returns `(Z, T)`.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::Dimension("Schur form needs a square matrix".into()));
    }
    if n == 0 {
        return Ok((CMatrix::zeros(0, 0), CMatrix::zeros(0, 0)));
    }
    let (mut z, mut h) = a.clone().hessenberg().unpack();
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = czero();
        }
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // Find the start of the active unreduced block.
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].l1_norm() + h[(lo, lo)].l1_norm();
            let s = if s == 0.0 { h.norm() } else { s };
            if h[(lo, lo - 1)].l1_norm() <= eps * s {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > EIG_ITERATIONS_PER_VALUE {
            let converged = ((hi + 1)..n).map(|i| h[(i, i)]).collect();
            return Err(Error::EigNonConvergence {
                n,
                iterations: total,
                converged,
            });
        }
        let shift = if iter.is_multiple_of(11) {
            // Exceptional shift to break cycles.
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_sweep(&mut h, &mut z, lo, hi, shift);
    }
    Ok((z, h))
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let (l1, l2) = (mean + disc, mean - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicitly shifted QR step on the block `lo..=hi`, applied to the full
/// matrix so that `H` stays a Schur-form candidate and `Z` accumulates.
fn qr_sweep(h: &mut CMatrix, z: &mut CMatrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.nrows();
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rots: Vec<(Complex64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), czero())
        } else {
            (a / r, b / r)
        };
        for j in k..n {
            let (x, y) = (h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = c.conj() * x + s.conj() * y;
            h[(k + 1, j)] = -s * x + c * y;
        }
        rots.push((c, s));
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        for i in 0..=(k + 1).min(hi) {
            let (x, y) = (h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = x * c + y * s;
            h[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
        for i in 0..n {
            let (x, y) = (z[(i, k)], z[(i, k + 1)]);
            z[(i, k)] = x * c + y * s;
            z[(i, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Eigenvalues and unit eigenvectors of a general square matrix.
pub fn eig_general(a: &CMatrix) -> Result<Eigen> {
    if !is_finite(a) {
        return Err(Error::NonFinite);
    }
    let n = a.nrows();
    let (z, t) = schur(a)?;
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * scale;
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        // Back-substitution on (T − λ_k I) v = 0 with v_k = 1.
        let lambda = values[k];
        let mut v = vec![czero(); n];
        v[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let rhs: Complex64 = -((i + 1)..=k).map(|j| t[(i, j)] * v[j]).sum::<Complex64>();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            v[i] = rhs / d;
        }
        // Rescale to avoid overflow in the defective case.
        let vmax = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let col = &z * nalgebra::DVector::from_iterator(n, v.into_iter().map(|x| x / vmax));
        let norm = col.norm();
        vectors.set_column(k, &(col / Complex64::new(norm, 0.0)));
    }
    let mut defective = false;
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= 1e-8 * scale {
                let overlap = vectors.column(i).dotc(&vectors.column(j)).norm();
                if overlap > 1.0 - 1e-6 {
                    defective = true;
                }
            }
        }
    }
    Ok(Eigen {
        values,
        vectors,
        defective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random(rng: &mut ChaCha8Rng, r: usize, k: usize) -> CMatrix {
        CMatrix::from_fn(r, k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn unitary_defect(q: &CMatrix) -> f64 {
        (q.adjoint() * q - CMatrix::identity(q.ncols(), q.ncols())).norm()
    }

    #[test]
    fn constructor_rejects_nan() {
        assert!(matches!(cmatrix(1, 1, &[c(f64::NAN)]), Err(Error::NonFinite)));
        assert!(cmatrix(1, 2, &[c(1.0)]).is_err());
        assert!(cmatrix(1, 1, &[c(1.0)]).is_ok());
    }

    #[test]
    fn svd_examples() {
        assert_eq!(svd(&CMatrix::identity(3, 3)).singular_values, vec![1.0; 3]);
        let d = cmatrix(2, 2, &[c(2.0), c(0.0), c(0.0), c(3.0)]).unwrap();
        let s = svd(&d).singular_values;
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
        let x = CMatrix::from_column_slice(3, 1, &[c(1.0), c(2.0), c(2.0)]);
        let y = CMatrix::from_column_slice(2, 1, &[c(3.0), Complex64::new(0.0, 4.0)]);
        let s = svd(&(&x * y.adjoint())).singular_values;
        assert!((s[0] - 15.0).abs() < 1e-12 && s[1] < 1e-12);
    }

    #[test]
    fn svd_reconstructs_nearly_rank_one_wide_matrix() {
        let z = Complex64::new;
        let a = CMatrix::from_row_slice(
            2,
            3,
            &[
                z(-0.41455772732027363, -1.407920133578557),
                z(-0.044659483257030175, 2.1540434317243466),
                z(0.2815450766060579, 0.5891760820266319),
                z(3.109363088941681, 1.4858635373115963),
                z(-3.691568968795533, -3.458893347428303),
                z(-1.4707965187161864, -0.4330781525704168),
            ],
        );
        for m in [a.clone(), a.adjoint()] {
            let d = svd(&m);
            let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                2,
                d.singular_values.iter().map(|&s| c(s)),
            ));
            assert!((&d.u * sigma * d.v.adjoint() - &m).norm() < 1e-13 * m.norm());
            assert!(d.singular_values[1] < 1e-13 * d.singular_values[0]);
        }
    }

    #[test]
    fn svd_random_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in 0..100 {
            let (r, k) = (1 + (t * 7) % 80, 1 + (t * 13) % 80);
            let a = random(&mut rng, r, k);
            let d = svd(&a);
            let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                d.singular_values.len(),
                d.singular_values.iter().map(|&s| c(s)),
            ));
            let rec = &d.u * sigma * d.v.adjoint();
            assert!((rec - &a).norm() <= 1e-9 * a.norm());
            assert!(unitary_defect(&d.u) < 1e-10 && unitary_defect(&d.v) < 1e-10);
            assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn nullspace_examples() {
        let ones = cmatrix(2, 2, &[c(1.0); 4]).unwrap();
        let ns = nullspace(&ones, 1e-8);
        assert_eq!(ns.ncols(), 1);
        assert!((ns[(0, 0)] + ns[(1, 0)]).norm() < 1e-12);
        assert!((ns.column(0).norm() - 1.0).abs() < 1e-12);
        assert_eq!(nullspace(&CMatrix::identity(3, 3), 1e-8).ncols(), 0);
        assert_eq!(nullspace(&CMatrix::zeros(2, 3), 1e-8).ncols(), 3);
    }

    #[test]
    fn nullspace_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random(&mut rng, 6, 4) * random(&mut rng, 4, 9);
            let ns = nullspace(&a, 1e-8);
            assert_eq!(ns.ncols(), 5);
            let smax = singular_values(&a)[0];
            for j in 0..ns.ncols() {
                assert!((&a * ns.column(j)).norm() <= 10.0 * 1e-8 * smax);
            }
        }
    }

    #[test]
    fn lstsq_examples() {
        let b = cmatrix(2, 1, &[c(1.0), c(-2.0)]).unwrap();
        assert!((lstsq(&CMatrix::identity(2, 2), &b).unwrap() - &b).norm() < 1e-15);
        assert_eq!(lstsq(&CMatrix::zeros(2, 2), &b).unwrap(), CMatrix::zeros(2, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng, 7, 3);
        let x = random(&mut rng, 3, 2);
        let sol = lstsq(&a, &(&a * &x)).unwrap();
        assert!((sol - x).norm() < 1e-10);
        assert!(lstsq(&a, &CMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn eig_examples() {
        let d = cmatrix(2, 2, &[c(2.0), c(0.0), c(0.0), c(5.0)]).unwrap();
        let e = eig_general(&d).unwrap();
        let mut vals: Vec<f64> = e.values.iter().map(|v| v.re).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![2.0, 5.0]);
        assert!(!e.defective);

        let j = cmatrix(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        let e = eig_general(&j).unwrap();
        assert!(e.values.iter().all(|v| v.norm() < 1e-12));
        assert!(e.defective);
        for k in 0..2 {
            let r = &j * e.vectors.column(k) - e.vectors.column(k) * e.values[k];
            assert!(r.norm() <= 1e-8);
        }
    }

    #[test]
    fn eig_similarity_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let p = random(&mut rng, 3, 3);
            let pinv = p.clone().try_inverse().unwrap();
            let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(2.0), c(3.0)]));
            let a = &p * d * pinv;
            let mut vals: Vec<Complex64> = eig_general(&a).unwrap().values;
            vals.sort_by(|x, y| x.re.total_cmp(&y.re));
            for (v, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
                assert!((v - c(want)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn eig_random_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in [1, 2, 5, 20, 58, 80] {
            let a = random(&mut rng, n, n);
            let e = eig_general(&a).unwrap();
            let an = a.norm();
            for k in 0..n {
                let r = &a * e.vectors.column(k) - e.vectors.column(k) * e.values[k];
                assert!(r.norm() <= 1e-8 * an, "n={n} residual {}", r.norm());
                assert!((e.vectors.column(k).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_recovers_separated_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 30;
        let vals: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0 + 0.01 * k as f64, k as f64))
            .collect();
        let p = random(&mut rng, n, n) + CMatrix::identity(n, n) * c(2.0);
        let a = &p * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals.clone())) * p.clone().try_inverse().unwrap();
        let e = eig_general(&a).unwrap();
        for v in &vals {
            let best = e.values.iter().map(|w| (w - v).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "missed {v}: {best:e}");
        }
    }

    #[test]
    fn non_convergence_carries_partial_result() {
        let err = Error::EigNonConvergence { n: 3, iterations: 9, converged: vec![c(1.0)] };
        assert!(err.to_string().contains("1 of 3"));
    }
}
