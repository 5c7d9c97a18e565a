//! Balancing, Hessenberg reduction and complex Schur factorisation.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{creal, czero, Real, C};

const RADIX: f64 = 2.0;

/// Diagonal similarity `A ← D⁻¹ A D` that equalises row and column norms.
/// Returns the diagonal of `D`.
pub fn balance<T: Real>(a: &mut CMatrix<T>) -> Vec<T> {
    let n = a.nrows();
    let radix = T::lit(RADIX);
    let sqrdx = radix * radix;
    let mut scale = vec![T::one(); n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (T::zero(), T::zero());
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].l1_norm();
                    r += a[(i, j)].l1_norm();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                scale[i] *= f;
                let g = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= g;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Householder reduction to upper Hessenberg form; returns `Q` with `A = Q H Q†`.
pub fn hessenberg<T: Real>(a: &mut CMatrix<T>) -> CMatrix<T> {
    let n = a.nrows();
    let mut q = CMatrix::identity(n);
    if n < 3 {
        return q;
    }
    let two = T::lit(2.0);
    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut v: Vec<C<T>> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = crate::linalg::vec_norm(&v);
        if xnorm == T::zero() {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == T::zero() {
            creal(T::one())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = crate::linalg::vec_norm(&v);
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A ← (I - 2vv†) A
        for j in k..n {
            let mut s = czero::<T>();
            for i in 0..m {
                s += v[i].conj() * a[(k + 1 + i, j)];
            }
            s *= two;
            for i in 0..m {
                let d = v[i] * s;
                a[(k + 1 + i, j)] -= d;
            }
        }
        // A ← A (I - 2vv†), Q ← Q (I - 2vv†)
        for mat in [&mut *a, &mut q] {
            for i in 0..n {
                let mut s = czero::<T>();
                for j in 0..m {
                    s += mat[(i, k + 1 + j)] * v[j];
                }
                s *= two;
                for j in 0..m {
                    let d = s * v[j].conj();
                    mat[(i, k + 1 + j)] -= d;
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = czero();
        }
    }
    q
}

/// Plane rotation `G = [[c, s], [-conj(s), c]]` with `G (x, y)ᵀ = (r, 0)ᵀ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Givens<T> {
    c: T,
    s: C<T>,
}

impl<T: Real> Givens<T> {
    pub(crate) fn new(x: C<T>, y: C<T>) -> Self {
        let (ax, ay) = (x.norm(), y.norm());
        if ay == T::zero() {
            return Self { c: T::one(), s: czero() };
        }
        if ax == T::zero() {
            return Self { c: T::zero(), s: y.conj() / ay };
        }
        let r = ax.hypot(ay);
        Self {
            c: ax / r,
            s: (x / ax) * y.conj() / r,
        }
    }

    #[inline]
    fn rows(&self, a: C<T>, b: C<T>) -> (C<T>, C<T>) {
        (a * self.c + self.s * b, -self.s.conj() * a + b * self.c)
    }

    #[inline]
    fn cols(&self, a: C<T>, b: C<T>) -> (C<T>, C<T>) {
        (a * self.c + b * self.s.conj(), -a * self.s + b * self.c)
    }

    fn apply_rows(&self, h: &mut CMatrix<T>, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let (a, b) = self.rows(h[(k, j)], h[(k + 1, j)]);
            h[(k, j)] = a;
            h[(k + 1, j)] = b;
        }
    }

    fn apply_cols(&self, h: &mut CMatrix<T>, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let (a, b) = self.cols(h[(i, k)], h[(i, k + 1)]);
            h[(i, k)] = a;
            h[(i, k + 1)] = b;
        }
    }
}

/// Eigenvalue of the 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = T::lit(0.5);
    let tr = (a + d) * half;
    let diff = (a - d) * half;
    let disc = (diff * diff + b * c).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Deflation threshold relative to the neighbouring diagonal scale.
pub(crate) fn deflation_tol<T: Real>() -> T {
    T::lit(1e-14).max(T::lit(4.0) * T::epsilon())
}

/// Reduces upper Hessenberg `h` to upper triangular form by single-shift QR
/// sweeps, accumulating the rotations into `z`.
pub fn schur<T: Real>(h: &mut CMatrix<T>, z: &mut CMatrix<T>) -> Result<()> {
    let n = h.nrows();
    if n <= 1 {
        return Ok(());
    }
    let tol = deflation_tol::<T>();
    let tiny = T::min_positive_value() * T::from_usize(n).unwrap() / T::epsilon();
    let cap = 30 * n;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].l1_norm();
            let s = h[(l - 1, l - 1)].l1_norm() + h[(l, l)].l1_norm();
            if sub <= tiny || (s > T::zero() && sub <= tol * s) {
                h[(l, l - 1)] = czero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > cap {
            return Err(Error::NoConvergence {
                index: hi,
                iterations: total,
            });
        }
        let mu = if its.is_multiple_of(10) {
            h[(hi, hi)] + creal(T::lit(0.75) * h[(hi, hi - 1)].re.abs())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in l..hi {
            let g = if k == l {
                Givens::new(h[(l, l)] - mu, h[(l + 1, l)])
            } else {
                Givens::new(h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let start = if k == l { l } else { k - 1 };
            g.apply_rows(h, k, start..n);
            if k > l {
                h[(k + 1, k - 1)] = czero();
            }
            g.apply_cols(h, k, 0..(k + 3).min(hi + 1));
            g.apply_cols(z, k, 0..n);
        }
    }
    Ok(())
}

/// Right eigenvectors of upper triangular `t` as the columns of the returned
/// matrix (unnormalised, in the triangular basis).
pub fn triangular_eigenvectors<T: Real>(t: &CMatrix<T>) -> CMatrix<T> {
    let n = t.nrows();
    let smallnum = (T::epsilon() * t.frobenius_norm()).max(T::min_positive_value());
    let big = T::max_value().sqrt();
    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        let lam = t[(k, k)];
        let mut col = vec![czero::<T>(); k + 1];
        col[k] = creal(T::one());
        for i in (0..k).rev() {
            let mut s = czero::<T>();
            for j in i + 1..=k {
                s += t[(i, j)] * col[j];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < smallnum {
                d = creal(smallnum);
            }
            col[i] = -s / d;
            let m = col[i].norm();
            if m > big {
                for z in col.iter_mut() {
                    *z /= m;
                }
            }
        }
        for (i, z) in col.into_iter().enumerate() {
            x[(i, k)] = z;
        }
    }
    x
}

/// Eigenvalues and right eigenvectors (unit norm, columns) of a general square matrix.
pub fn right_eigensystem<T: Real>(a: &CMatrix<T>) -> Result<(Vec<C<T>>, CMatrix<T>)> {
    let n = a.nrows();
    let mut h = a.clone();
    let scale = balance(&mut h);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z)?;
    let values: Vec<C<T>> = (0..n).map(|i| h[(i, i)]).collect();
    let x = triangular_eigenvectors(&h);
    let mut v = z.matmul(&x);
    for j in 0..n {
        for i in 0..n {
            v[(i, j)] *= scale[i];
        }
        let col = v.column(j);
        let norm = crate::linalg::vec_norm(&col);
        // fix the phase so that the largest component is real and positive
        let pivot = col
            .iter()
            .copied()
            .max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or_else(czero);
        let phase = if pivot.norm() > T::zero() {
            pivot.conj() / pivot.norm()
        } else {
            creal(T::one())
        };
        for i in 0..n {
            v[(i, j)] = v[(i, j)] * phase / norm;
        }
    }
    Ok((values, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn c64(re: f64, im: f64) -> C<f64> {
        cplx(re, im)
    }
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> CMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn givens_zeroes_second_component() {
        for (x, y) in [
            (c64(1.0, 2.0), c64(-0.5, 0.3)),
            (c64(0.0, 0.0), c64(0.0, -2.0)),
            (c64(3.0, 0.0), c64(0.0, 0.0)),
        ] {
            let g = Givens::new(x, y);
            let (r, zero) = g.rows(x, y);
            assert!(zero.norm() < 1e-15);
            assert!((r.norm() - x.norm().hypot(y.norm())).abs() < 1e-14);
        }
    }

    #[test]
    fn hessenberg_is_similarity() {
        let a = random(7, 3);
        let mut h = a.clone();
        let q = hessenberg(&mut h);
        for i in 0..7usize {
            for j in 0..i.saturating_sub(1) {
                assert_eq!(h[(i, j)], czero());
            }
        }
        let back = q.matmul(&h).matmul(&q.adjoint());
        assert!(back.max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn schur_factorisation_reconstructs() {
        let a = random(9, 11);
        let mut h = a.clone();
        let mut z = hessenberg(&mut h);
        schur(&mut h, &mut z).unwrap();
        for i in 0..9 {
            for j in 0..i {
                assert_eq!(h[(i, j)], czero());
            }
        }
        assert!(z.adjoint().matmul(&z).max_abs_diff(&CMatrix::identity(9)) < 1e-13);
        let back = z.matmul(&h).matmul(&z.adjoint());
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn balancing_preserves_spectrum_scale() {
        let mut a = random(5, 5);
        a[(0, 4)] = c64(1e6, 0.0);
        a[(4, 0)] = c64(1e-6, 0.0);
        let before = a.frobenius_norm();
        let mut b = a.clone();
        let d = balance(&mut b);
        assert!(b.frobenius_norm() < before);
        let dm = CMatrix::from_diagonal(&d.iter().map(|x| creal(*x)).collect::<Vec<_>>());
        let dinv = CMatrix::from_diagonal(&d.iter().map(|x| creal(1.0 / x)).collect::<Vec<_>>());
        assert!(dinv.matmul(&a).matmul(&dm).max_abs_diff(&b) < 1e-9);
    }
}
