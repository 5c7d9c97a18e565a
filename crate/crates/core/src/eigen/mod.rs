//! Dense complex non-symmetric eigendecomposition with biorthonormal left/right vectors.

pub mod qr;

use crate::error::{Error, Result};
use crate::linalg::{bilinear, vec_norm, CMatrix};
use crate::model::{build_hamiltonian, Basis, LatticeSpec, StateVector};
use crate::scalar::{canonical_cmp, Real, C};

/// Threshold on `|l·r| / (‖l‖‖r‖)` below which a pair is reported as defective.
pub const DEFECTIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: C<T>,
    /// Unit-norm right eigenvector (column).
    pub right: Vec<C<T>>,
    /// Left eigenvector as a row, scaled so that `left · right = 1`.
    pub left: Vec<C<T>>,
    /// `‖A r − E r‖` with `‖r‖ = 1`.
    pub residual: T,
    /// `‖l A − E l‖ / ‖l‖`.
    pub left_residual: T,
    pub defective: bool,
}

impl<T: Real> EigenPair<T> {
    pub fn right_state(&self, basis: Basis) -> Result<StateVector<T>> {
        StateVector::new(self.right.clone(), basis)
    }

    pub fn left_state(&self, basis: Basis) -> Result<StateVector<T>> {
        StateVector::new(self.left.clone(), basis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet<T> {
    pub pairs: Vec<EigenPair<T>>,
    pub spec: Option<LatticeSpec<T>>,
    pub basis: Option<Basis>,
}

impl<T: Real> SpectrumSet<T> {
    pub fn values(&self) -> Vec<C<T>> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Largest `|left_i · right_j − δ_ij|` over the whole set.
    pub fn biorthogonality_error(&self) -> T {
        let mut worst = T::zero();
        for (i, p) in self.pairs.iter().enumerate() {
            for (j, q) in self.pairs.iter().enumerate() {
                let mut d = bilinear(&p.left, &q.right);
                if i == j {
                    d -= C::new(T::one(), T::zero());
                }
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

fn check_input<T: Real>(a: &CMatrix<T>) -> Result<()> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::BadShape {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Eigenvalues only, canonically sorted.
pub fn eigvals<T: Real>(a: &CMatrix<T>) -> Result<Vec<C<T>>> {
    check_input(a)?;
    let mut h = a.clone();
    qr::balance(&mut h);
    let mut z = qr::hessenberg(&mut h);
    qr::schur(&mut h, &mut z)?;
    let mut v: Vec<C<T>> = (0..h.nrows()).map(|i| h[(i, i)]).collect();
    v.sort_by(canonical_cmp);
    Ok(v)
}

/// Full eigendecomposition. Left vectors come from a second factorisation of
/// `A†`; they are matched to the right vectors by eigenvalue and scaled to be
/// biorthonormal. Pairs are sorted canonically.
pub fn eig_dense<T: Real>(a: &CMatrix<T>) -> Result<SpectrumSet<T>> {
    check_input(a)?;
    let n = a.nrows();
    let (vals, vr) = qr::right_eigensystem(a)?;
    let (lvals, vl) = qr::right_eigensystem(&a.adjoint())?;

    // greedy global matching of E_i to conj(μ_j)
    let mut cand: Vec<(T, usize, usize)> = Vec::with_capacity(n * n);
    for (i, e) in vals.iter().enumerate() {
        for (j, mu) in lvals.iter().enumerate() {
            cand.push(((mu.conj() - e).norm(), i, j));
        }
    }
    cand.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut match_of = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, i, j) in cand {
        if match_of[i] == usize::MAX && !used[j] {
            match_of[i] = j;
            used[j] = true;
        }
    }

    let mut rights: Vec<Vec<C<T>>> = (0..n).map(|i| vr.column(i)).collect();
    let mut lefts: Vec<Vec<C<T>>> = (0..n)
        .map(|i| vl.column(match_of[i]).iter().map(|z| z.conj()).collect())
        .collect();
    let mut defective: Vec<bool> = (0..n)
        .map(|i| {
            let c = bilinear(&lefts[i], &rights[i]).norm()
                / (vec_norm(&lefts[i]) * vec_norm(&rights[i]));
            !(c >= T::lit(DEFECTIVE_TOL))
        })
        .collect();

    // group numerically coincident eigenvalues and biorthogonalise within each group
    let scale = a.frobenius_norm().max(T::one());
    let ctol = T::epsilon().sqrt() * scale;
    let mut group = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if group[i] != usize::MAX {
            continue;
        }
        let g = groups.len();
        let mut members = vec![i];
        group[i] = g;
        let mut k = 0;
        while k < members.len() {
            let m = members[k];
            for j in 0..n {
                if group[j] == usize::MAX && (vals[j] - vals[m]).norm() <= ctol {
                    group[j] = g;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    for members in &groups {
        if members.len() == 1 {
            let i = members[0];
            if !defective[i] {
                let d = bilinear(&lefts[i], &rights[i]);
                for z in lefts[i].iter_mut() {
                    *z /= d;
                }
            }
            continue;
        }
        let k = members.len();
        let m = CMatrix::from_fn(k, k, |p, q| bilinear(&lefts[members[p]], &rights[members[q]]));
        let lc = CMatrix::from_fn(k, n, |p, s| lefts[members[p]][s]);
        match m.solve(&lc) {
            Some(new) if new.is_finite() => {
                for (p, &i) in members.iter().enumerate() {
                    lefts[i] = new.row(p).to_vec();
                }
            }
            _ => {
                for &i in members {
                    defective[i] = true;
                }
            }
        }
    }

    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let e = vals[i];
        let r = std::mem::take(&mut rights[i]);
        let l = std::mem::take(&mut lefts[i]);
        let ar = a.apply(&r);
        let residual = vec_norm(&ar.iter().zip(&r).map(|(x, y)| *x - *y * e).collect::<Vec<_>>());
        let la = a.apply_left(&l);
        let left_residual =
            vec_norm(&la.iter().zip(&l).map(|(x, y)| *x - *y * e).collect::<Vec<_>>()) / vec_norm(&l);
        pairs.push(EigenPair {
            value: e,
            right: r,
            left: l,
            residual,
            left_residual,
            defective: defective[i],
        });
    }
    pairs.sort_by(|p, q| canonical_cmp(&p.value, &q.value));
    Ok(SpectrumSet {
        pairs,
        spec: None,
        basis: None,
    })
}

/// Builds the Hamiltonian of `spec` in `basis` and decomposes it.
pub fn spectrum_of<T: Real>(spec: &LatticeSpec<T>, basis: Basis) -> Result<SpectrumSet<T>> {
    let h = build_hamiltonian(spec, basis)?;
    let mut s = eig_dense(&h)?;
    s.spec = Some(spec.clone());
    s.basis = Some(basis);
    Ok(s)
}
