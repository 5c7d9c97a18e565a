//! T-shaped spectrum: branch classification, decoupled reference spectrum and
//! perturbative diagnostics.

use serde::{Deserialize, Serialize};

use crate::eigen::{eig_dense, eigvals, spectrum_of, EigenPair, SpectrumSet};
use crate::error::{Error, Result};
use crate::linalg::{bilinear, CMatrix};
use crate::model::{
    build_hamiltonian, chain_block, decoupled_hamiltonian, embed_chain, Basis, LatticeSpec,
    LossProfile, StateVector,
};
use crate::scalar::{canonical_cmp, creal, czero, Real, C};
use crate::transfer::lambda0_and_kappa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Horizontal part, mostly on chain A.
    Minus,
    /// Vertical part, mostly on chain B.
    Vertical,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Minus => "minus",
            Branch::Vertical => "vertical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchLabel<T> {
    pub label: Branch,
    pub chain_a_weight: T,
    pub chain_b_weight: T,
}

/// Labels one original-basis right eigenvector by its chain-A weight.
pub fn branch_label<T: Real>(right: &[C<T>]) -> BranchLabel<T> {
    let st = StateVector {
        amplitudes: right.to_vec(),
        basis: Basis::Original,
    };
    let (a, b) = st.chain_weights();
    BranchLabel {
        label: if a > T::lit(0.5) { Branch::Minus } else { Branch::Vertical },
        chain_a_weight: a,
        chain_b_weight: b,
    }
}

/// Labels every eigenstate of an original-basis spectrum.
pub fn classify_branches<T: Real>(
    spectrum: &SpectrumSet<T>,
) -> Result<Vec<(EigenPair<T>, BranchLabel<T>)>> {
    if let Some(basis @ Basis::Rotated) = spectrum.basis {
        return Err(Error::BasisMismatch {
            expected: Basis::Original,
            found: basis,
        });
    }
    Ok(spectrum
        .pairs
        .iter()
        .map(|p| (p.clone(), branch_label(&p.right)))
        .collect())
}

/// Chain-A standing waves of the decoupled lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledSpectrum<T> {
    pub energies: Vec<T>,
    pub wavevectors: Vec<T>,
    /// Original-basis states supported on chain A only.
    pub standing_waves: Vec<StateVector<T>>,
}

/// `E_i = t₂ sin k_i`, `k_i = (i/(L+1) − 1/2)π`, with standing waves
/// `ψ_n = iⁿ √(2/(L+1)) sin[(π/2 − k) n]`.
pub fn decoupled_minus_spectrum<T: Real>(length: usize, t2: T) -> Result<DecoupledSpectrum<T>> {
    if length == 0 {
        return Err(Error::InvalidSpec("L must be >= 1".into()));
    }
    if !(t2 > T::zero()) {
        return Err(Error::InvalidSpec("t2 must be > 0".into()));
    }
    let lp1 = length + 1;
    let amp = (T::lit(2.0) / T::from_usize(lp1).unwrap()).sqrt();
    let mut energies = Vec::with_capacity(length);
    let mut wavevectors = Vec::with_capacity(length);
    let mut standing_waves = Vec::with_capacity(length);
    for i in 1..=length {
        // integer numerator keeps k_i = −k_{L+1−i} exact
        let num = 2 * i as i64 - lp1 as i64;
        let k = T::PI() * T::from_i64(num).unwrap() / T::from_usize(2 * lp1).unwrap();
        energies.push(t2 * k.sin());
        wavevectors.push(k);
        let q = T::FRAC_PI_2() - k;
        let chain: Vec<C<T>> = (1..=length)
            .map(|n| {
                let phase = match n % 4 {
                    0 => C::new(T::one(), T::zero()),
                    1 => C::new(T::zero(), T::one()),
                    2 => C::new(-T::one(), T::zero()),
                    _ => C::new(T::zero(), -T::one()),
                };
                phase * (amp * (q * T::from_usize(n).unwrap()).sin())
            })
            .collect();
        standing_waves.push(StateVector::new(embed_chain(&chain, 0), Basis::Original)?);
    }
    Ok(DecoupledSpectrum {
        energies,
        wavevectors,
        standing_waves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEReport<T> {
    pub length: usize,
    pub delta_e: T,
    /// `(decoupled index, coupled index)` into the inputs as given.
    pub pairing: Vec<(usize, usize)>,
    /// Set when fewer coupled than decoupled energies were supplied.
    pub pairing_degenerate: bool,
}

/// Mean distance between decoupled and coupled horizontal-branch energies.
/// Equal-length lists are paired in order of `Re E`; otherwise the closest
/// remaining pair is taken greedily.
pub fn delta_e<T: Real>(decoupled: &[C<T>], coupled: &[C<T>]) -> Result<DeltaEReport<T>> {
    if decoupled.is_empty() || coupled.is_empty() {
        return Err(Error::EmptyInput);
    }
    let order = |v: &[C<T>]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| canonical_cmp(&v[a], &v[b]));
        idx
    };
    let mut pairing = Vec::new();
    if decoupled.len() == coupled.len() {
        pairing = order(decoupled).into_iter().zip(order(coupled)).collect();
    } else {
        let mut cand = Vec::with_capacity(decoupled.len() * coupled.len());
        for (i, a) in decoupled.iter().enumerate() {
            for (j, b) in coupled.iter().enumerate() {
                cand.push(((a - b).norm(), i, j));
            }
        }
        cand.sort_by(|x, y| {
            x.0.partial_cmp(&y.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then((x.1, x.2).cmp(&(y.1, y.2)))
        });
        let mut ui = vec![false; decoupled.len()];
        let mut uj = vec![false; coupled.len()];
        for (_, i, j) in cand {
            if !ui[i] && !uj[j] {
                ui[i] = true;
                uj[j] = true;
                pairing.push((i, j));
            }
        }
        pairing.sort_unstable();
    }
    let total = pairing
        .iter()
        .fold(T::zero(), |acc, &(i, j)| acc + (decoupled[i] - coupled[j]).norm());
    Ok(DeltaEReport {
        length: decoupled.len(),
        delta_e: total / T::from_usize(pairing.len()).unwrap(),
        pairing,
        pairing_degenerate: coupled.len() < decoupled.len(),
    })
}

/// The `count` eigenvalues with the largest imaginary part (least lossy),
/// canonically sorted. Used as the coupled horizontal branch for ΔE.
pub fn horizontal_branch<T: Real>(values: &[C<T>], count: usize) -> Vec<C<T>> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal));
    v.truncate(count);
    v.sort_by(canonical_cmp);
    v
}

/// ΔE for a lattice: decoupled standing-wave energies against the `L`
/// least-lossy coupled eigenvalues.
pub fn delta_e_for_spec<T: Real>(spec: &LatticeSpec<T>) -> Result<DeltaEReport<T>> {
    let h = build_hamiltonian(spec, Basis::Original)?;
    let values = eigvals(&h)?;
    let coupled = horizontal_branch(&values, spec.length);
    let dec = decoupled_minus_spectrum(spec.length, spec.t2())?;
    let e0: Vec<C<T>> = dec.energies.iter().map(|e| creal(*e)).collect();
    delta_e(&e0, &coupled)
}

/// Left/right eigensystem of the decoupled lattice split into the chain-A
/// standing waves and the chain-B loss-localised states.
struct Unperturbed<T> {
    minus: DecoupledSpectrum<T>,
    vertical: SpectrumSet<T>,
    hprime: CMatrix<T>,
}

fn unperturbed<T: Real>(spec: &LatticeSpec<T>) -> Result<Unperturbed<T>> {
    let (h0, hprime) = decoupled_hamiltonian(spec)?;
    let vertical = eig_dense(&chain_block(&h0, 1))?;
    Ok(Unperturbed {
        minus: decoupled_minus_spectrum(spec.length, spec.t2())?,
        vertical,
        hprime,
    })
}

fn shift_at<T: Real>(u: &Unperturbed<T>, i: usize) -> Result<C<T>> {
    let r = &u.minus.standing_waves[i - 1].amplitudes;
    // the chain-A block is Hermitian, so the left vector is the conjugate row
    let l: Vec<C<T>> = r.iter().map(|z| z.conj()).collect();
    let e = creal::<T>(u.minus.energies[i - 1]);
    let hr = u.hprime.apply(r);
    let lh = u.hprime.apply_left(&l);
    let mut sum = czero::<T>();
    for (j, p) in u.vertical.pairs.iter().enumerate() {
        let d = e - p.value;
        if d.norm() < T::lit(1e-12) {
            return Err(Error::DegeneratePerturbation { i, j: j + 1 });
        }
        let rj = embed_chain(&p.right, 1);
        let lj = embed_chain(&p.left, 1);
        sum += bilinear(&lh, &rj) * bilinear(&lj, &hr) / d;
    }
    Ok(sum)
}

/// Second-order energy shift of the `i`-th standing wave (`1 ≤ i ≤ L`) through
/// virtual transitions into the chain-B states.
pub fn second_order_shift<T: Real>(spec: &LatticeSpec<T>, i: usize) -> Result<C<T>> {
    if i == 0 || i > spec.length {
        return Err(Error::InvalidIndex(i));
    }
    shift_at(&unperturbed(spec)?, i)
}

/// All `L` second-order shifts, sharing one decoupled eigendecomposition.
pub fn second_order_shifts<T: Real>(spec: &LatticeSpec<T>) -> Result<Vec<C<T>>> {
    let u = unperturbed(spec)?;
    (1..=spec.length).map(|i| shift_at(&u, i)).collect()
}

/// `(1/L) Σ_j 1/(γ'_j² γ_j)`: the size-dependent factor of the second-order bound.
pub fn perturbation_bound_sum<T: Real>(profile: &LossProfile<T>, length: usize) -> Result<T> {
    if profile.is_uniform() || matches!(profile, LossProfile::Table { .. }) {
        return Err(Error::NotDifferentiable);
    }
    if length == 0 {
        return Err(Error::EmptyInput);
    }
    let mut sum = T::zero();
    for j in 1..=length {
        let x = T::from_usize(j).unwrap();
        let g = profile.value(x).expect("closed form");
        let d = profile.derivative(x).expect("closed form");
        if d == T::zero() || g == T::zero() {
            return Err(Error::DivergentBound { j });
        }
        sum += T::one() / (d * d * g);
    }
    Ok(sum / T::from_usize(length).unwrap())
}

/// Mean `|λ₀⁻(E)|` over a set of energies.
pub fn mean_lambda0_minus<T: Real>(energies: &[C<T>], t2: T) -> Result<T> {
    if energies.is_empty() {
        return Err(Error::EmptyBranch);
    }
    let total = energies
        .iter()
        .fold(T::zero(), |acc, e| acc + lambda0_and_kappa(*e, t2).2.norm());
    Ok(total / T::from_usize(energies.len()).unwrap())
}

/// Mean `|λ₀⁻|` over the Minus branch of the lattice spectrum.
pub fn avg_lambda0_minus<T: Real>(spec: &LatticeSpec<T>) -> Result<T> {
    let s = spectrum_of(spec, Basis::Original)?;
    let minus: Vec<C<T>> = classify_branches(&s)?
        .into_iter()
        .filter(|(_, l)| l.label == Branch::Minus)
        .map(|(p, _)| p.value)
        .collect();
    mean_lambda0_minus(&minus, spec.t2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Boundary;
    use crate::scalar::cplx;

    fn c64(re: f64, im: f64) -> C<f64> {
        cplx(re, im)
    }

    fn lin(l: usize) -> LatticeSpec<f64> {
        LatticeSpec::new(0.4, 0.5, l, LossProfile::Linear { gamma0: 0.25 })
    }

    #[test]
    fn decoupled_closed_forms() {
        let one = decoupled_minus_spectrum(1, 0.5f64).unwrap();
        assert_eq!(one.wavevectors, vec![0.0]);
        assert_eq!(one.energies, vec![0.0]);
        let three = decoupled_minus_spectrum(3, 0.5f64).unwrap();
        assert!((three.wavevectors[2] - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((three.energies[2] - 0.5 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        for l in [4, 7, 30] {
            let d = decoupled_minus_spectrum(l, 0.5f64).unwrap();
            for i in 0..l {
                assert_eq!(d.energies[i], -d.energies[l - 1 - i]);
                assert!(d.energies[i].abs() < 0.5);
                assert!((d.standing_waves[i].norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn standing_waves_are_chain_a_eigenvectors() {
        for l in [1, 2, 5, 30] {
            let spec = lin(l);
            let (h0, _) = decoupled_hamiltonian(&spec).unwrap();
            let d = decoupled_minus_spectrum(l, 0.5).unwrap();
            for (e, st) in d.energies.iter().zip(&d.standing_waves) {
                let hv = h0.apply(&st.amplitudes);
                let res: f64 = hv
                    .iter()
                    .zip(&st.amplitudes)
                    .map(|(a, b)| (a - b * *e).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(res < 1e-8, "L={l} res={res}");
                assert_eq!(branch_label(&st.amplitudes).chain_a_weight, 1.0);
            }
        }
    }

    #[test]
    fn decoupled_energies_match_dense_solver() {
        for l in [3, 10, 30] {
            let (h0, _) = decoupled_hamiltonian(&lin(l)).unwrap();
            let got = eigvals(&chain_block(&h0, 0)).unwrap();
            let d = decoupled_minus_spectrum(l, 0.5).unwrap();
            for (g, e) in got.iter().zip(&d.energies) {
                assert!((g - c64(*e, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn delta_e_small_cases() {
        let a = vec![c64(0.1, 0.0), c64(-0.2, 0.0)];
        assert_eq!(delta_e(&a, &a).unwrap().delta_e, 0.0);
        let r = delta_e(&[c64(0.1, 0.0)], &[c64(0.1, 0.01)]).unwrap();
        assert!((r.delta_e - 0.01).abs() < 1e-15);
        let short = delta_e(&a, &[c64(0.12, 0.0)]).unwrap();
        assert!(short.pairing_degenerate);
        assert_eq!(short.pairing, vec![(0, 0)]);
        assert_eq!(delta_e::<f64>(&[], &a), Err(Error::EmptyInput));
    }

    #[test]
    fn single_cell_second_order_shift() {
        // one A level at 0, one B level at −iγ: E2 = t1² / (iγ)
        let spec = LatticeSpec::new(0.4, 0.5, 1, LossProfile::Uniform { gamma: 0.25 });
        let e2 = second_order_shift(&spec, 1).unwrap();
        assert!((e2 - c64(0.0, -0.64)).norm() < 1e-12, "{e2}");
        assert_eq!(second_order_shift(&spec, 2), Err(Error::InvalidIndex(2)));
    }

    #[test]
    fn second_order_shift_vanishes_without_coupling() {
        let spec = LatticeSpec::new(0.0, 0.5, 6, LossProfile::Linear { gamma0: 0.25 });
        let (h0, hp) = decoupled_hamiltonian(&spec).unwrap();
        // t1 = 0 still leaves the t2/2 cross terms, so zero those explicitly
        let u = Unperturbed {
            minus: decoupled_minus_spectrum(6, 0.5).unwrap(),
            vertical: eig_dense(&chain_block(&h0, 1)).unwrap(),
            hprime: CMatrix::zeros(hp.nrows(), hp.ncols()),
        };
        for i in 1..=6 {
            assert_eq!(shift_at(&u, i).unwrap(), czero());
        }
    }

    #[test]
    fn second_order_shift_decays_with_length() {
        let mean = |l: usize| {
            let s = second_order_shifts(&lin(l)).unwrap();
            s.iter().map(|z| z.norm()).sum::<f64>() / l as f64
        };
        let m: Vec<f64> = [20, 40, 60].iter().map(|&l| mean(l)).collect();
        assert!(m[0] > m[1] && m[1] > m[2], "{m:?}");
        // frozen from an independent dense evaluation
        assert!((m[0] - 0.149541).abs() < 1e-5, "{}", m[0]);
    }

    #[test]
    fn bound_sums() {
        let id = LossProfile::Polynomial { coefficient: 1.0f64, alpha: 1.0 };
        let v = perturbation_bound_sum(&id, 4).unwrap();
        assert!((v - (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0).abs() < 1e-15);
        assert!(perturbation_bound_sum(&id, 4096).unwrap() < perturbation_bound_sum(&id, 64).unwrap());
        let log = LossProfile::Logarithmic { a: 20.0, b: 100.0 };
        assert!(perturbation_bound_sum(&log, 400).unwrap() > perturbation_bound_sum(&log, 100).unwrap());
        assert_eq!(
            perturbation_bound_sum(&LossProfile::Uniform { gamma: 1.0 }, 4),
            Err(Error::NotDifferentiable)
        );
    }

    #[test]
    fn lambda0_means() {
        let real = vec![c64(-0.3, 0.0), c64(0.1, 0.0), c64(0.45, 0.0)];
        assert!((mean_lambda0_minus(&real, 0.5).unwrap() - 1.0).abs() < 1e-14);
        let e = c64(-0.291, -0.190);
        let single = mean_lambda0_minus(&[e], 0.5).unwrap();
        assert_eq!(single, lambda0_and_kappa(e, 0.5).2.norm());
        assert_eq!(mean_lambda0_minus::<f64>(&[], 0.5), Err(Error::EmptyBranch));
    }

    #[test]
    fn classification_is_exhaustive_and_rejects_rotated() {
        let s = spectrum_of(&lin(10), Basis::Original).unwrap();
        let labels = classify_branches(&s).unwrap();
        assert_eq!(labels.len(), 20);
        for (_, l) in &labels {
            assert!((l.chain_a_weight + l.chain_b_weight - 1.0).abs() < 1e-10);
        }
        let r = spectrum_of(&lin(10), Basis::Rotated).unwrap();
        assert!(classify_branches(&r).is_err());
    }

    #[test]
    fn pbc_spectrum_has_minus_branch() {
        let spec = lin(20).with_boundary(Boundary::Pbc);
        let s = spectrum_of(&spec, Basis::Original).unwrap();
        let n = classify_branches(&s)
            .unwrap()
            .iter()
            .filter(|(_, l)| l.label == Branch::Minus)
            .count();
        assert!(n > 0);
    }
}
