use proptest::prelude::*;

use starkskin_core::eigen::{eig_dense, eigvals, spectrum_of};
use starkskin_core::linalg::{bilinear, vec_norm, CMatrix};
use starkskin_core::model::{
    build_hamiltonian, chain_block, decoupled_hamiltonian, rotate_state, Basis, Direction, LatticeSpec, LossProfile,
    StateVector,
};
use starkskin_core::modes::{decompose, propagation_residual, reconstruction_error, recurrence_check};
use starkskin_core::spectrum::{
    branch_label, classify_branches, decoupled_minus_spectrum, delta_e, perturbation_bound_sum, Branch,
};
use starkskin_core::transfer::{
    convergence_ratio, geometric_mean_ratio, lambda0_and_kappa, lambda0_closed_form, lambda_flow, quadratic_coeffs,
    raw_roots, transfer_matrix, ConvergenceCase,
};
use starkskin_core::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matched_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

fn profile() -> impl Strategy<Value = LossProfile<f64>> {
    prop_oneof![
        (0.0..3.0f64).prop_map(|gamma| LossProfile::Uniform { gamma }),
        (1.0..30.0f64, 10.0..200.0f64).prop_map(|(a, b)| LossProfile::Logarithmic { a, b }),
        (0.05..1.0f64).prop_map(|gamma0| LossProfile::Linear { gamma0 }),
        (0.05..0.5f64, 0.5..2.5f64).prop_map(|(coefficient, alpha)| LossProfile::Polynomial { coefficient, alpha }),
        (0.05..0.5f64, 0.02..0.3f64).prop_map(|(c, alpha)| LossProfile::Exponential { c, alpha }),
    ]
}

fn lattice(max_len: usize) -> impl Strategy<Value = LatticeSpec<f64>> {
    (0.0..1.0f64, 0.2..1.0f64, 2..=max_len, profile()).prop_map(|(t1, t2, l, p)| LatticeSpec::new(t1, t2, l, p))
}

fn random_matrix(n: usize) -> impl Strategy<Value = CMatrix<f64>> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n)
        .prop_map(move |v| CMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_preserves_spectrum(spec in lattice(10)) {
        // near-coalescing pairs (t1 ≈ γ/2 under uniform loss) are limited by
        // their condition number 1/|cos(l, r)| rather than by 1e-10
        let h = build_hamiltonian(&spec, Basis::Original).unwrap();
        let s = eig_dense(&h).unwrap();
        let b = eigvals(&build_hamiltonian(&spec, Basis::Rotated).unwrap()).unwrap();
        let scale = h.frobenius_norm().max(1.0);
        for p in &s.pairs {
            let cos = bilinear(&p.left, &p.right).norm() / (vec_norm(&p.left) * vec_norm(&p.right));
            let d = b.iter().map(|y| (p.value - y).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= scale * 1e-10f64.max(10.0 * f64::EPSILON / cos), "{} {d:e} {cos:e}", p.value);
        }
    }

    #[test]
    fn lossless_lattice_has_real_spectrum(t1 in 0.0..1.0f64, t2 in 0.2..1.0f64, l in 1usize..12) {
        let spec = LatticeSpec::new(t1, t2, l, LossProfile::Uniform { gamma: 0.0 });
        let h = build_hamiltonian(&spec, Basis::Original).unwrap();
        for e in eigvals(&h).unwrap() {
            prop_assert!(e.im.abs() <= 1e-10 * h.frobenius_norm());
        }
    }

    #[test]
    fn trace_and_determinant_match_eigenvalues(a in (2usize..9).prop_flat_map(random_matrix)) {
        let vals = eigvals(&a).unwrap();
        let sum: Complex64 = vals.iter().sum();
        let prod: Complex64 = vals.iter().product();
        let tr = a.trace();
        let det = a.determinant();
        prop_assert!((sum - tr).norm() <= 1e-8 * tr.norm().max(a.frobenius_norm()));
        prop_assert!((prod - det).norm() <= 1e-6 * det.norm().max(1e-12));
    }

    #[test]
    fn adjoint_has_conjugate_spectrum(a in (2usize..9).prop_flat_map(random_matrix)) {
        let vals: Vec<Complex64> = eigvals(&a).unwrap().iter().map(|z| z.conj()).collect();
        let adj = eigvals(&a.adjoint()).unwrap();
        prop_assert!(matched_distance(&vals, &adj) < 1e-9);
    }

    #[test]
    fn eigenpairs_satisfy_residual_and_biorthogonality(spec in lattice(8)) {
        let h = build_hamiltonian(&spec, Basis::Original).unwrap();
        let s = eig_dense(&h).unwrap();
        prop_assert_eq!(s.len(), spec.dim());
        let tol = 1e-9 * h.frobenius_norm();
        for p in &s.pairs {
            if p.defective {
                continue;
            }
            prop_assert!(p.residual <= tol && p.left_residual <= tol);
        }
        // scale-free: near exceptional points |l·r|/(‖l‖‖r‖) reaches ~1e-5 and the
        // normalised left vectors grow accordingly; nearly coalescing pairs are
        // further limited by ε‖H‖/|E_i − E_j|
        for (i, p) in s.pairs.iter().enumerate() {
            for (j, q) in s.pairs.iter().enumerate() {
                if i != j && !p.defective && !q.defective {
                    let d = bilinear(&p.left, &q.right).norm() / (vec_norm(&p.left) * vec_norm(&q.right));
                    let gap = (p.value - q.value).norm();
                    let bound = 1e-10f64.max(10.0 * f64::EPSILON * h.frobenius_norm() / gap);
                    prop_assert!(d < bound, "{} {} {d:e} {bound:e}", p.value, q.value);
                }
            }
        }
    }

    #[test]
    fn transfer_cells_obey_vieta_and_det(spec in lattice(30), re in -0.6..0.6f64, im in -2.0..0.0f64) {
        let e = c(re, im);
        let flow = lambda_flow(&spec, e).unwrap();
        for fc in &flow.cells {
            let (b, cc) = quadratic_coeffs(&spec, e, fc.n()).unwrap();
            let scale = 1.0 + b.norm() + cc.norm();
            prop_assert!((fc.lambda_plus * fc.lambda_minus - cc).norm() <= 1e-10 * scale);
            prop_assert!((fc.lambda_plus + fc.lambda_minus + b).norm() <= 1e-10 * scale);
            for lam in [fc.lambda_plus, fc.lambda_minus] {
                prop_assert!((lam * lam + b * lam + cc).norm() <= 1e-10 * scale * (1.0 + lam.norm_sqr()));
            }
            let m = transfer_matrix(&spec, e, fc.n()).unwrap();
            let [[a, b2], [c2, d]] = m.entries;
            prop_assert!((m.det() - cc).norm() <= 1e-12 * ((a * d).norm() + (b2 * c2).norm() + cc.norm()));
            prop_assert!((m.trace() + b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn eigenstates_decompose_exactly(spec in lattice(14)) {
        let s = spectrum_of(&spec, Basis::Original).unwrap();
        for p in s.pairs.iter().filter(|p| !p.defective) {
            let st = rotate_state(&p.right_state(Basis::Original).unwrap(), Direction::ToRotated).unwrap();
            let flow = lambda_flow(&spec, p.value).unwrap();
            if flow.has_defective() {
                continue;
            }
            let dec = decompose(&st, &flow).unwrap();
            prop_assert!(reconstruction_error(&dec, &flow) < 1e-8);
            prop_assert!(recurrence_check(&dec, &flow) < 1e-8);
        }
    }

    #[test]
    fn lambda0_forms_agree(re in -2.0..2.0f64, im in -2.0..-1e-3f64, t2 in 0.2..1.5f64) {
        let e = c(re, im);
        let (_, p, m) = lambda0_and_kappa(e, t2);
        let (cp, cm) = lambda0_closed_form(e, t2).unwrap();
        prop_assert!((p - cp).norm() <= 1e-10 * (1.0 + p.norm()));
        prop_assert!((m - cm).norm() <= 1e-10 * (1.0 + m.norm()));
        prop_assert!(p.norm() >= 1.0 && m.norm() <= 1.0);
    }

    #[test]
    fn self_comparison_has_zero_delta_e(v in proptest::collection::vec((-1.0..1.0f64, -1.0..0.0f64), 1..20)) {
        let x: Vec<Complex64> = v.iter().map(|&(a, b)| c(a, b)).collect();
        prop_assert_eq!(delta_e(&x, &x).unwrap().delta_e, 0.0);
    }

    #[test]
    fn branch_partition_is_exhaustive(spec in lattice(10)) {
        let s = spectrum_of(&spec, Basis::Original).unwrap();
        let labels = classify_branches(&s).unwrap();
        prop_assert_eq!(labels.len(), s.len());
        for (_, l) in &labels {
            prop_assert!((l.chain_a_weight + l.chain_b_weight - 1.0).abs() < 1e-10);
            prop_assert_eq!(l.label == Branch::Minus, l.chain_a_weight > 0.5);
        }
    }

    #[test]
    fn bound_sum_decreases_for_superlinear_growth(alpha in 1.0..3.0f64, coefficient in 0.1..2.0f64, k in 4u32..10) {
        let p = LossProfile::Polynomial { coefficient, alpha };
        let a = perturbation_bound_sum(&p, 1 << k).unwrap();
        let b = perturbation_bound_sum(&p, 1 << (k + 1)).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn rotated_eigenvector_stays_eigenvector(spec in lattice(10)) {
        let h = build_hamiltonian(&spec, Basis::Original).unwrap();
        let hr = build_hamiltonian(&spec, Basis::Rotated).unwrap();
        let s = eig_dense(&h).unwrap();
        for p in &s.pairs {
            let r = rotate_state(&StateVector::new(p.right.clone(), Basis::Original).unwrap(), Direction::ToRotated).unwrap();
            let hv = hr.apply(&r.amplitudes);
            let d: Vec<Complex64> = hv.iter().zip(&r.amplitudes).map(|(a, b)| a - p.value * b).collect();
            prop_assert!(vec_norm(&d) < 1e-9 * hr.frobenius_norm().max(1.0));
        }
    }
}

#[test]
fn decoupled_energies_match_chain_a_block() {
    for l in [1usize, 2, 5, 13, 30] {
        let spec = LatticeSpec::new(0.4, 0.5, l, LossProfile::Linear { gamma0: 0.25 });
        let (h0, _) = decoupled_hamiltonian(&spec).unwrap();
        let mut numeric: Vec<f64> = eigvals(&chain_block(&h0, 0)).unwrap().iter().map(|z| z.re).collect();
        numeric.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d = decoupled_minus_spectrum(l, 0.5).unwrap();
        for (a, b) in numeric.iter().zip(&d.energies) {
            assert!((a - b).abs() < 1e-8, "L={l}: {a} vs {b}");
        }
    }
}

#[test]
fn vertical_states_sit_near_local_loss() {
    // four weakly lossy states near the band edges (chain-B weight 0.58-0.71)
    // hybridise strongly and lie closer to the band; every other one sits by -iγ_n
    let spec = LatticeSpec::new(0.4, 0.5, 60, LossProfile::Linear { gamma0: 0.25 });
    let gammas = spec.gammas().unwrap();
    let e0 = decoupled_minus_spectrum(60, 0.5).unwrap().energies;
    let s = spectrum_of(&spec, Basis::Original).unwrap();
    let mut exceptions = Vec::new();
    for p in &s.pairs {
        let label = branch_label(&p.right);
        if label.label != Branch::Vertical {
            continue;
        }
        let to_loss = gammas.iter().map(|g| (p.value - c(0.0, -g)).norm()).fold(f64::INFINITY, f64::min);
        let to_band = e0.iter().map(|e| (p.value - c(*e, 0.0)).norm()).fold(f64::INFINITY, f64::min);
        if to_loss >= to_band {
            assert!(label.chain_b_weight < 0.75 && p.value.im > -0.3, "{}", p.value);
            exceptions.push(p.value);
        }
    }
    assert_eq!(exceptions.len(), 4, "{exceptions:?}");
}

#[test]
fn minus_modes_propagate_through_transfer_matrices() {
    let spec = LatticeSpec::new(0.4, 0.5, 60, LossProfile::Linear { gamma0: 0.25 });
    let s = spectrum_of(&spec, Basis::Original).unwrap();
    for p in &s.pairs {
        if branch_label(&p.right).label != Branch::Minus {
            continue;
        }
        let st = rotate_state(&p.right_state(Basis::Original).unwrap(), Direction::ToRotated).unwrap();
        let flow = lambda_flow(&spec, p.value).unwrap();
        let dec = decompose(&st, &flow).unwrap();
        assert!(propagation_residual(&dec, &flow) < 1e-6, "{}", p.value);
    }
}

#[test]
fn laurent_slope_matches_first_order_coefficient() {
    let (g0, t1, t2) = (0.25, 0.4, 0.5);
    let e = c(-0.291, -0.190);
    let spec = LatticeSpec::new(t1, t2, 1001, LossProfile::Linear { gamma0: g0 });
    let (kappa, _, l0m) = lambda0_and_kappa(e, t2);
    let lambda1 = convergence_ratio(ConvergenceCase::Linear { gamma0: g0 }, t1, t2, kappa).unwrap().minus * l0m;
    let minus_root = |n: usize| {
        let (b, cc) = quadratic_coeffs(&spec, e, n).unwrap();
        let (x, y) = raw_roots(b, cc);
        if (x - l0m).norm() < (y - l0m).norm() {
            x
        } else {
            y
        }
    };
    let n = 1000;
    let (ga, gb) = (g0 * n as f64, g0 * (n + 1) as f64);
    let slope = (minus_root(n + 1) - minus_root(n)) / (1.0 / gb - 1.0 / ga);
    assert!((slope - lambda1).norm() / lambda1.norm() < 0.05, "{slope} vs {lambda1}");
}

#[test]
fn linear_case_converges_faster_on_minus_branch() {
    let gm = geometric_mean_ratio(ConvergenceCase::Linear { gamma0: 0.25 }, 0.4, 0.5).unwrap();
    assert!(gm.minus < gm.plus && gm.minus > 0.0);
}

#[test]
fn both_waves_are_comparable_at_the_edges() {
    let spec = LatticeSpec::new(0.4, 0.5, 60, LossProfile::Linear { gamma0: 0.25 });
    let s = spectrum_of(&spec, Basis::Original).unwrap();
    for p in &s.pairs {
        if branch_label(&p.right).label != Branch::Minus {
            continue;
        }
        let st = rotate_state(&p.right_state(Basis::Original).unwrap(), Direction::ToRotated).unwrap();
        let flow = lambda_flow(&spec, p.value).unwrap();
        let dec = decompose(&st, &flow).unwrap();
        for n in [2, 60] {
            let r = dec.ratio(n).unwrap();
            assert!((0.1..=10.0).contains(&r), "E={} n={n} ratio {r}", p.value);
        }
    }
}


#[test]
fn preset_spectra_are_biorthonormal() {
    for profile in [
        LossProfile::Linear { gamma0: 0.25 },
        LossProfile::Logarithmic { a: 20.0, b: 100.0 },
        LossProfile::Polynomial { coefficient: 0.25, alpha: 2.0 },
        LossProfile::Uniform { gamma: 5.0 },
    ] {
        let s = spectrum_of(&LatticeSpec::new(0.4, 0.5, 40, profile.clone()), Basis::Original).unwrap();
        assert!(s.biorthogonality_error() < 1e-8, "{profile:?}: {}", s.biorthogonality_error());
    }
}

#[test]
fn exponential_preset_is_biorthogonal_up_to_scale() {
    // skin modes put right and left vectors at opposite ends; |l·r|/(‖l‖‖r‖)
    // falls to ~1e-10 by L = 40, so only the scale-free overlaps stay small
    let s = spectrum_of(
        &LatticeSpec::new(0.4, 0.5, 40, LossProfile::Exponential { c: 0.25, alpha: 0.1 }),
        Basis::Original,
    )
    .unwrap();
    for (i, p) in s.pairs.iter().enumerate() {
        for (j, q) in s.pairs.iter().enumerate() {
            if i != j {
                let d = bilinear(&p.left, &q.right).norm() / (vec_norm(&p.left) * vec_norm(&q.right));
                assert!(d < 1e-12, "{} {}", p.value, q.value);
            }
        }
    }
}
