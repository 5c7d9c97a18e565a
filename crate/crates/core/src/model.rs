//! Two-chain lossy lattice: loss profiles, lattice specs and Hamiltonian builders.
//!
//! Sites are ordered `(1A, 1B, 2A, 2B, ...)` and cells are numbered from 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{creal, czero, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HoppingParams<T> {
    /// Intra-cell inter-chain hopping.
    pub t1: T,
    /// Inter-cell hopping scale.
    pub t2: T,
}

/// Position-dependent loss rate `γ_n` on chain B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", bound = "T: Real")]
pub enum LossProfile<T> {
    Uniform { gamma: T },
    /// `a ln(1 + n/b)`
    Logarithmic { a: T, b: T },
    /// `gamma0 n`
    Linear { gamma0: T },
    /// `coefficient n^alpha`
    Polynomial { coefficient: T, alpha: T },
    /// `c e^{alpha n}`
    Exponential { c: T, alpha: T },
    Table { values: Vec<T> },
}

impl<T: Real> LossProfile<T> {
    /// `γ_n` for cell `n ≥ 1`.
    pub fn gamma_at(&self, n: usize) -> Result<T> {
        if n == 0 {
            return Err(Error::InvalidIndex(0));
        }
        match self {
            LossProfile::Table { values } => values
                .get(n - 1)
                .copied()
                .ok_or(Error::ProfileExhausted { n, len: values.len() }),
            _ => Ok(self.value(T::from_usize(n).unwrap()).expect("closed-form profile")),
        }
    }

    /// Closed-form value at a continuous position `x`. `None` for tables.
    pub fn value(&self, x: T) -> Option<T> {
        Some(match *self {
            LossProfile::Uniform { gamma } => gamma,
            LossProfile::Logarithmic { a, b } => a * (x / b).ln_1p(),
            LossProfile::Linear { gamma0 } => gamma0 * x,
            LossProfile::Polynomial { coefficient, alpha } => coefficient * x.powf(alpha),
            LossProfile::Exponential { c, alpha } => c * (alpha * x).exp(),
            LossProfile::Table { .. } => return None,
        })
    }

    /// Analytic `dγ/dn` at `x`. `None` for tables.
    pub fn derivative(&self, x: T) -> Option<T> {
        Some(match *self {
            LossProfile::Uniform { .. } => T::zero(),
            LossProfile::Logarithmic { a, b } => a / (b + x),
            LossProfile::Linear { gamma0 } => gamma0,
            LossProfile::Polynomial { coefficient, alpha } => {
                coefficient * alpha * x.powf(alpha - T::one())
            }
            LossProfile::Exponential { c, alpha } => c * alpha * (alpha * x).exp(),
            LossProfile::Table { .. } => return None,
        })
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, LossProfile::Uniform { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.to_string()));
        let pos = |x: T| x.is_finite() && x > T::zero();
        match self {
            LossProfile::Uniform { gamma } => {
                if !(gamma.is_finite() && *gamma >= T::zero()) {
                    return bad("uniform gamma must be finite and >= 0");
                }
            }
            LossProfile::Logarithmic { a, b } => {
                if !(pos(*a) && pos(*b)) {
                    return bad("logarithmic a and b must be > 0");
                }
            }
            LossProfile::Linear { gamma0 } => {
                if !pos(*gamma0) {
                    return bad("linear gamma0 must be > 0");
                }
            }
            LossProfile::Polynomial { coefficient, alpha } => {
                if !(pos(*coefficient) && pos(*alpha)) {
                    return bad("polynomial coefficient and alpha must be > 0");
                }
            }
            LossProfile::Exponential { c, alpha } => {
                if !(pos(*c) && pos(*alpha)) {
                    return bad("exponential c and alpha must be > 0");
                }
            }
            LossProfile::Table { values } => {
                if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
                    return bad("table values must be finite and >= 0");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Obc,
    Pbc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Original,
    Rotated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToRotated,
    ToOriginal,
}

/// Full description of one lattice instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LatticeSpec<T> {
    #[serde(flatten)]
    pub hopping: HoppingParams<T>,
    #[serde(rename = "L")]
    pub length: usize,
    pub profile: LossProfile<T>,
    #[serde(default)]
    pub boundary: Boundary,
}

impl<T: Real> LatticeSpec<T> {
    pub fn new(t1: T, t2: T, length: usize, profile: LossProfile<T>) -> Self {
        Self {
            hopping: HoppingParams { t1, t2 },
            length,
            profile,
            boundary: Boundary::Obc,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_length(&self, length: usize) -> Self {
        Self {
            length,
            ..self.clone()
        }
    }

    #[inline]
    pub fn t1(&self) -> T {
        self.hopping.t1
    }

    #[inline]
    pub fn t2(&self) -> T {
        self.hopping.t2
    }

    pub fn dim(&self) -> usize {
        2 * self.length
    }

    pub fn validate(&self) -> Result<()> {
        let HoppingParams { t1, t2 } = self.hopping;
        if !t1.is_finite() || !t2.is_finite() {
            return Err(Error::InvalidSpec("hoppings must be finite".into()));
        }
        if t2 == T::zero() {
            return Err(Error::ZeroInterCellHopping);
        }
        if self.length == 0 {
            return Err(Error::InvalidSpec("L must be >= 1".into()));
        }
        self.profile.validate()?;
        if let LossProfile::Table { values } = &self.profile {
            if values.len() < self.length {
                return Err(Error::ProfileExhausted {
                    n: self.length,
                    len: values.len(),
                });
            }
        }
        for n in 1..=self.length {
            let g = self.profile.gamma_at(n)?;
            if !g.is_finite() {
                return Err(Error::InvalidSpec(format!("gamma_{n} is not finite")));
            }
        }
        Ok(())
    }

    /// `γ_1 .. γ_L`.
    pub fn gammas(&self) -> Result<Vec<T>> {
        (1..=self.length).map(|n| self.profile.gamma_at(n)).collect()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

#[inline]
pub fn site_a(n: usize) -> usize {
    2 * (n - 1)
}

#[inline]
pub fn site_b(n: usize) -> usize {
    2 * (n - 1) + 1
}

/// Amplitudes over the `2L` sites, tagged with their basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    pub amplitudes: Vec<C<T>>,
    pub basis: Basis,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<C<T>>, basis: Basis) -> Result<Self> {
        if amplitudes.is_empty() || !amplitudes.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: 2 * (amplitudes.len() / 2).max(1),
                found: amplitudes.len(),
            });
        }
        Ok(Self { amplitudes, basis })
    }

    pub fn cells(&self) -> usize {
        self.amplitudes.len() / 2
    }

    /// `(ψ_n^A, ψ_n^B)` for `1 ≤ n ≤ L`.
    pub fn cell(&self, n: usize) -> [C<T>; 2] {
        [self.amplitudes[site_a(n)], self.amplitudes[site_b(n)]]
    }

    pub fn norm(&self) -> T {
        crate::linalg::vec_norm(&self.amplitudes)
    }

    /// `(Σ|ψ^A|², Σ|ψ^B|²) / ‖ψ‖²`.
    pub fn chain_weights(&self) -> (T, T) {
        let (mut a, mut b) = (T::zero(), T::zero());
        for pair in self.amplitudes.chunks_exact(2) {
            a += pair[0].norm_sqr();
            b += pair[1].norm_sqr();
        }
        let total = a + b;
        if total == T::zero() {
            return (T::zero(), T::zero());
        }
        (a / total, b / total)
    }

    pub fn normalized(&self) -> Self {
        let s = self.norm();
        Self {
            amplitudes: self.amplitudes.iter().map(|z| *z / s).collect(),
            basis: self.basis,
        }
    }
}

/// Hamiltonian of the lattice in the requested basis.
pub fn build_hamiltonian<T: Real>(spec: &LatticeSpec<T>, basis: Basis) -> Result<CMatrix<T>> {
    spec.validate()?;
    match basis {
        Basis::Original => original(spec, true, true),
        Basis::Rotated => rotated(spec),
    }
}

/// Ordered inter-cell bonds `(n, n+1)`, plus the `(L, 1)` seam under PBC.
fn bonds<T: Real>(spec: &LatticeSpec<T>) -> Vec<(usize, usize)> {
    let l = spec.length;
    let mut out: Vec<_> = (1..l).map(|n| (n, n + 1)).collect();
    if spec.boundary == Boundary::Pbc {
        out.push((l, 1));
    }
    out
}

// `intra` selects the within-chain terms (hoppings along A and along B plus the
// losses); `inter` the A-B couplings. The two sets never share a matrix entry.
fn original<T: Real>(spec: &LatticeSpec<T>, intra: bool, inter: bool) -> Result<CMatrix<T>> {
    let (t1, t2) = (spec.t1(), spec.t2());
    let half = t2 / T::lit(2.0);
    let mut h = CMatrix::zeros(spec.dim(), spec.dim());
    for (n, m) in bonds(spec) {
        let (an, bn, am, bm) = (site_a(n), site_b(n), site_a(m), site_b(m));
        if intra {
            h[(am, an)] += C::new(T::zero(), half);
            h[(an, am)] += C::new(T::zero(), -half);
            h[(bm, bn)] += C::new(T::zero(), -half);
            h[(bn, bm)] += C::new(T::zero(), half);
        }
        if inter {
            h[(bm, an)] += creal(half);
            h[(an, bm)] += creal(half);
            h[(am, bn)] += creal(half);
            h[(bn, am)] += creal(half);
        }
    }
    for n in 1..=spec.length {
        let (a, b) = (site_a(n), site_b(n));
        if inter {
            h[(a, b)] += creal(t1);
            h[(b, a)] += creal(t1);
        }
        if intra {
            h[(b, b)] += C::new(T::zero(), -spec.profile.gamma_at(n)?);
        }
    }
    Ok(h)
}

fn rotated<T: Real>(spec: &LatticeSpec<T>) -> Result<CMatrix<T>> {
    let (t1, t2) = (spec.t1(), spec.t2());
    let two = T::lit(2.0);
    let mut h = CMatrix::zeros(spec.dim(), spec.dim());
    for (n, m) in bonds(spec) {
        h[(site_a(m), site_b(n))] += creal(t2);
        h[(site_b(n), site_a(m))] += creal(t2);
    }
    for n in 1..=spec.length {
        let g = spec.profile.gamma_at(n)?;
        let (a, b) = (site_a(n), site_b(n));
        h[(a, b)] += creal(t1 + g / two);
        h[(b, a)] += creal(t1 - g / two);
        h[(a, a)] += C::new(T::zero(), -g / two);
        h[(b, b)] += C::new(T::zero(), -g / two);
    }
    Ok(h)
}

/// Block-diagonal `R = ⊕ exp(-iπ/4 σx)`; the rotated Hamiltonian is `R⁻¹ H R`.
pub fn rotation_operator<T: Real>(length: usize) -> CMatrix<T> {
    let s = T::FRAC_1_SQRT_2();
    let mut r = CMatrix::zeros(2 * length, 2 * length);
    for n in 1..=length {
        let (a, b) = (site_a(n), site_b(n));
        r[(a, a)] = creal(s);
        r[(b, b)] = creal(s);
        r[(a, b)] = C::new(T::zero(), -s);
        r[(b, a)] = C::new(T::zero(), -s);
    }
    r
}

/// Applies `R⁻¹` (to rotated) or `R` (to original) cell by cell.
pub fn rotate_state<T: Real>(state: &StateVector<T>, direction: Direction) -> Result<StateVector<T>> {
    let (source, target, sign) = match direction {
        Direction::ToRotated => (Basis::Original, Basis::Rotated, T::one()),
        Direction::ToOriginal => (Basis::Rotated, Basis::Original, -T::one()),
    };
    if state.basis != source {
        return Err(Error::BasisMismatch {
            expected: source,
            found: state.basis,
        });
    }
    let s = T::FRAC_1_SQRT_2();
    let off = C::new(T::zero(), sign * s);
    let mut out = Vec::with_capacity(state.amplitudes.len());
    for pair in state.amplitudes.chunks_exact(2) {
        out.push(pair[0] * s + off * pair[1]);
        out.push(off * pair[0] + pair[1] * s);
    }
    StateVector::new(out, target)
}

/// Splits the original-basis Hamiltonian into the decoupled chains `H0`
/// (hoppings along each chain plus losses) and the inter-chain coupling `H'`.
pub fn decoupled_hamiltonian<T: Real>(spec: &LatticeSpec<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    spec.validate()?;
    Ok((original(spec, true, false)?, original(spec, false, true)?))
}

/// Extracts the sublattice block (`0` = chain A, `1` = chain B) of a `2L × 2L` matrix.
pub fn chain_block<T: Real>(h: &CMatrix<T>, chain: usize) -> CMatrix<T> {
    let l = h.nrows() / 2;
    CMatrix::from_fn(l, l, |i, j| h[(2 * i + chain, 2 * j + chain)])
}

/// Embeds a length-`L` chain vector into the `2L` site space.
pub fn embed_chain<T: Real>(v: &[C<T>], chain: usize) -> Vec<C<T>> {
    let mut out = vec![czero(); 2 * v.len()];
    for (i, z) in v.iter().enumerate() {
        out[2 * i + chain] = *z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn c64(re: f64, im: f64) -> C<f64> {
        cplx(re, im)
    }
    use proptest::prelude::*;

    fn lin(l: usize) -> LatticeSpec<f64> {
        LatticeSpec::new(0.4, 0.5, l, LossProfile::Linear { gamma0: 0.25 })
    }

    #[test]
    fn gamma_presets() {
        assert_eq!(LossProfile::Linear { gamma0: 0.25 }.gamma_at(4).unwrap(), 1.0);
        assert_eq!(LossProfile::Uniform { gamma: 5.0 }.gamma_at(17).unwrap(), 5.0);
        let log = LossProfile::Logarithmic { a: 20.0, b: 100.0 };
        assert_eq!(log.value(0.0).unwrap(), 0.0);
        assert!((log.gamma_at(100).unwrap() - 20.0 * 2f64.ln()).abs() < 1e-12);
        let t = LossProfile::Table { values: vec![0.1, 0.2] };
        assert_eq!(t.gamma_at(2).unwrap(), 0.2);
        assert_eq!(t.gamma_at(3), Err(Error::ProfileExhausted { n: 3, len: 2 }));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let profiles = [
            LossProfile::Logarithmic { a: 20.0, b: 100.0 },
            LossProfile::Linear { gamma0: 0.25 },
            LossProfile::Polynomial { coefficient: 0.25, alpha: 2.0 },
            LossProfile::Exponential { c: 0.25, alpha: 0.1 },
        ];
        for p in &profiles {
            let x = 7.3f64;
            let h = 1e-5;
            let fd = (p.value(x + h).unwrap() - p.value(x - h).unwrap()) / (2.0 * h);
            assert!((fd - p.derivative(x).unwrap()).abs() < 1e-6 * fd.abs().max(1.0), "{p:?}");
        }
    }

    #[test]
    fn single_cell_original() {
        let spec = LatticeSpec::new(0.4, 0.5, 1, LossProfile::Uniform { gamma: 0.25 });
        let h = build_hamiltonian(&spec, Basis::Original).unwrap();
        let want = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.4, 0.0)],
            vec![c64(0.4, 0.0), c64(0.0, -0.25)],
        ]);
        assert_eq!(h, want);
    }

    #[test]
    fn two_cell_original_by_hand() {
        // sites: 0 = 1A, 1 = 1B, 2 = 2A, 3 = 2B; γ1 = 0.25, γ2 = 0.5
        let i = |x: f64| c64(0.0, x);
        let r = |x: f64| c64(x, 0.0);
        let want = CMatrix::from_rows(&[
            vec![r(0.0), r(0.4), i(-0.25), r(0.25)],
            vec![r(0.4), i(-0.25), r(0.25), i(0.25)],
            vec![i(0.25), r(0.25), r(0.0), r(0.4)],
            vec![r(0.25), i(-0.25), r(0.4), i(-0.5)],
        ]);
        let h = build_hamiltonian(&lin(2), Basis::Original).unwrap();
        assert!(h.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn hermitian_when_lossless() {
        let spec = LatticeSpec::new(0.3, 0.7, 6, LossProfile::Uniform { gamma: 0.0 })
            .with_boundary(Boundary::Pbc);
        let h = build_hamiltonian(&spec, Basis::Original).unwrap();
        assert_eq!(h, h.adjoint());
    }

    #[test]
    fn rotation_is_unitary() {
        let r = rotation_operator::<f64>(1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = CMatrix::from_rows(&[
            vec![c64(s, 0.0), c64(0.0, -s)],
            vec![c64(0.0, -s), c64(s, 0.0)],
        ]);
        assert!(r.max_abs_diff(&want) < 1e-16);
        let r5 = rotation_operator::<f64>(5);
        assert!(r5.adjoint().matmul(&r5).max_abs_diff(&CMatrix::identity(10)) < 1e-15);
    }

    #[test]
    fn rotated_state_example() {
        let st = StateVector::new(vec![c64(1.0, 0.0), c64(0.0, 0.0)], Basis::Original).unwrap();
        let r = rotate_state(&st, Direction::ToRotated).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r.amplitudes[0] - c64(s, 0.0)).norm() < 1e-16);
        assert!((r.amplitudes[1] - c64(0.0, s)).norm() < 1e-16);
        assert_eq!(
            rotate_state(&r, Direction::ToRotated),
            Err(Error::BasisMismatch {
                expected: Basis::Original,
                found: Basis::Rotated
            })
        );
    }

    #[test]
    fn decoupled_split_structure() {
        for bc in [Boundary::Obc, Boundary::Pbc] {
            let spec = lin(5).with_boundary(bc);
            let (h0, hp) = decoupled_hamiltonian(&spec).unwrap();
            let h = build_hamiltonian(&spec, Basis::Original).unwrap();
            assert_eq!(h0.add(&hp), h);
            for i in 0..10 {
                for j in 0..10 {
                    if i % 2 == j % 2 {
                        assert_eq!(hp[(i, j)], czero());
                    } else {
                        assert_eq!(h0[(i, j)], czero());
                    }
                }
            }
        }
    }

    #[test]
    fn chain_a_plane_wave_energy_on_ring() {
        // ring of 8 cells so that k = π/4 is commensurate
        let l = 8;
        let spec = LatticeSpec::new(0.4, 0.5, l, LossProfile::Uniform { gamma: 1.0 })
            .with_boundary(Boundary::Pbc);
        let (h0, _) = decoupled_hamiltonian(&spec).unwrap();
        let a = chain_block(&h0, 0);
        let k = std::f64::consts::FRAC_PI_4;
        let psi: Vec<C<f64>> = (1..=l).map(|n| C::from_polar(1.0, k * n as f64)).collect();
        let hpsi = a.apply(&psi);
        let e = 0.5 * k.sin();
        for (x, y) in hpsi.iter().zip(&psi) {
            assert!((x - y * e).norm() < 1e-14);
        }
    }

    #[test]
    fn banded_structure() {
        let h = build_hamiltonian(&lin(6), Basis::Original).unwrap();
        for i in 0..12usize {
            for j in 0..12 {
                if (i / 2).abs_diff(j / 2) > 1 {
                    assert_eq!(h[(i, j)], czero());
                }
            }
        }
        let hp = build_hamiltonian(&lin(6).with_boundary(Boundary::Pbc), Basis::Original).unwrap();
        assert_ne!(hp[(10, 0)], czero());
    }

    #[test]
    fn spec_json_round_trip() {
        let json = r#"{"t1":0.4,"t2":0.5,"L":60,"profile":{"kind":"linear","gamma0":0.25},"boundary":"pbc"}"#;
        let spec = LatticeSpec::<f64>::from_json(json).unwrap();
        assert_eq!(spec.length, 60);
        assert_eq!(spec.boundary, Boundary::Pbc);
        assert_eq!(spec.profile, LossProfile::Linear { gamma0: 0.25 });
        assert_eq!(LatticeSpec::<f64>::from_json(&spec.to_json()).unwrap(), spec);
        let short = r#"{"t1":0.4,"t2":0.5,"L":3,"profile":{"kind":"table","values":[1,2]}}"#;
        assert!(matches!(
            LatticeSpec::<f64>::from_json(short),
            Err(Error::ProfileExhausted { .. })
        ));
        let zero = r#"{"t1":0.4,"t2":0.0,"L":3,"profile":{"kind":"uniform","gamma":1}}"#;
        assert_eq!(LatticeSpec::<f64>::from_json(zero), Err(Error::ZeroInterCellHopping));
    }

    #[test]
    fn f32_builds() {
        let spec = LatticeSpec::<f32>::new(0.4, 0.5, 3, LossProfile::Linear { gamma0: 0.25 });
        let h = build_hamiltonian(&spec, Basis::Rotated).unwrap();
        assert_eq!(h.nrows(), 6);
    }

    pub(crate) fn profile_strategy() -> impl Strategy<Value = LossProfile<f64>> {
        prop_oneof![
            (0.0..6.0f64).prop_map(|gamma| LossProfile::Uniform { gamma }),
            (0.5..30.0f64, 5.0..200.0f64).prop_map(|(a, b)| LossProfile::Logarithmic { a, b }),
            (0.01..1.0f64).prop_map(|gamma0| LossProfile::Linear { gamma0 }),
            (0.01..0.5f64, 0.5..2.5f64)
                .prop_map(|(coefficient, alpha)| LossProfile::Polynomial { coefficient, alpha }),
            (0.01..0.5f64, 0.01..0.3f64).prop_map(|(c, alpha)| LossProfile::Exponential { c, alpha }),
        ]
    }

    proptest! {
        #[test]
        fn trace_is_minus_i_total_loss(profile in profile_strategy(), l in 1usize..12, pbc in any::<bool>()) {
            let bc = if pbc { Boundary::Pbc } else { Boundary::Obc };
            let spec = LatticeSpec::new(0.4, 0.5, l, profile).with_boundary(bc);
            let h = build_hamiltonian(&spec, Basis::Original).unwrap();
            let total: f64 = spec.gammas().unwrap().iter().sum();
            prop_assert_eq!(h.trace().re, 0.0);
            prop_assert!((h.trace().im + total).abs() <= 1e-12 * total.max(1.0));
        }

        #[test]
        fn rotated_builder_matches_similarity(profile in profile_strategy(), l in 1usize..6,
                                              t1 in 0.0..1.0f64, pbc in any::<bool>()) {
            let bc = if pbc { Boundary::Pbc } else { Boundary::Obc };
            let spec = LatticeSpec::new(t1, 0.5, l, profile).with_boundary(bc);
            let h = build_hamiltonian(&spec, Basis::Original).unwrap();
            let r = rotation_operator::<f64>(l);
            let sim = r.adjoint().matmul(&h).matmul(&r);
            let hr = build_hamiltonian(&spec, Basis::Rotated).unwrap();
            prop_assert!(sim.max_abs_diff(&hr) < 1e-12 * h.max_abs().max(1.0));
        }

        #[test]
        fn rotation_round_trip(re in proptest::collection::vec(-1.0..1.0f64, 8),
                               im in proptest::collection::vec(-1.0..1.0f64, 8)) {
            let amps: Vec<C<f64>> = re.iter().zip(&im).map(|(a, b)| C::new(*a, *b)).collect();
            let st = StateVector::new(amps, Basis::Original).unwrap();
            let r = rotate_state(&st, Direction::ToRotated).unwrap();
            prop_assert!((r.norm() - st.norm()).abs() < 1e-12);
            let back = rotate_state(&r, Direction::ToOriginal).unwrap();
            for (x, y) in back.amplitudes.iter().zip(&st.amplitudes) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
