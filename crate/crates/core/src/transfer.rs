//! Per-cell transfer matrices, their eigenvalue flow and the asymptotic analysis.
//!
//! Transfer matrices act on rotated-basis cell amplitudes `ψ(n) = (ψ_n^{A'}, ψ_n^{B'})`
//! and satisfy `ψ(n) = T(n) ψ(n-1)` for `2 ≤ n ≤ L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LatticeSpec, LossProfile};
use crate::scalar::{creal, czero, imag_unit, sqrt_upper, Real, C};

/// Midpoint-rule node count for the geometric-mean integral.
pub const GM_NODES: usize = 512;

/// Allowed change of the mean log-ratio when the quadrature grid is doubled.
pub const GM_REFINE_TOL: f64 = 0.05;

pub type Mat2<T> = [[C<T>; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix<T> {
    pub n: usize,
    pub entries: Mat2<T>,
}

impl<T: Real> TransferMatrix<T> {
    pub fn det(&self) -> C<T> {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C<T> {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        let m = &self.entries;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

fn cell_gammas<T: Real>(spec: &LatticeSpec<T>, n: usize) -> Result<(T, T)> {
    if n < 2 {
        return Err(Error::InvalidIndex(n));
    }
    let g = spec.profile.gamma_at(n)?;
    let gp = spec.profile.gamma_at(n - 1)?;
    let denom = spec.t1() + g / T::lit(2.0);
    if denom.abs() <= T::epsilon() * (spec.t1().abs() + g) {
        return Err(Error::SingularCell { n });
    }
    Ok((g, gp))
}

/// Coefficients of the characteristic polynomial `λ² + b λ + c` of `T(n)`.
pub fn quadratic_coeffs<T: Real>(spec: &LatticeSpec<T>, e: C<T>, n: usize) -> Result<(C<T>, C<T>)> {
    let (g, gp) = cell_gammas(spec, n)?;
    let (t1, t2) = (spec.t1(), spec.t2());
    if t2 == T::zero() {
        return Err(Error::ZeroInterCellHopping);
    }
    let two = T::lit(2.0);
    let gm = (g - gp) / two;
    let gpl = (g + gp) / two;
    let denom = t2 * (t1 + g / two);
    let num = creal(t1 * t1 + t2 * t2 + gm * t1) - e * e - imag_unit::<T>() * e * gpl;
    let b = num / denom;
    let c = creal((t1 - gp / two) / (t1 + g / two));
    Ok((b, c))
}

pub fn transfer_matrix<T: Real>(spec: &LatticeSpec<T>, e: C<T>, n: usize) -> Result<TransferMatrix<T>> {
    let (g, gp) = cell_gammas(spec, n)?;
    let (t1, t2) = (spec.t1(), spec.t2());
    if t2 == T::zero() {
        return Err(Error::ZeroInterCellHopping);
    }
    let two = T::lit(2.0);
    let i = imag_unit::<T>();
    let ep = e + i * (gp / two);
    let en = e + i * (g / two);
    let lo = t1 - gp / two;
    let hi = t1 + g / two;
    let entries = [
        [creal(-lo / t2), ep / t2],
        [-en * lo / (t2 * hi), (ep * en - creal(t2 * t2)) / (t2 * hi)],
    ];
    Ok(TransferMatrix { n, entries })
}

/// One step of the flow: `T(n)`, its labelled eigenvalues and biorthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCell<T> {
    pub matrix: TransferMatrix<T>,
    pub b: C<T>,
    pub c: C<T>,
    pub lambda_plus: C<T>,
    pub lambda_minus: C<T>,
    pub right_plus: [C<T>; 2],
    pub right_minus: [C<T>; 2],
    /// Row vectors with `left_± · right_± = 1` and `left_± · right_∓ = 0`.
    pub left_plus: [C<T>; 2],
    pub left_minus: [C<T>; 2],
    /// Coincident roots; eigenvectors are left at zero.
    pub defective: bool,
}

impl<T: Real> FlowCell<T> {
    pub fn n(&self) -> usize {
        self.matrix.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferFlow<T> {
    pub spec: LatticeSpec<T>,
    pub energy: C<T>,
    /// Cells `n = 2..=L` in order.
    pub cells: Vec<FlowCell<T>>,
    pub kappa: C<T>,
    pub lambda0_plus: C<T>,
    pub lambda0_minus: C<T>,
}

impl<T: Real> TransferFlow<T> {
    /// Cell for lattice index `n` (`2 ≤ n ≤ L`).
    pub fn cell(&self, n: usize) -> Option<&FlowCell<T>> {
        n.checked_sub(2).and_then(|k| self.cells.get(k))
    }

    pub fn has_defective(&self) -> bool {
        self.cells.iter().any(|c| c.defective)
    }
}

fn right_vec<T: Real>(m: &Mat2<T>, lam: C<T>) -> [C<T>; 2] {
    let v1 = [m[0][1], lam - m[0][0]];
    let v2 = [lam - m[1][1], m[1][0]];
    let n1 = v1[0].norm().hypot(v1[1].norm());
    let n2 = v2[0].norm().hypot(v2[1].norm());
    let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    [v[0] / n, v[1] / n]
}

fn left_vec<T: Real>(m: &Mat2<T>, lam: C<T>) -> [C<T>; 2] {
    let u1 = [m[1][0], lam - m[0][0]];
    let u2 = [lam - m[1][1], m[0][1]];
    let n1 = u1[0].norm().hypot(u1[1].norm());
    let n2 = u2[0].norm().hypot(u2[1].norm());
    if n1 >= n2 {
        u1
    } else {
        u2
    }
}

fn dot2<T: Real>(a: [C<T>; 2], b: [C<T>; 2]) -> C<T> {
    a[0] * b[0] + a[1] * b[1]
}

/// Raw roots `(-b ± √(b²-4c))/2` with the square-root argument taken in `[0, 2π)`.
pub fn raw_roots<T: Real>(b: C<T>, c: C<T>) -> (C<T>, C<T>) {
    let d = sqrt_upper(b * b - c * T::lit(4.0));
    let half = T::lit(0.5);
    ((-b + d) * half, (-b - d) * half)
}

/// Transfer-matrix flow for energy `e`. Roots are labelled so that `λ⁻` is the
/// branch continuously connected to `λ₀⁻`: the assignment at `n = L` minimises
/// the distance to `(λ₀⁺, λ₀⁻)` and earlier cells follow by continuity.
pub fn lambda_flow<T: Real>(spec: &LatticeSpec<T>, e: C<T>) -> Result<TransferFlow<T>> {
    spec.validate()?;
    let (kappa, l0p, l0m) = lambda0_and_kappa(e, spec.t2());
    let mut raw = Vec::with_capacity(spec.length.saturating_sub(1));
    for n in 2..=spec.length {
        let m = transfer_matrix(spec, e, n)?;
        let (b, c) = quadratic_coeffs(spec, e, n)?;
        let (r1, r2) = raw_roots(b, c);
        raw.push((m, b, c, r1, r2));
    }
    let mut labelled: Vec<(C<T>, C<T>)> = vec![(czero(), czero()); raw.len()];
    for k in (0..raw.len()).rev() {
        let (_, _, _, r1, r2) = raw[k];
        let (tp, tm) = if k + 1 == raw.len() {
            (l0p, l0m)
        } else {
            labelled[k + 1]
        };
        labelled[k] = if (r1 - tp).norm() + (r2 - tm).norm() <= (r2 - tp).norm() + (r1 - tm).norm() {
            (r1, r2)
        } else {
            (r2, r1)
        };
    }
    let mut cells = Vec::with_capacity(raw.len());
    for ((m, b, c, _, _), (lp, lm)) in raw.into_iter().zip(labelled) {
        let scale = lp.norm().max(lm.norm()).max(T::min_positive_value());
        let defective = (lp - lm).norm() <= T::epsilon() * scale;
        let zero = [czero(); 2];
        let (rp, rm, up, um) = if defective {
            (zero, zero, zero, zero)
        } else {
            let rp = right_vec(&m.entries, lp);
            let rm = right_vec(&m.entries, lm);
            let up = left_vec(&m.entries, lp);
            let um = left_vec(&m.entries, lm);
            let sp = dot2(up, rp);
            let sm = dot2(um, rm);
            (rp, rm, [up[0] / sp, up[1] / sp], [um[0] / sm, um[1] / sm])
        };
        cells.push(FlowCell {
            matrix: m,
            b,
            c,
            lambda_plus: lp,
            lambda_minus: lm,
            right_plus: rp,
            right_minus: rm,
            left_plus: up,
            left_minus: um,
            defective,
        });
    }
    Ok(TransferFlow {
        spec: spec.clone(),
        energy: e,
        cells,
        kappa,
        lambda0_plus: l0p,
        lambda0_minus: l0m,
    })
}

/// `κ = arcsin(E/t₂)` on the principal branch and `λ₀± = ±e^{±iκ}`.
pub fn lambda0_and_kappa<T: Real>(e: C<T>, t2: T) -> (C<T>, C<T>, C<T>) {
    let kappa = (e / t2).asin();
    let i = imag_unit::<T>();
    let plus = (i * kappa).exp();
    let minus = -(-i * kappa).exp();
    (kappa, plus, minus)
}

/// `λ₀± = (iE/t₂)[1 ± √(1 − (t₂/E)²)]` with the standard principal square root.
/// Agrees with [`lambda0_and_kappa`]; undefined at `E = 0`.
pub fn lambda0_closed_form<T: Real>(e: C<T>, t2: T) -> Option<(C<T>, C<T>)> {
    if e.norm() == T::zero() {
        return None;
    }
    let q = creal(t2) / e;
    let root = (creal(T::one()) - q * q).sqrt();
    let pre = imag_unit::<T>() * e / t2;
    Some((pre * (creal(T::one()) + root), pre * (creal(T::one()) - root)))
}

/// Asymptotic class of the loss profile, by the limit of `γ_n − γ_{n−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "lowercase", bound = "T: Real")]
pub enum ConvergenceCase<T> {
    /// Increments vanish (logarithmic, `n^α` with `α < 1`).
    Sublinear,
    /// Increments tend to `gamma0`.
    Linear { gamma0: T },
    /// Increments diverge but relative increments vanish (`n^α`, `α > 1`).
    Superlinear,
    /// Relative increments tend to `1 − e^{−α}`.
    Exponential { alpha: T },
}

impl<T: Real> ConvergenceCase<T> {
    /// Case implied by a closed-form increasing profile. `None` for uniform and table profiles.
    pub fn of_profile(profile: &LossProfile<T>) -> Option<Self> {
        match *profile {
            LossProfile::Logarithmic { .. } => Some(Self::Sublinear),
            LossProfile::Linear { gamma0 } => Some(Self::Linear { gamma0 }),
            LossProfile::Polynomial { coefficient, alpha } => Some(if alpha < T::one() {
                Self::Sublinear
            } else if alpha == T::one() {
                Self::Linear { gamma0: coefficient }
            } else {
                Self::Superlinear
            }),
            LossProfile::Exponential { alpha, .. } => Some(Self::Exponential { alpha }),
            LossProfile::Uniform { .. } | LossProfile::Table { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPair<T> {
    /// `λ₁⁻/λ₀⁻`
    pub minus: C<T>,
    /// `λ₁⁺/λ₀⁺`
    pub plus: C<T>,
    /// Set for the exponential case, where `λ₀±` themselves are shifted
    /// (see [`exponential_lambda0`]) and only the ratio form is shared.
    pub shifted_lambda0: bool,
}

/// Leading Laurent ratios `λ₁±/λ₀±` for the given case at complex `κ`.
pub fn convergence_ratio<T: Real>(case: ConvergenceCase<T>, t1: T, t2: T, kappa: C<T>) -> Result<RatioPair<T>> {
    let ck = kappa.cos();
    let den = ck * t2;
    if !(den.norm() > T::epsilon() * t2.abs()) {
        return Err(Error::DivergentRatio);
    }
    let p = creal::<T>(t1) + den;
    let m = creal::<T>(t1) - den;
    let (minus, plus) = match case {
        ConvergenceCase::Sublinear | ConvergenceCase::Exponential { .. } => (m * m / den, -(p * p) / den),
        ConvergenceCase::Linear { gamma0 } => {
            let h = gamma0 / T::lit(2.0);
            (m * (m + h) / den, -(p * (p + h)) / den)
        }
        ConvergenceCase::Superlinear => (m / den, -p / den),
    };
    if !(crate::scalar::is_finite_c(&minus) && crate::scalar::is_finite_c(&plus)) {
        return Err(Error::DivergentRatio);
    }
    Ok(RatioPair {
        minus,
        plus,
        shifted_lambda0: matches!(case, ConvergenceCase::Exponential { .. }),
    })
}

/// Shifted asymptotes `(λ₀⁺, λ₀⁻)` for an exponential profile: the roots of
/// `λ² + b∞λ + c∞` where `b∞ = (ρt₁ − i(2−ρ)E)/t₂`, `c∞ = −e^{−α}`, `ρ = 1 − e^{−α}`.
pub fn exponential_lambda0<T: Real>(e: C<T>, t1: T, t2: T, alpha: T) -> (C<T>, C<T>) {
    let q = (-alpha).exp();
    let rho = T::one() - q;
    let i = imag_unit::<T>();
    let b = (creal(rho * t1) - i * e * (T::lit(2.0) - rho)) / t2;
    let c = creal(-q);
    let (r1, r2) = raw_roots(b, c);
    let (_, p0, m0) = lambda0_and_kappa(e, t2);
    if (r1 - p0).norm() + (r2 - m0).norm() <= (r2 - p0).norm() + (r1 - m0).norm() {
        (r1, r2)
    } else {
        (r2, r1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricMean<T> {
    pub minus: T,
    pub plus: T,
}

fn mean_log<T: Real>(case: ConvergenceCase<T>, t1: T, t2: T, nodes: usize) -> Result<(T, T)> {
    let pi = T::PI();
    let h = pi / T::from_usize(nodes).unwrap();
    let (mut sm, mut sp) = (T::zero(), T::zero());
    for j in 0..nodes {
        let k = -pi / T::lit(2.0) + (T::from_usize(j).unwrap() + T::lit(0.5)) * h;
        let r = convergence_ratio(case, t1, t2, creal(k))?;
        sm += r.minus.norm().ln();
        sp += r.plus.norm().ln();
    }
    let n = T::from_usize(nodes).unwrap();
    Ok((sm / n, sp / n))
}

/// Geometric mean of `|λ₁±/λ₀±|` over real `κ ∈ (−π/2, π/2)` by the midpoint rule.
pub fn geometric_mean_ratio<T: Real>(case: ConvergenceCase<T>, t1: T, t2: T) -> Result<GeometricMean<T>> {
    let (m, p) = mean_log(case, t1, t2, GM_NODES)?;
    let (m2, p2) = mean_log(case, t1, t2, 2 * GM_NODES)?;
    let tol = T::lit(GM_REFINE_TOL);
    let ok = |a: T, b: T| a.is_finite() && b.is_finite() && (a - b).abs() <= tol;
    if !ok(m, m2) || !ok(p, p2) {
        return Err(Error::DivergentMean);
    }
    Ok(GeometricMean {
        minus: m.exp(),
        plus: p.exp(),
    })
}

/// `|(λ⁻(L) − λ₀⁻)/λ₀⁻|`: how far the last cell's decaying root is from its asymptote.
pub fn isse_criterion<T: Real>(spec: &LatticeSpec<T>, e: C<T>) -> Result<T> {
    if spec.length < 2 {
        return Err(Error::InsufficientRange {
            needed: 2,
            got: spec.length,
        });
    }
    let flow = lambda_flow(spec, e)?;
    let last = flow.cells.last().expect("L >= 2 gives at least one cell");
    Ok(((last.lambda_minus - flow.lambda0_minus) / flow.lambda0_minus).norm())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub case: ConvergenceCase<T>,
    pub ratio_minus: C<T>,
    pub ratio_plus: C<T>,
    pub gm_minus: T,
    pub gm_plus: T,
    pub isse_criterion: T,
}

pub fn convergence_report<T: Real>(spec: &LatticeSpec<T>, e: C<T>) -> Result<ConvergenceReport<T>> {
    let case = ConvergenceCase::of_profile(&spec.profile)
        .ok_or_else(|| Error::InvalidSpec("profile has no asymptotic convergence case".into()))?;
    let (kappa, _, _) = lambda0_and_kappa(e, spec.t2());
    let r = convergence_ratio(case, spec.t1(), spec.t2(), kappa)?;
    let gm = geometric_mean_ratio(case, spec.t1(), spec.t2())?;
    Ok(ConvergenceReport {
        case,
        ratio_minus: r.minus,
        ratio_plus: r.plus,
        gm_minus: gm.minus,
        gm_plus: gm.plus,
        isse_criterion: isse_criterion(spec, e)?,
    })
}
