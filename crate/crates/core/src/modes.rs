//! Eigenstates seen through the transfer-matrix eigenbasis: decomposition into
//! `ψ_n^±`, the exact recurrence between neighbouring cells, region
//! segmentation and bulk decay fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rotate_state, Basis, Direction, StateVector};
use crate::scalar::{Real, C};
use crate::transfer::{lambda_flow, Mat2, TransferFlow};

/// Default `|ψ_n^+|/|ψ_n^-|` level marking the end of region I.
pub const REGION_I_THRESHOLD: f64 = 1e-2;

/// Cells whose amplitude falls below this fraction of the state norm are
/// excluded from residual checks.
pub const NEGLIGIBLE_CELL: f64 = 1e-12;

/// Amplitudes below this are treated as underflowed and masked from fits.
pub const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regions {
    /// First cell of region II.
    pub i_end: usize,
    /// First cell of region III.
    pub iii_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition<T> {
    pub energy: C<T>,
    /// Rotated-basis cell amplitudes `(ψ_n^{A'}, ψ_n^{B'})` for `n = 1..=L`.
    pub cells: Vec<[C<T>; 2]>,
    /// `ψ_n^+` for `n = 2..=L`; `None` marks a defective transfer cell.
    pub psi_plus: Vec<Option<C<T>>>,
    pub psi_minus: Vec<Option<C<T>>>,
    /// `O[a][b] = ⟨λ^a_L(n)|λ^b_R(n−1)⟩` with index 0 = `+`, 1 = `−`, for
    /// `n = 2..=L` (`None` at `n = 2` and next to defective cells).
    pub overlaps: Vec<Option<Mat2<T>>>,
    pub regions: Option<Regions>,
}

impl<T: Real> ModeDecomposition<T> {
    pub fn length(&self) -> usize {
        self.cells.len()
    }

    /// `(ψ_n^+, ψ_n^-)` for `2 ≤ n ≤ L`.
    pub fn components(&self, n: usize) -> Option<(C<T>, C<T>)> {
        let k = n.checked_sub(2)?;
        Some((*self.psi_plus.get(k)?.as_ref()?, *self.psi_minus.get(k)?.as_ref()?))
    }

    /// `|ψ_n^+| / |ψ_n^-|`.
    pub fn ratio(&self, n: usize) -> Option<T> {
        self.components(n).map(|(p, m)| p.norm() / m.norm())
    }

    fn state_norm(&self) -> T {
        self.cells
            .iter()
            .fold(T::zero(), |acc, c| acc + c[0].norm_sqr() + c[1].norm_sqr())
            .sqrt()
    }
}

fn dot2<T: Real>(a: [C<T>; 2], b: [C<T>; 2]) -> C<T> {
    a[0] * b[0] + a[1] * b[1]
}

fn norm2<T: Real>(v: [C<T>; 2]) -> T {
    v[0].norm().hypot(v[1].norm())
}

/// Projects a rotated-basis state onto the left eigenvectors of each `T(n)`.
pub fn decompose<T: Real>(state: &StateVector<T>, flow: &TransferFlow<T>) -> Result<ModeDecomposition<T>> {
    if state.basis != Basis::Rotated {
        return Err(Error::BasisMismatch {
            expected: Basis::Rotated,
            found: state.basis,
        });
    }
    let l = flow.spec.length;
    if state.amplitudes.len() != 2 * l {
        return Err(Error::DimensionMismatch {
            expected: 2 * l,
            found: state.amplitudes.len(),
        });
    }
    let cells: Vec<[C<T>; 2]> = (1..=l).map(|n| state.cell(n)).collect();
    let mut psi_plus = Vec::with_capacity(flow.cells.len());
    let mut psi_minus = Vec::with_capacity(flow.cells.len());
    let mut overlaps = Vec::with_capacity(flow.cells.len());
    for (k, fc) in flow.cells.iter().enumerate() {
        let n = k + 2;
        if fc.defective {
            psi_plus.push(None);
            psi_minus.push(None);
            overlaps.push(None);
            continue;
        }
        let v = cells[n - 1];
        psi_plus.push(Some(dot2(fc.left_plus, v)));
        psi_minus.push(Some(dot2(fc.left_minus, v)));
        let prev = k.checked_sub(1).map(|j| &flow.cells[j]).filter(|p| !p.defective);
        overlaps.push(prev.map(|p| {
            [
                [dot2(fc.left_plus, p.right_plus), dot2(fc.left_plus, p.right_minus)],
                [dot2(fc.left_minus, p.right_plus), dot2(fc.left_minus, p.right_minus)],
            ]
        }));
    }
    let mut dec = ModeDecomposition {
        energy: flow.energy,
        cells,
        psi_plus,
        psi_minus,
        overlaps,
        regions: None,
    };
    dec.regions = segment_regions(&dec, flow).ok();
    Ok(dec)
}

/// Largest `‖ψ_n^+ r_+(n) + ψ_n^- r_-(n) − ψ(n)‖ / ‖ψ‖` over decomposed cells.
pub fn reconstruction_error<T: Real>(dec: &ModeDecomposition<T>, flow: &TransferFlow<T>) -> T {
    let scale = dec.state_norm();
    let mut worst = T::zero();
    for (k, fc) in flow.cells.iter().enumerate() {
        let Some((p, m)) = dec.components(k + 2) else { continue };
        let v = dec.cells[k + 1];
        let d = [
            p * fc.right_plus[0] + m * fc.right_minus[0] - v[0],
            p * fc.right_plus[1] + m * fc.right_minus[1] - v[1],
        ];
        worst = worst.max(norm2(d) / scale);
    }
    worst
}

/// Checks `ψ_n^± = λ^±(n) [O_{±±} ψ_{n−1}^± + O_{±∓} ψ_{n−1}^∓]`, where the
/// left side is the projection of `T(n) ψ(n−1)`. Each cell's mismatch is
/// measured relative to the terms and to `‖u_±‖‖T(n)ψ(n−1)‖`, the size of the
/// projected vector: when `|λ⁺| ≫ |λ⁻|` the `−` projection cancels against a
/// much larger `+` component and rounding scales with the latter.
pub fn recurrence_check<T: Real>(dec: &ModeDecomposition<T>, flow: &TransferFlow<T>) -> T {
    let mut worst = T::zero();
    for k in 1..flow.cells.len() {
        let n = k + 2;
        let fc = &flow.cells[k];
        let (Some(o), Some((pp, pm))) = (dec.overlaps[k], dec.components(n - 1)) else {
            continue;
        };
        let propagated = fc.matrix.apply(dec.cells[n - 2]);
        for (a, (lam, left)) in [(fc.lambda_plus, fc.left_plus), (fc.lambda_minus, fc.left_minus)]
            .into_iter()
            .enumerate()
        {
            let lhs = dot2(left, propagated);
            let t1 = lam * o[a][0] * pp;
            let t2 = lam * o[a][1] * pm;
            let scale = lhs.norm() + t1.norm() + t2.norm() + norm2(left) * norm2(propagated);
            if scale > T::zero() {
                worst = worst.max((lhs - t1 - t2).norm() / scale);
            }
        }
    }
    worst
}

/// Largest `‖ψ(n) − T(n)ψ(n−1)‖ / ‖ψ(n)‖` over cells with non-negligible amplitude.
pub fn propagation_residual<T: Real>(dec: &ModeDecomposition<T>, flow: &TransferFlow<T>) -> T {
    let cut = T::lit(NEGLIGIBLE_CELL) * dec.state_norm();
    let mut worst = T::zero();
    for fc in &flow.cells {
        let n = fc.n();
        let cur = dec.cells[n - 1];
        let nc = norm2(cur);
        if nc <= cut {
            continue;
        }
        let p = fc.matrix.apply(dec.cells[n - 2]);
        worst = worst.max(norm2([cur[0] - p[0], cur[1] - p[1]]) / nc);
    }
    worst
}

/// Segments with the default region-I threshold.
pub fn segment_regions<T: Real>(dec: &ModeDecomposition<T>, flow: &TransferFlow<T>) -> Result<Regions> {
    segment_regions_with(dec, flow, T::lit(REGION_I_THRESHOLD))
}

/// Region III starts where `|λ⁺(n)|` crosses 1 from below; region II starts at
/// the first cell where `|ψ_n^+|/|ψ_n^-|` drops under `threshold`.
pub fn segment_regions_with<T: Real>(
    dec: &ModeDecomposition<T>,
    flow: &TransferFlow<T>,
    threshold: T,
) -> Result<Regions> {
    if flow.has_defective() {
        return Err(Error::DegenerateSegmentation("defective transfer cell"));
    }
    let iii_start = flow
        .cells
        .windows(2)
        .find(|w| w[0].lambda_plus.norm() <= T::one() && w[1].lambda_plus.norm() > T::one())
        .map(|w| w[1].n())
        .ok_or(Error::DegenerateSegmentation("|lambda+| never crosses 1"))?;
    let i_end = (2..=dec.length())
        .find(|&n| dec.ratio(n).is_some_and(|r| r < threshold))
        .ok_or(Error::DegenerateSegmentation("psi+/psi- never drops below threshold"))?;
    if i_end >= iii_start {
        return Err(Error::DegenerateSegmentation("region II is empty"));
    }
    Ok(Regions { i_end, iii_start })
}

/// Per-cell amplitude used by the decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitAmplitude {
    /// `max(|ψ^{A'}|, |ψ^{B'}|)`, insensitive to sublattice oscillation.
    #[default]
    MaxSublattice,
    APrime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit<T> {
    pub beta: T,
    /// Inclusive cell range actually fitted.
    pub fit_range: (usize, usize),
    /// RMS deviation of `ln|ψ_n|` from the fitted line.
    pub residual: T,
    pub reference: Option<T>,
    /// Cells dropped for underflow.
    pub masked: usize,
}

/// Least-squares fit of `ln|ψ_n| = a + n ln β` over `range` (inclusive, 1-based cells).
pub fn fit_decay_rate<T: Real>(
    state: &StateVector<T>,
    range: (usize, usize),
    amplitude: FitAmplitude,
) -> Result<DecayFit<T>> {
    let (start, end) = range;
    if start == 0 || end > state.cells() || end < start {
        return Err(Error::InvalidIndex(if start == 0 { 0 } else { end }));
    }
    let mut pts = Vec::new();
    let mut masked = 0;
    for n in start..=end {
        let c = state.cell(n);
        let a = match amplitude {
            FitAmplitude::MaxSublattice => c[0].norm().max(c[1].norm()),
            FitAmplitude::APrime => c[0].norm(),
        };
        if a > T::lit(UNDERFLOW) {
            pts.push((T::from_usize(n).unwrap(), a.ln()));
        } else {
            masked += 1;
        }
    }
    if pts.len() < 4 {
        return Err(Error::InsufficientRange {
            needed: 4,
            got: pts.len(),
        });
    }
    let m = T::from_usize(pts.len()).unwrap();
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / m;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / m;
    let sxx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    let sxy = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let slope = sxy / sxx;
    let rss = pts.iter().fold(T::zero(), |s, p| {
        let d = p.1 - (my + slope * (p.0 - mx));
        s + d * d
    });
    Ok(DecayFit {
        beta: slope.exp(),
        fit_range: range,
        residual: (rss / m).sqrt(),
        reference: None,
        masked,
    })
}

/// Everything the mode-level diagnostics need for one eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAnalysis<T> {
    pub rotated: StateVector<T>,
    pub flow: TransferFlow<T>,
    pub decomposition: ModeDecomposition<T>,
    pub regions: Result<Regions>,
    /// `max |ψ_n^+|/|ψ_n^-|` over region II.
    pub region_ii_max_ratio: Option<T>,
    /// Decay fit over region II.
    pub fit: Option<DecayFit<T>>,
}

/// Rotates an original-basis eigenstate, builds its flow and runs the decomposition,
/// segmentation and region-II decay fit.
pub fn analyze_mode<T: Real>(
    spec: &crate::model::LatticeSpec<T>,
    energy: C<T>,
    original: &StateVector<T>,
    threshold: T,
    amplitude: FitAmplitude,
) -> Result<ModeAnalysis<T>> {
    let rotated = rotate_state(original, Direction::ToRotated)?;
    let flow = lambda_flow(spec, energy)?;
    let mut decomposition = decompose(&rotated, &flow)?;
    let regions = segment_regions_with(&decomposition, &flow, threshold);
    decomposition.regions = regions.clone().ok();
    let (mut region_ii_max_ratio, mut fit) = (None, None);
    if let Ok(r) = &regions {
        region_ii_max_ratio = (r.i_end..r.iii_start)
            .filter_map(|n| decomposition.ratio(n))
            .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.max(x))));
        if let Ok(mut f) = fit_decay_rate(&rotated, (r.i_end, r.iii_start - 1), amplitude) {
            f.reference = Some(flow.lambda0_minus.norm());
            fit = Some(f);
        }
    }
    Ok(ModeAnalysis {
        rotated,
        flow,
        decomposition,
        regions,
        region_ii_max_ratio,
        fit,
    })
}
