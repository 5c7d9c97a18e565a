//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar the toolkit is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + Signed
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the toolkit scalar.
pub type C<T> = Complex<T>;

#[cfg(test)]
pub(crate) fn cplx<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn imag_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Square root whose argument angle is taken in `[0, 2π)`, so the result
/// always lies in the closed upper half-plane.
pub fn sqrt_upper<T: Real>(z: C<T>) -> C<T> {
    let mut theta = z.im.atan2(z.re);
    if theta < T::zero() {
        theta += T::TAU();
    }
    let half = theta / T::lit(2.0);
    let r = z.norm().sqrt();
    Complex::new(r * half.cos(), r * half.sin())
}

/// Canonical ordering: ascending real part, ties broken by descending imaginary part.
pub fn canonical_cmp<T: Real>(a: &C<T>, b: &C<T>) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal) {
        Ordering::Equal => b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal),
        other => other,
    }
}

pub(crate) fn is_finite_c<T: Real>(z: &C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_upper_stays_in_upper_half_plane() {
        for &(re, im) in &[(1.0, 0.0), (-1.0, 0.0), (0.3, -0.7), (-2.0, -1e-9), (0.0, 4.0)] {
            let z: C<f64> = cplx(re, im);
            let r = sqrt_upper(z);
            assert!(r.im >= 0.0, "{z} -> {r}");
            assert!((r * r - z).norm() < 1e-12);
        }
        // positive reals keep their usual root
        assert!((sqrt_upper(cplx::<f64>(4.0, 0.0)) - cplx(2.0, 0.0)).norm() < 1e-15);
        // -1 gives +i, not -i
        assert!((sqrt_upper(cplx::<f64>(-1.0, 0.0)) - cplx(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn canonical_order_breaks_ties_by_imag_descending() {
        let mut v: Vec<C<f64>> = vec![cplx(1.0, -1.0), cplx(0.0, 0.0), cplx(1.0, 2.0), cplx(-1.0, 0.0)];
        v.sort_by(canonical_cmp);
        assert_eq!(v, vec![cplx(-1.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 2.0), cplx(1.0, -1.0)]);
    }
}
