//! Scalar abstraction shared by the exact and float engines.
//!
//! Propagation and transaction building are written once against
//! [`Amplitude`]; [`ExactAmp`] gives bit-exact results and `Complex64` covers
//! annihilation probabilities whose square roots fall outside Q(√2).

use std::fmt::Debug;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::exact::{sqrt_in_ring, ExactAmp, ExactReal, Rational};

/// Float amplitudes with squared magnitude below this are treated as zero.
pub const FLOAT_ZERO_NORM_SQR: f64 = 1e-28;

/// Draws are dyadic rationals `k / 2^53` with `k < 2^53`.
pub const DRAW_BITS: u32 = 53;

pub trait Amplitude: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Weight: Weight;

    /// Short identifier used in reports: `exact` or `float`.
    const ENGINE: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn i() -> Self;
    fn frac_1_sqrt2() -> Self;
    /// Real square root of a nonnegative rational, if representable.
    fn sqrt_rational(q: &Rational) -> Option<Self>;

    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn conj(&self) -> Self;
    fn norm_sqr(&self) -> Self::Weight;
    fn is_zero(&self) -> bool;

    fn to_complex(&self) -> Complex64;
    /// Exact text where available, otherwise a decimal rendering.
    fn text(&self) -> String;
}

/// A nonnegative real probability weight.
pub trait Weight: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    /// Whether the weight equals one (exactly, or within float tolerance).
    fn is_unit(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// `ceil(self · 2^53)` clamped to `[0, 2^53]`: a draw `k / 2^53` lies
    /// strictly below `self` iff `k < threshold`.
    fn draw_threshold(&self) -> u64;
    /// Exact comparison `draw < self` for any finite float draw.
    fn exceeds(&self, draw: f64) -> bool;
    fn text(&self) -> String;
}

impl Amplitude for ExactAmp {
    type Weight = ExactReal;
    const ENGINE: &'static str = "exact";

    fn zero() -> Self {
        ExactAmp::zero()
    }
    fn one() -> Self {
        ExactAmp::one()
    }
    fn i() -> Self {
        ExactAmp::i()
    }
    fn frac_1_sqrt2() -> Self {
        ExactAmp::frac_1_sqrt2()
    }
    fn sqrt_rational(q: &Rational) -> Option<Self> {
        sqrt_in_ring(q).map(ExactAmp::real)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn conj(&self) -> Self {
        ExactAmp::conj(self)
    }
    fn norm_sqr(&self) -> ExactReal {
        ExactAmp::norm_sqr(self)
    }
    fn is_zero(&self) -> bool {
        ExactAmp::is_zero(self)
    }
    fn to_complex(&self) -> Complex64 {
        let (re, im) = self.to_float().unwrap_or((f64::NAN, f64::NAN));
        Complex64::new(re, im)
    }
    fn text(&self) -> String {
        self.to_string()
    }
}

impl Weight for ExactReal {
    fn zero() -> Self {
        ExactReal::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn is_unit(&self) -> bool {
        *self == ExactReal::one()
    }
    fn to_f64(&self) -> f64 {
        ExactReal::to_f64(self).unwrap_or(f64::NAN)
    }
    fn draw_threshold(&self) -> u64 {
        let scale = ExactReal::from_rational(Rational::from_integer((1u64 << DRAW_BITS).into()));
        let t = (self * &scale).ceil();
        t.to_i128().map_or(if t.sign() == num_bigint::Sign::Minus { 0 } else { 1 << DRAW_BITS }, |v| {
            v.clamp(0, 1 << DRAW_BITS) as u64
        })
    }
    fn exceeds(&self, draw: f64) -> bool {
        match Rational::from_float(draw) {
            Some(d) => ExactReal::from_rational(d) < *self,
            None => false,
        }
    }
    fn text(&self) -> String {
        self.to_string()
    }
}

impl Amplitude for Complex64 {
    type Weight = f64;
    const ENGINE: &'static str = "float";

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn frac_1_sqrt2() -> Self {
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }
    fn sqrt_rational(q: &Rational) -> Option<Self> {
        let v = q.to_f64()?;
        (v >= 0.0).then(|| Complex64::new(v.sqrt(), 0.0))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
    fn is_zero(&self) -> bool {
        Complex64::norm_sqr(self) < FLOAT_ZERO_NORM_SQR
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn text(&self) -> String {
        if self.im == 0.0 {
            format!("{}", self.re)
        } else {
            format!("{}{:+}i", self.re, self.im)
        }
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn is_unit(&self) -> bool {
        (self - 1.0).abs() < 1e-9
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn draw_threshold(&self) -> u64 {
        // Multiplying by a power of two is exact.
        let t = (self * (1u64 << DRAW_BITS) as f64).ceil();
        t.clamp(0.0, (1u64 << DRAW_BITS) as f64) as u64
    }
    fn exceeds(&self, draw: f64) -> bool {
        draw < *self
    }
    fn text(&self) -> String {
        format!("{self}")
    }
}
