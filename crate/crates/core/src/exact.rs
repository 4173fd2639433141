//! Exact arithmetic in the ring Q(√2)[i].
//!
//! Every amplitude produced by a network of 50/50 beam splitters, phase-`i`
//! reflections and annihilation channels with square-root-representable
//! probabilities lives in this ring, so the whole propagation can be carried
//! out without rounding. Values are kept canonical after every operation,
//! which makes `==` a structural comparison.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Raised when a value does not fit in the finite `f64` range.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("value {0} is outside the finite f64 range")]
pub struct RangeError(pub String);

/// A real number `r + s·√2` with rational `r`, `s`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactReal {
    pub r: Rational,
    pub s: Rational,
}

/// A complex number `re + im·i` with `re`, `im` in Q(√2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct ExactAmp {
    pub re: ExactReal,
    pub im: ExactReal,
}

pub(crate) fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl ExactReal {
    pub fn new(r: Rational, s: Rational) -> Self {
        ExactReal { r, s }
    }

    pub fn zero() -> Self {
        ExactReal::default()
    }

    pub fn one() -> Self {
        ExactReal::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        ExactReal { r, s: Rational::zero() }
    }

    /// `n/d`, a convenience for tests and literals.
    pub fn ratio(n: i64, d: i64) -> Self {
        ExactReal::from_rational(rat(n, d))
    }

    /// `(n/d)·√2`.
    pub fn sqrt2_times(n: i64, d: i64) -> Self {
        ExactReal { r: Rational::zero(), s: rat(n, d) }
    }

    pub fn frac_1_sqrt2() -> Self {
        ExactReal::sqrt2_times(1, 2)
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    /// Sign of `r + s√2`, decided exactly by comparing `r²` with `2s²` when
    /// the two parts disagree in sign.
    pub fn signum(&self) -> Ordering {
        let rs = self.r.cmp(&Rational::zero());
        let ss = self.s.cmp(&Rational::zero());
        match (rs, ss) {
            (a, Ordering::Equal) => a,
            (Ordering::Equal, b) => b,
            (a, b) if a == b => a,
            (a, _) => {
                let r2 = &self.r * &self.r;
                let s2 = &self.s * &self.s * BigInt::from(2);
                match r2.cmp(&s2) {
                    Ordering::Greater => a,
                    Ordering::Less => a.reverse(),
                    // r² = 2s² has no nonzero rational solution.
                    Ordering::Equal => unreachable!("sqrt(2) is irrational"),
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse via the conjugate `r − s√2`.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let norm = &self.r * &self.r - &self.s * &self.s * BigInt::from(2);
        Some(ExactReal { r: &self.r / &norm, s: -(&self.s / &norm) })
    }

    /// Smallest integer `n` with `n ≥ self`.
    pub fn ceil(&self) -> BigInt {
        if self.is_rational() {
            return self.r.ceil().to_integer();
        }
        // Start from an exact lower bound, then step up to the ceiling.
        let mut n = self.floor_scaled(0);
        while ExactReal::from_rational(Rational::from_integer(n.clone())) < *self {
            n += 1;
        }
        n
    }

    /// `floor(self · 2^k)` up to an error of at most one unit: the returned
    /// integer `N` satisfies `N − 1 ≤ self·2^k < N + 1`.
    fn floor_scaled(&self, k: u32) -> BigInt {
        let (rn, rd) = (self.r.numer(), self.r.denom());
        let (sn, sd) = (self.s.numer(), self.s.denom());
        let denom = rd * sd;
        let a = rn * sd;
        let b = sn * rd;
        let x = a << k;
        let y2: BigInt = (&b * &b * 2) << (2 * k);
        let y0 = y2.magnitude().sqrt();
        let y0 = BigInt::from_biguint(Sign::Plus, y0);
        let num = if b.is_negative() { x - y0 - 1 } else { x + y0 };
        num.div_floor(&denom)
    }

    /// Float evaluation with at most one ulp of error.
    pub fn to_f64(&self) -> Result<f64, RangeError> {
        if self.is_zero() {
            return Ok(0.0);
        }
        if self.is_rational() {
            return match self.r.to_f64() {
                Some(v) if v.is_finite() => Ok(v),
                _ => Err(RangeError(self.to_string())),
            };
        }
        // Raise the scale until the integer carries ≥ 80 significant bits;
        // the floor_scaled error of one unit is then far below an ulp.
        let mut k: u32 = 64;
        let n = loop {
            let n = self.floor_scaled(k);
            if n.bits() >= 80 || k > 4096 {
                break n;
            }
            k += 80;
        };
        let mantissa = n.to_f64().unwrap_or(f64::INFINITY);
        if !mantissa.is_finite() {
            return Err(RangeError(self.to_string()));
        }
        let v = scale_by_pow2(mantissa, -(k as i32));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(RangeError(self.to_string()))
        }
    }
}

fn scale_by_pow2(mut v: f64, mut exp: i32) -> f64 {
    while exp < -1000 {
        v *= 2f64.powi(-1000);
        exp += 1000;
    }
    v * 2f64.powi(exp)
}

impl PartialOrd for ExactReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactReal {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum()
    }
}

impl From<Rational> for ExactReal {
    fn from(r: Rational) -> Self {
        ExactReal::from_rational(r)
    }
}

impl<'a> Add<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn add(self, o: &ExactReal) -> ExactReal {
        ExactReal { r: &self.r + &o.r, s: &self.s + &o.s }
    }
}

impl<'a> Sub<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn sub(self, o: &ExactReal) -> ExactReal {
        ExactReal { r: &self.r - &o.r, s: &self.s - &o.s }
    }
}

impl<'a> Mul<&'a ExactReal> for &'a ExactReal {
    type Output = ExactReal;
    fn mul(self, o: &ExactReal) -> ExactReal {
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let two_bd = &self.s * &o.s * BigInt::from(2);
        ExactReal {
            r: &self.r * &o.r + two_bd,
            s: &self.r * &o.s + &self.s * &o.r,
        }
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        ExactReal { r: -self.r, s: -self.s }
    }
}

macro_rules! forward_by_value {
    ($t:ty, $tr:ident, $m:ident) => {
        impl $tr for $t {
            type Output = $t;
            fn $m(self, o: $t) -> $t {
                (&self).$m(&o)
            }
        }
    };
}

forward_by_value!(ExactReal, Add, add);
forward_by_value!(ExactReal, Sub, sub);
forward_by_value!(ExactReal, Mul, mul);

impl ExactAmp {
    pub fn new(re: ExactReal, im: ExactReal) -> Self {
        ExactAmp { re, im }
    }

    pub fn zero() -> Self {
        ExactAmp::default()
    }

    pub fn one() -> Self {
        ExactAmp::real(ExactReal::one())
    }

    pub fn i() -> Self {
        ExactAmp::imag(ExactReal::one())
    }

    pub fn real(re: ExactReal) -> Self {
        ExactAmp { re, im: ExactReal::zero() }
    }

    pub fn imag(im: ExactReal) -> Self {
        ExactAmp { re: ExactReal::zero(), im }
    }

    /// `n/d` on the real axis.
    pub fn ratio(n: i64, d: i64) -> Self {
        ExactAmp::real(ExactReal::ratio(n, d))
    }

    pub fn frac_1_sqrt2() -> Self {
        ExactAmp::real(ExactReal::frac_1_sqrt2())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ExactAmp { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|x|² = re² + im²`, always ≥ 0.
    pub fn norm_sqr(&self) -> ExactReal {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn to_float(&self) -> Result<(f64, f64), RangeError> {
        Ok((self.re.to_f64()?, self.im.to_f64()?))
    }

    /// Decimal approximation to six places, e.g. `-0.250000` or
    /// `0.000000+0.707107i`.
    pub fn decimal(&self) -> String {
        let (re, im) = self.to_float().unwrap_or((f64::NAN, f64::NAN));
        if self.im.is_zero() {
            format!("{re:.6}")
        } else {
            format!("{re:.6}{im:+.6}i")
        }
    }
}

impl<'a> Add<&'a ExactAmp> for &'a ExactAmp {
    type Output = ExactAmp;
    fn add(self, o: &ExactAmp) -> ExactAmp {
        ExactAmp { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a ExactAmp> for &'a ExactAmp {
    type Output = ExactAmp;
    fn sub(self, o: &ExactAmp) -> ExactAmp {
        ExactAmp { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a ExactAmp> for &'a ExactAmp {
    type Output = ExactAmp;
    fn mul(self, o: &ExactAmp) -> ExactAmp {
        ExactAmp {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
}

impl Neg for ExactAmp {
    type Output = ExactAmp;
    fn neg(self) -> ExactAmp {
        ExactAmp { re: -self.re, im: -self.im }
    }
}

forward_by_value!(ExactAmp, Add, add);
forward_by_value!(ExactAmp, Sub, sub);
forward_by_value!(ExactAmp, Mul, mul);

impl From<ExactReal> for ExactAmp {
    fn from(re: ExactReal) -> Self {
        ExactAmp::real(re)
    }
}

// Text rendering: `-1/4`, `1/sqrt2`, `(1/2)i`, `1/2 - (1/sqrt2)i`.

fn sqrt2_term(s: &Rational) -> String {
    let n = s.numer();
    let d = s.denom();
    if d.is_one() {
        if n.is_one() {
            "sqrt2".to_string()
        } else if *n == BigInt::from(-1) {
            "-sqrt2".to_string()
        } else {
            format!("{n}*sqrt2")
        }
    } else if *d == BigInt::from(2) {
        format!("{n}/sqrt2")
    } else {
        format!("({s})sqrt2")
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.r.is_zero(), self.s.is_zero()) {
            (_, true) => write!(f, "{}", self.r),
            (true, false) => f.write_str(&sqrt2_term(&self.s)),
            (false, false) => {
                if self.s.is_negative() {
                    write!(f, "{} - {}", self.r, sqrt2_term(&-self.s.clone()))
                } else {
                    write!(f, "{} + {}", self.r, sqrt2_term(&self.s))
                }
            }
        }
    }
}

impl fmt::Debug for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn imag_term(im: &ExactReal) -> String {
    if *im == ExactReal::one() {
        "i".to_string()
    } else if *im == -ExactReal::one() {
        "-i".to_string()
    } else if (im.is_rational() || im.r.is_zero()) && im.signum() == Ordering::Less {
        format!("-({})i", -im.clone())
    } else {
        format!("({im})i")
    }
}

impl fmt::Display for ExactAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => f.write_str(&imag_term(&self.im)),
            (false, false) => {
                let im = imag_term(&self.im);
                match im.strip_prefix('-') {
                    Some(rest) => write!(f, "{} - {}", self.re, rest),
                    None => write!(f, "{} + {}", self.re, im),
                }
            }
        }
    }
}

impl fmt::Debug for ExactAmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The real square root of a nonnegative rational, when it lies in Q(√2).
///
/// `√q` is in the ring exactly when `q` or `q/2` is the square of a rational.
pub fn sqrt_in_ring(q: &Rational) -> Option<ExactReal> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(ExactReal::zero());
    }
    if let Some(root) = rational_sqrt(q) {
        return Some(ExactReal::from_rational(root));
    }
    let half = q / BigInt::from(2);
    rational_sqrt(&half).map(|m| ExactReal { r: Rational::zero(), s: m })
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    let n = q.numer().magnitude();
    let d = q.denom().magnitude();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &rn * &rn == *n && &rd * &rd == *d {
        Some(Rational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp(n: i64, d: i64) -> ExactAmp {
        ExactAmp::ratio(n, d)
    }

    fn s2() -> ExactAmp {
        ExactAmp::frac_1_sqrt2()
    }

    #[test]
    fn add_examples() {
        assert!((amp(1, 4) + amp(-1, 4)).is_zero());
        // Net |d+,d-> amplitude: 1/4 - 1/4 - 1/4.
        assert_eq!(amp(1, 4) + amp(-1, 4) + amp(-1, 4), amp(-1, 4));
        let sum = s2() + s2();
        assert_eq!(sum, ExactAmp::real(ExactReal::sqrt2_times(1, 1)));
        assert_eq!(sum.re.r, Rational::zero());
        assert_eq!(sum.re.s, Rational::one());
    }

    #[test]
    fn mul_examples() {
        let i_s2 = ExactAmp::i() * s2();
        assert_eq!(&i_s2 * &i_s2, amp(-1, 2));
        assert_eq!(amp(1, 2) * amp(1, 2), amp(1, 4));
        let i_half = ExactAmp::i() * amp(1, 2);
        assert_eq!(i_half * s2() * i_s2, amp(-1, 4));
    }

    #[test]
    fn conj_examples() {
        assert_eq!(ExactAmp::i().conj(), -ExactAmp::i());
        assert_eq!(amp(-1, 4).conj(), amp(-1, 4));
        let z = s2() + ExactAmp::i() * s2();
        assert_eq!(z.conj(), s2() - ExactAmp::i() * s2());
    }

    #[test]
    fn norm_sqr_examples() {
        assert_eq!(amp(-1, 4).norm_sqr(), ExactReal::ratio(1, 16));
        assert_eq!(amp(-1, 2).norm_sqr(), ExactReal::ratio(1, 4));
        assert_eq!((ExactAmp::i() * s2()).norm_sqr(), ExactReal::ratio(1, 2));
    }

    #[test]
    fn to_float_examples() {
        assert_eq!(amp(1, 2).to_float().unwrap(), (0.5, 0.0));
        assert_eq!(s2().to_float().unwrap(), (std::f64::consts::FRAC_1_SQRT_2, 0.0));
        assert_eq!(amp(-1, 4).to_float().unwrap(), (-0.25, 0.0));
        let sqrt2 = ExactReal::sqrt2_times(1, 1).to_f64().unwrap();
        assert_eq!(sqrt2, std::f64::consts::SQRT_2);
        let neg = ExactReal::sqrt2_times(-3, 7).to_f64().unwrap();
        assert_eq!(neg, -3.0 * std::f64::consts::SQRT_2 / 7.0);
    }

    #[test]
    fn to_float_near_cancellation() {
        // 99/70 is a continued-fraction convergent of sqrt2.
        let x = ExactReal::new(rat(-99, 70), Rational::one());
        let expected = std::f64::consts::SQRT_2 - 99.0 / 70.0;
        let got = x.to_f64().unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!(got < 0.0);
    }

    #[test]
    fn to_float_range_error() {
        let big = BigInt::from(10).pow(400);
        let x = ExactReal::from_rational(Rational::from_integer(big));
        assert!(x.to_f64().is_err());
        let y = ExactReal { r: Rational::zero(), s: Rational::from_integer(BigInt::from(10).pow(400)) };
        assert!(y.to_f64().is_err());
    }

    #[test]
    fn ordering_is_exact() {
        let quarter = ExactReal::ratio(1, 4);
        assert!(ExactReal::frac_1_sqrt2() > ExactReal::ratio(707, 1000));
        assert!(ExactReal::frac_1_sqrt2() < ExactReal::ratio(7072, 10000));
        assert_eq!(quarter.cmp(&ExactReal::ratio(2, 8)), Ordering::Equal);
        assert_eq!(ExactReal::new(rat(3, 2), rat(-1, 1)).signum(), Ordering::Greater);
        assert_eq!(ExactReal::new(rat(4, 3), rat(-1, 1)).signum(), Ordering::Less);
    }

    #[test]
    fn ceil_handles_irrational_values() {
        assert_eq!(ExactReal::sqrt2_times(1, 1).ceil(), BigInt::from(2));
        assert_eq!(ExactReal::sqrt2_times(-1, 1).ceil(), BigInt::from(-1));
        assert_eq!(ExactReal::ratio(7, 2).ceil(), BigInt::from(4));
        assert_eq!(ExactReal::ratio(-7, 2).ceil(), BigInt::from(-3));
        assert_eq!(ExactReal::ratio(3, 1).ceil(), BigInt::from(3));
    }

    #[test]
    fn reciprocal() {
        let x = ExactReal::new(rat(1, 3), rat(2, 5));
        assert_eq!(&x * &x.recip().unwrap(), ExactReal::one());
        assert!(ExactReal::zero().recip().is_none());
    }

    #[test]
    fn rendering() {
        assert_eq!(amp(-1, 4).to_string(), "-1/4");
        assert_eq!((ExactAmp::i() * amp(1, 2)).to_string(), "(1/2)i");
        assert_eq!((ExactAmp::i() * amp(-1, 4)).to_string(), "-(1/4)i");
        assert_eq!(s2().to_string(), "1/sqrt2");
        assert_eq!(ExactAmp::i().to_string(), "i");
        assert_eq!(ExactAmp::i().conj().to_string(), "-i");
        assert_eq!((s2() - ExactAmp::i() * s2()).to_string(), "1/sqrt2 - (1/sqrt2)i");
        assert_eq!(ExactAmp::zero().to_string(), "0");
        assert_eq!(ExactReal::new(rat(1, 2), rat(-1, 4)).to_string(), "1/2 - (1/4)sqrt2");
        assert_eq!(amp(-1, 4).decimal(), "-0.250000");
        assert_eq!((ExactAmp::i() * s2()).decimal(), "0.000000+0.707107i");
    }

    #[test]
    fn ring_square_roots() {
        assert_eq!(sqrt_in_ring(&rat(0, 1)), Some(ExactReal::zero()));
        assert_eq!(sqrt_in_ring(&rat(1, 1)), Some(ExactReal::one()));
        assert_eq!(sqrt_in_ring(&rat(1, 2)), Some(ExactReal::frac_1_sqrt2()));
        assert_eq!(sqrt_in_ring(&rat(1, 4)), Some(ExactReal::ratio(1, 2)));
        assert_eq!(sqrt_in_ring(&rat(8, 9)), Some(ExactReal::sqrt2_times(2, 3)));
        assert_eq!(sqrt_in_ring(&rat(3, 4)), None);
        assert_eq!(sqrt_in_ring(&rat(1, 3)), None);
        assert_eq!(sqrt_in_ring(&rat(-1, 4)), None);
    }
}
