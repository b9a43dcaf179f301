//! Exact rationals and fixed-precision complex floats.
//!
//! `Rational` is the coefficient field of every symbolic object in the crate.
//! It is always stored in lowest terms with a positive denominator, so
//! structural equality coincides with numeric equality.
//!
//! `BigComplex` is the numeric substrate of the evaluation oracle: a pair of
//! binary floats sharing one precision.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;
use thiserror::Error;

/// Binary float with round-half-even used by [`BigComplex`].
pub type Float = FBig<HalfEven, 2>;

/// Smallest precision accepted anywhere in the numeric layer.
pub const MIN_PRECISION_BITS: usize = 64;

/// Working precision when nothing else is configured.
pub const DEFAULT_PRECISION_BITS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision mismatch: {0} bits vs {1} bits")]
    PrecisionMismatch(usize, usize),
    #[error("precision {0} is below the minimum of {MIN_PRECISION_BITS} bits")]
    PrecisionTooLow(usize),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Arbitrary-precision rational number in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(RBig);

/// Field operation selector for [`rat_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Applies one field operation; division by zero is reported, not panicked.
pub fn rat_arith(a: &Rational, b: &Rational, op: RatOp) -> Result<Rational, ScalarError> {
    match op {
        RatOp::Add => Ok(a + b),
        RatOp::Sub => Ok(a - b),
        RatOp::Mul => Ok(a * b),
        RatOp::Div => a.checked_div(b),
    }
}

impl Rational {
    pub fn zero() -> Self {
        Rational(RBig::ZERO)
    }

    pub fn one() -> Self {
        Rational(RBig::ONE)
    }

    pub fn from_int(n: i64) -> Self {
        Rational(RBig::from(n))
    }

    /// `num/den`, reduced. Panics on a zero denominator; use
    /// [`Rational::try_new`] for untrusted input.
    pub fn new(num: i64, den: i64) -> Self {
        Self::try_new(num, den).expect("zero denominator")
    }

    pub fn try_new(num: i64, den: i64) -> Result<Self, ScalarError> {
        if den == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(RBig::from_parts_signed(IBig::from(num), IBig::from(den))))
    }

    pub fn from_big(num: IBig, den: IBig) -> Result<Self, ScalarError> {
        if den == IBig::ZERO {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(RBig::from_parts_signed(num, den)))
    }

    pub fn numerator(&self) -> &IBig {
        self.0.numerator()
    }

    pub fn denominator(&self) -> &UBig {
        self.0.denominator()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == RBig::ZERO
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.denominator() == &UBig::ONE
    }

    pub fn is_negative(&self) -> bool {
        self.0 < RBig::ZERO
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, ScalarError> {
        if rhs.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, ScalarError> {
        Rational::one().checked_div(self)
    }

    pub fn pow(&self, exp: u32) -> Rational {
        let mut acc = Rational::one();
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Correctly rounded conversion to a binary float of `precision_bits`.
    pub fn to_float(&self, precision_bits: usize) -> Float {
        if self.is_zero() {
            return float_zero(precision_bits);
        }
        self.0.to_float::<HalfEven, 2>(precision_bits).value()
    }

    /// `p` for integers, `p/q` otherwise.
    pub fn to_short_string(&self) -> String {
        if self.is_integer() {
            self.numerator().to_string()
        } else {
            self.to_string()
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Exact rational value of a finite `f64`.
    pub fn from_f64_exact(x: f64) -> Option<Rational> {
        RBig::try_from(x).ok().map(Rational)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numerator(), self.0.denominator())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ScalarError;

    /// Accepts `p`, `p/q`, `+p/q` and `-p/q` with integer `p`, `q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScalarError::Parse(s.to_string());
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let num = num.strip_prefix('+').unwrap_or(num);
        let n = IBig::from_str(num).map_err(|_| err())?;
        let d = IBig::from_str(den).map_err(|_| err())?;
        Rational::from_big(n, d).map_err(|e| match e {
            ScalarError::DivisionByZero => ScalarError::DivisionByZero,
            _ => err(),
        })
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<i32> for Rational {
    fn from(n: i32) -> Self {
        Rational::from_int(n as i64)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
    };
}

rational_binop!(Add, add, +);
rational_binop!(Sub, sub, -);
rational_binop!(Mul, mul, *);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0.clone())
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

fn float_zero(precision_bits: usize) -> Float {
    Float::ZERO.with_precision(precision_bits).value()
}

/// Complex number in rectangular form; both parts carry `precision_bits`.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    re: Float,
    im: Float,
    precision_bits: usize,
}

/// Operation selector for [`bigcomplex_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Unary modulus of the first operand; the second is ignored.
    Abs,
}

pub fn bigcomplex_arith(
    a: &BigComplex,
    b: &BigComplex,
    op: ComplexOp,
) -> Result<BigComplex, ScalarError> {
    if op != ComplexOp::Abs && a.precision_bits != b.precision_bits {
        return Err(ScalarError::PrecisionMismatch(
            a.precision_bits,
            b.precision_bits,
        ));
    }
    match op {
        ComplexOp::Add => Ok(a + b),
        ComplexOp::Sub => Ok(a - b),
        ComplexOp::Mul => Ok(a * b),
        ComplexOp::Div => a.checked_div(b),
        ComplexOp::Abs => Ok(a.abs()),
    }
}

/// Converts a rational to a complex value with zero imaginary part.
pub fn rat_to_bigcomplex(a: &Rational, precision_bits: usize) -> Result<BigComplex, ScalarError> {
    if precision_bits < MIN_PRECISION_BITS {
        return Err(ScalarError::PrecisionTooLow(precision_bits));
    }
    Ok(BigComplex::from_rational(a, precision_bits))
}

impl BigComplex {
    pub fn zero(precision_bits: usize) -> Self {
        BigComplex {
            re: float_zero(precision_bits),
            im: float_zero(precision_bits),
            precision_bits,
        }
    }

    pub fn one(precision_bits: usize) -> Self {
        Self::from_rational(&Rational::one(), precision_bits)
    }

    pub fn from_rational(a: &Rational, precision_bits: usize) -> Self {
        BigComplex {
            re: a.to_float(precision_bits),
            im: float_zero(precision_bits),
            precision_bits,
        }
    }

    pub fn from_rationals(re: &Rational, im: &Rational, precision_bits: usize) -> Self {
        BigComplex {
            re: re.to_float(precision_bits),
            im: im.to_float(precision_bits),
            precision_bits,
        }
    }

    /// Exact conversion of two finite doubles (every double is dyadic).
    pub fn from_f64(re: f64, im: f64, precision_bits: usize) -> Self {
        let r = Rational::from_f64_exact(re).expect("finite real part");
        let i = Rational::from_f64_exact(im).expect("finite imaginary part");
        Self::from_rationals(&r, &i, precision_bits)
    }

    /// Rounds two floats to `precision_bits`.
    pub fn from_floats(re: Float, im: Float, precision_bits: usize) -> Self {
        Self::from_parts(re, im, precision_bits)
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn re(&self) -> &Float {
        &self.re
    }

    pub fn im(&self) -> &Float {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re == Float::ZERO && self.im == Float::ZERO
    }

    fn fix(x: Float, precision_bits: usize) -> Float {
        if x.precision() == precision_bits {
            x
        } else {
            x.with_precision(precision_bits).value()
        }
    }

    fn from_parts(re: Float, im: Float, precision_bits: usize) -> Self {
        BigComplex {
            re: Self::fix(re, precision_bits),
            im: Self::fix(im, precision_bits),
            precision_bits,
        }
    }

    pub fn conj(&self) -> Self {
        BigComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
            precision_bits: self.precision_bits,
        }
    }

    pub fn norm_sqr(&self) -> Float {
        Self::fix(&self.re * &self.re + &self.im * &self.im, self.precision_bits)
    }

    /// Modulus as a complex number with zero imaginary part.
    pub fn abs(&self) -> Self {
        let n = self.norm_sqr();
        let r = if n == Float::ZERO { n } else { n.sqrt() };
        Self::from_parts(r, float_zero(self.precision_bits), self.precision_bits)
    }

    /// Modulus rounded to `f64`, saturating at `f64::MAX`.
    pub fn abs_f64(&self) -> f64 {
        let re = self.re.to_f64().value();
        let im = self.im.to_f64().value();
        let v = re.hypot(im);
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64().value(), self.im.to_f64().value())
    }

    pub fn checked_div(&self, rhs: &BigComplex) -> Result<BigComplex, ScalarError> {
        let den = rhs.norm_sqr();
        if den == Float::ZERO {
            return Err(ScalarError::DivisionByZero);
        }
        let re = &self.re * &rhs.re + &self.im * &rhs.im;
        let im = &self.im * &rhs.re - &self.re * &rhs.im;
        Ok(Self::from_parts(re / &den, im / &den, self.precision_bits))
    }

    pub fn recip(&self) -> Result<BigComplex, ScalarError> {
        BigComplex::one(self.precision_bits).checked_div(self)
    }

    pub fn square(&self) -> BigComplex {
        self * self
    }

    pub fn powi(&self, exp: u32) -> BigComplex {
        let mut result = BigComplex::one(self.precision_bits);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        result
    }

    pub fn scale(&self, r: &Rational) -> BigComplex {
        let f = r.to_float(self.precision_bits);
        Self::from_parts(&self.re * &f, &self.im * &f, self.precision_bits)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> BigComplex {
        let p = self.precision_bits;
        if self.is_zero() {
            return BigComplex::zero(p);
        }
        let modulus = self.norm_sqr().sqrt();
        let half = Rational::new(1, 2).to_float(p);
        let re = Self::fix((&modulus + &self.re) * &half, p);
        let im = Self::fix((&modulus - &self.re) * &half, p);
        let re = if re <= Float::ZERO { float_zero(p) } else { re.sqrt() };
        let mut im = if im <= Float::ZERO { float_zero(p) } else { im.sqrt() };
        if self.im < Float::ZERO {
            im = -im;
        }
        Self::from_parts(re, im, p)
    }

    /// Fixed-width scientific rendering for reports and debugging.
    pub fn to_sci_string(&self, digits: usize) -> String {
        let (re, im) = self.to_f64_pair();
        format!("{re:.digits$e}{:+.digits$e}i", im)
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigComplex({}, {}i; {} bits)", self.re, self.im, self.precision_bits)
    }
}

macro_rules! complex_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&BigComplex> for &BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &BigComplex) -> BigComplex {
                assert_eq!(
                    self.precision_bits, rhs.precision_bits,
                    "mixed-precision complex arithmetic"
                );
                let f: fn(&BigComplex, &BigComplex) -> (Float, Float) = $body;
                let (re, im) = f(self, rhs);
                BigComplex::from_parts(re, im, self.precision_bits)
            }
        }
        impl $tr<BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: BigComplex) -> BigComplex {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&BigComplex> for BigComplex {
            type Output = BigComplex;
            fn $method(self, rhs: &BigComplex) -> BigComplex {
                (&self).$method(rhs)
            }
        }
    };
}

complex_binop!(Add, add, |a, b| (&a.re + &b.re, &a.im + &b.im));
complex_binop!(Sub, sub, |a, b| (&a.re - &b.re, &a.im - &b.im));
complex_binop!(Mul, mul, |a, b| (
    &a.re * &b.re - &a.im * &b.im,
    &a.re * &b.im + &a.im * &b.re
));

impl AddAssign<&BigComplex> for BigComplex {
    fn add_assign(&mut self, rhs: &BigComplex) {
        *self = &*self + rhs;
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex {
            re: -self.re,
            im: -self.im,
            precision_bits: self.precision_bits,
        }
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        -self.clone()
    }
}

/// Total order on `f64` magnitudes used when ranking residual ratios.
pub fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
