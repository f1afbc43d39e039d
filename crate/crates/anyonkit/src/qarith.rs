//! Deformation parameter and q-number arithmetic.
//!
//! Every exponent of q handled by the crate is an integer multiple of
//! `1/D`, where `D` is the root denominator of the context.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Default working precision in mantissa bits.
pub const DEFAULT_PRECISION: u32 = 128;

/// A complex number with both parts stored as MPFR floats.
#[derive(Clone, PartialEq)]
pub struct ComplexValue {
    pub re: Float,
    pub im: Float,
}

impl ComplexValue {
    pub fn zero(prec: u32) -> Self {
        ComplexValue {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_int(prec, 1)
    }

    pub fn from_int(prec: u32, n: i64) -> Self {
        ComplexValue {
            re: Float::with_val(prec, n),
            im: Float::new(prec),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        ComplexValue {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        ComplexValue {
            re,
            im: Float::new(prec),
        }
    }

    pub fn new(re: Float, im: Float) -> Self {
        ComplexValue { re, im }
    }

    /// Parses a pair of decimal strings.
    pub fn parse(prec: u32, re: &str, im: &str) -> Option<Self> {
        let re = Float::parse(re).ok()?;
        let im = Float::parse(im).ok()?;
        Some(ComplexValue {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        })
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// `e^{i·phi}`.
    pub fn cis(phi: &Float) -> Self {
        let prec = phi.prec();
        let (s, c) = Float::with_val(prec, phi).sin_cos(Float::new(prec));
        ComplexValue { re: c, im: s }
    }

    pub fn exp(&self) -> Self {
        let prec = self.prec();
        let r = Float::with_val(prec, self.re.exp_ref());
        let mut c = ComplexValue::cis(&self.im);
        c.re *= &r;
        c.im *= &r;
        c
    }

    pub fn conj(&self) -> Self {
        ComplexValue {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let prec = self.prec();
        let mut n = Float::with_val(prec, self.re.square_ref());
        n += Float::with_val(prec, self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.abs_f64() <= tol
    }

    pub fn approx_eq(&self, other: &ComplexValue, tol: f64) -> bool {
        (self - other).abs_f64() <= tol
    }

    pub fn recip(&self) -> Self {
        let prec = self.prec();
        let n = self.norm_sqr();
        ComplexValue {
            re: Float::with_val(prec, &self.re / &n),
            im: Float::with_val(prec, -Float::with_val(prec, &self.im / &n)),
        }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let prec = self.prec();
        if self.im.is_zero() {
            if self.re.is_sign_negative() && !self.re.is_zero() {
                let r = Float::with_val(prec, -&self.re).sqrt();
                return ComplexValue::new(Float::new(prec), r);
            }
            return ComplexValue::from_real(Float::with_val(prec, self.re.sqrt_ref()));
        }
        let r = self.abs();
        if !self.re.is_sign_negative() {
            let re = (Float::with_val(prec, &r + &self.re) / 2u32).sqrt();
            let im = Float::with_val(prec, &self.im / &re) / 2u32;
            ComplexValue::new(re, im)
        } else {
            let mut im = (Float::with_val(prec, &r - &self.re) / 2u32).sqrt();
            if self.im.is_sign_negative() {
                im = -im;
            }
            let re = Float::with_val(prec, &self.im / &im) / 2u32;
            ComplexValue::new(re, im)
        }
    }

    pub fn powi(&self, n: i64) -> Self {
        let base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = ComplexValue::one(self.prec());
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        acc
    }

    pub fn scale(&self, f: &Float) -> Self {
        ComplexValue {
            re: Float::with_val(self.prec(), &self.re * f),
            im: Float::with_val(self.prec(), &self.im * f),
        }
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Decimal rendering with `digits` significant digits per part.
    pub fn to_decimal_strings(&self, digits: usize) -> (String, String) {
        (
            self.re.to_string_radix(10, Some(digits)),
            self.im.to_string_radix(10, Some(digits)),
        )
    }

    /// `Σ a_k b_k`, the bilinear (conjugation-free) dot product.
    pub fn dot<'a, I>(prec: u32, pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a ComplexValue, &'a ComplexValue)>,
    {
        let mut acc = ComplexValue::zero(prec);
        for (a, b) in pairs {
            acc.add_mul(a, b);
        }
        acc
    }

    /// `self += a·b`.
    pub fn add_mul(&mut self, a: &ComplexValue, b: &ComplexValue) {
        let prec = self.prec();
        let mut t = Float::with_val(prec, &a.re * &b.re);
        t -= Float::with_val(prec, &a.im * &b.im);
        self.re += &t;
        t.assign_mul(&a.re, &b.im);
        t += Float::with_val(prec, &a.im * &b.re);
        self.im += &t;
    }
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

impl fmt::Debug for ComplexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_c64();
        write!(f, "({re:.12}{im:+.12}i)")
    }
}

impl fmt::Display for ComplexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl<'a> Add<&'a ComplexValue> for &'a ComplexValue {
    type Output = ComplexValue;
    fn add(self, o: &ComplexValue) -> ComplexValue {
        let prec = self.prec().max(o.prec());
        ComplexValue {
            re: Float::with_val(prec, &self.re + &o.re),
            im: Float::with_val(prec, &self.im + &o.im),
        }
    }
}

impl<'a> Sub<&'a ComplexValue> for &'a ComplexValue {
    type Output = ComplexValue;
    fn sub(self, o: &ComplexValue) -> ComplexValue {
        let prec = self.prec().max(o.prec());
        ComplexValue {
            re: Float::with_val(prec, &self.re - &o.re),
            im: Float::with_val(prec, &self.im - &o.im),
        }
    }
}

impl<'a> Mul<&'a ComplexValue> for &'a ComplexValue {
    type Output = ComplexValue;
    fn mul(self, o: &ComplexValue) -> ComplexValue {
        let mut acc = ComplexValue::zero(self.prec().max(o.prec()));
        acc.add_mul(self, o);
        acc
    }
}

impl<'a> Div<&'a ComplexValue> for &'a ComplexValue {
    type Output = ComplexValue;
    fn div(self, o: &ComplexValue) -> ComplexValue {
        self * &o.recip()
    }
}

impl Neg for &ComplexValue {
    type Output = ComplexValue;
    fn neg(self) -> ComplexValue {
        ComplexValue {
            re: Float::with_val(self.re.prec(), -&self.re),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }
}

impl Neg for ComplexValue {
    type Output = ComplexValue;
    fn neg(self) -> ComplexValue {
        -&self
    }
}

macro_rules! owned_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<ComplexValue> for ComplexValue {
            type Output = ComplexValue;
            fn $f(self, o: ComplexValue) -> ComplexValue {
                (&self).$f(&o)
            }
        }
        impl<'a> $tr<&'a ComplexValue> for ComplexValue {
            type Output = ComplexValue;
            fn $f(self, o: &ComplexValue) -> ComplexValue {
                (&self).$f(o)
            }
        }
        impl<'a> $tr<ComplexValue> for &'a ComplexValue {
            type Output = ComplexValue;
            fn $f(self, o: ComplexValue) -> ComplexValue {
                self.$f(&o)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);
owned_binop!(Div, div);

impl AddAssign<&ComplexValue> for ComplexValue {
    fn add_assign(&mut self, o: &ComplexValue) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&ComplexValue> for ComplexValue {
    fn sub_assign(&mut self, o: &ComplexValue) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl MulAssign<&ComplexValue> for ComplexValue {
    fn mul_assign(&mut self, o: &ComplexValue) {
        *self = &*self * o;
    }
}

/// How q is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum QMode {
    /// `q = e^{2πi/(k+g)}`.
    RootOfUnity { level: u32, dual_coxeter: u32 },
    /// `q = x` with `0 < x < 1`.
    RealReference { x: f64 },
    /// Any other point, given through `log q^{1/D}` (paths and inverted contexts).
    Derived,
}

/// Evaluation context for q-expressions.
#[derive(Clone, Debug)]
pub struct QContext {
    pub mode: QMode,
    pub root_denominator: u32,
    pub precision_bits: u32,
    pub tolerance: f64,
    /// `log(q^{1/D})`.
    log_root: ComplexValue,
}

/// Tolerance used when none is given: 1e-20 at 128 bits, scaling with the precision.
pub fn default_tolerance(precision_bits: u32) -> f64 {
    10f64.powf(-20.0 * precision_bits as f64 / 128.0)
}

impl QContext {
    pub fn root_of_unity(
        level: u32,
        dual_coxeter: u32,
        denominator: u32,
        precision_bits: u32,
    ) -> Self {
        let prec = precision_bits;
        let pi = Float::with_val(prec, Constant::Pi);
        let theta = pi * 2u32 / Float::with_val(prec, denominator * (level + dual_coxeter));
        QContext {
            mode: QMode::RootOfUnity {
                level,
                dual_coxeter,
            },
            root_denominator: denominator,
            precision_bits,
            tolerance: default_tolerance(precision_bits),
            log_root: ComplexValue::new(Float::new(prec), theta),
        }
    }

    pub fn real_reference(x: f64, denominator: u32, precision_bits: u32) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidInput(format!(
                "real reference value {x} outside (0,1)"
            )));
        }
        let prec = precision_bits;
        let lx = Float::with_val(prec, x).ln() / Float::with_val(prec, denominator);
        Ok(QContext {
            mode: QMode::RealReference { x },
            root_denominator: denominator,
            precision_bits,
            tolerance: default_tolerance(precision_bits),
            log_root: ComplexValue::from_real(lx),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    /// `log(q^{1/D})` of this context.
    pub fn log_root(&self) -> &ComplexValue {
        &self.log_root
    }

    /// Context at `q^{-1}`; on the unit circle this is complex conjugation.
    pub fn inverse(&self) -> Self {
        QContext {
            mode: QMode::Derived,
            log_root: -&self.log_root,
            ..self.clone()
        }
    }

    /// Context whose `log q` is `s·log q`; `s=0` is the classical point q=1.
    pub fn scaled(&self, s: f64) -> Self {
        let f = Float::with_val(self.precision_bits, s);
        QContext {
            mode: QMode::Derived,
            log_root: self.log_root.scale(&f),
            ..self.clone()
        }
    }

    /// Same point evaluated at another precision.
    pub fn with_precision(&self, precision_bits: u32, tolerance: f64) -> Self {
        QContext {
            precision_bits,
            tolerance,
            log_root: ComplexValue::new(
                Float::with_val(precision_bits, &self.log_root.re),
                Float::with_val(precision_bits, &self.log_root.im),
            ),
            ..self.clone()
        }
    }

    /// Context on the straight line between the logs of `self` and `other`.
    pub fn interpolate(&self, other: &QContext, s: f64) -> Self {
        let f = Float::with_val(self.precision_bits, s);
        let d = &other.log_root - &self.log_root;
        QContext {
            mode: QMode::Derived,
            log_root: &self.log_root + &d.scale(&f),
            ..self.clone()
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self.mode {
            QMode::RootOfUnity { level, .. } => Some(level),
            _ => None,
        }
    }

    pub fn zero(&self) -> ComplexValue {
        ComplexValue::zero(self.precision_bits)
    }

    pub fn one(&self) -> ComplexValue {
        ComplexValue::one(self.precision_bits)
    }

    pub fn int(&self, n: i64) -> ComplexValue {
        ComplexValue::from_int(self.precision_bits, n)
    }

    /// `q^{numerator/D}`.
    pub fn q_power(&self, numerator: i64) -> ComplexValue {
        if numerator == 0 {
            return self.one();
        }
        let f = Float::with_val(self.precision_bits, numerator);
        self.log_root.scale(&f).exp()
    }

    /// `q^{num/den}` for an arbitrary rational exponent.
    pub fn q_power_frac(&self, num: i64, den: i64) -> ComplexValue {
        let f = Float::with_val(self.precision_bits, num * self.root_denominator as i64)
            / Float::with_val(self.precision_bits, den);
        self.log_root.scale(&f).exp()
    }

    /// `[n]_{q^{1/t}}` by the summation form.
    pub fn q_number(&self, n: i64, t: u32) -> Result<ComplexValue> {
        if n < 0 {
            return Err(Error::InvalidInput(format!(
                "q-number of negative argument {n}"
            )));
        }
        let d = self.root_denominator as i64;
        let t = t as i64;
        if d % (2 * t) != 0 {
            return Err(Error::InvalidInput(format!(
                "root denominator {d} cannot express q^(1/{})",
                2 * t
            )));
        }
        let unit = d / (2 * t);
        let mut acc = self.zero();
        for m in 1..=n {
            acc += &self.q_power(unit * (n + 1 - 2 * m));
        }
        Ok(acc)
    }

    /// `[n]` for a possibly negative argument, using `[-n] = -[n]`.
    pub fn q_number_signed(&self, n: i64, t: u32) -> ComplexValue {
        let v = self.q_number(n.abs(), t).expect("valid root denominator");
        if n < 0 {
            -v
        } else {
            v
        }
    }

    pub fn q_factorial(&self, n: i64, t: u32) -> Result<ComplexValue> {
        if n < 0 {
            return Err(Error::InvalidInput(format!(
                "q-factorial of negative argument {n}"
            )));
        }
        let mut acc = self.one();
        for m in 2..=n {
            acc = &acc * &self.q_number(m, t)?;
        }
        Ok(acc)
    }

    /// q-binomial as a product of ratios `[n-m+s]/[s]`.
    pub fn q_binomial(&self, n: i64, m: i64, t: u32) -> Result<ComplexValue> {
        if n < 0 || m < 0 || m > n {
            return Err(Error::InvalidInput(format!(
                "q-binomial ({n} {m}) out of range"
            )));
        }
        let m = m.min(n - m);
        let mut acc = self.one();
        for s in 1..=m {
            acc = &acc * &self.q_number(n - m + s, t)?;
            acc = &acc / &self.q_number(s, t)?;
        }
        Ok(acc)
    }

    /// `Float` helper at working precision.
    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.precision_bits, v)
    }

    /// `π` at working precision.
    pub fn pi(&self) -> Float {
        Float::with_val(self.precision_bits, Constant::Pi)
    }
}

/// `x^(1/2)` helper for tests and formatting.
pub fn float_pow(x: &Float, e: f64) -> Float {
    Float::with_val(x.prec(), x.pow(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn su3(k: u32) -> QContext {
        QContext::root_of_unity(k, 3, 12, 128)
    }

    #[test]
    fn zeroth_power_is_one() {
        assert!(su3(2).q_power(0).approx_eq(&su3(2).one(), 1e-30));
    }

    #[test]
    fn full_power_is_primitive_root() {
        let q = su3(2).q_power(12);
        let (re, im) = q.to_c64();
        let a = 2.0 * std::f64::consts::PI / 5.0;
        assert!((re - a.cos()).abs() < 1e-15 && (im - a.sin()).abs() < 1e-15);
    }

    #[test]
    fn real_root_extraction() {
        let ctx = QContext::real_reference(0.5, 12, 128).unwrap();
        let v = ctx.q_power(6).to_c64();
        assert!((v.0 - 0.5f64.sqrt()).abs() < 1e-15 && v.1.abs() < 1e-30);
    }

    #[test]
    fn golden_ratio_numbers() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let ctx = su3(2);
        assert!((ctx.q_number(3, 1).unwrap().re.to_f64() - phi).abs() < 1e-14);
        assert!((ctx.q_number(2, 1).unwrap().re.to_f64() - phi).abs() < 1e-14);
        assert!((ctx.q_binomial(2, 1, 1).unwrap().re.to_f64() - phi).abs() < 1e-14);
        assert!(ctx.q_number(0, 1).unwrap().is_zero_within(1e-30));
        assert!(ctx.q_factorial(1, 1).unwrap().approx_eq(&ctx.one(), 1e-30));
        assert!(ctx
            .q_binomial(7, 0, 1)
            .unwrap()
            .approx_eq(&ctx.one(), 1e-30));
    }

    #[test]
    fn rejects_negative_arguments() {
        let ctx = su3(2);
        assert!(ctx.q_number(-1, 1).is_err());
        assert!(ctx.q_binomial(2, 3, 1).is_err());
        assert!(ctx.q_factorial(-2, 1).is_err());
    }

    #[test]
    fn sqrt_branches() {
        let z = ComplexValue::from_f64(128, -4.0, 0.0).sqrt();
        assert!(z.approx_eq(&ComplexValue::from_f64(128, 0.0, 2.0), 1e-30));
        let w = ComplexValue::from_f64(128, -3.0, -4.0);
        let s = w.sqrt();
        assert!((&s * &s).approx_eq(&w, 1e-30));
        assert!(s.re.to_f64() >= 0.0);
    }
}
