//! Multiprecision complex numbers.
//!
//! A thin complex layer over [`astro_float::BigFloat`]. Every value carries the
//! precision (in mantissa bits) it was created with; binary operations round
//! to the larger precision of their operands.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, RoundingMode, Sign, Word, WORD_BIT_SIZE};
use num_complex::Complex64;

/// Default mantissa precision in bits.
pub const DEFAULT_PRECISION: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

/// `x * 2^e` without intermediate overflow or underflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 960;
    while e > STEP {
        x *= 2f64.powi(STEP as i32);
        e -= STEP;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -STEP {
        x *= 2f64.powi(-STEP as i32);
        e += STEP;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Top 64 bits of the mantissa, with a sticky low bit when anything below
/// them is nonzero, and the binary exponent such that `|x| = top * 2^(e - 64)`.
fn top_bits(x: &BigFloat) -> Option<(u64, i64, bool)> {
    if x.is_zero() {
        return None;
    }
    let (words, _, sign, exp, _) = x.as_raw_parts()?;
    let per_u64 = 64 / WORD_BIT_SIZE;
    let mut top: u64 = 0;
    let n = words.len();
    let take = per_u64.min(n);
    for i in 0..take {
        top = (((top as u128) << WORD_BIT_SIZE) as u64) | words[n - 1 - i];
    }
    if take < per_u64 {
        top = ((top as u128) << (WORD_BIT_SIZE * (per_u64 - take))) as u64;
    }
    let sticky = words[..n - take].iter().any(|&w: &Word| w != 0);
    if sticky {
        top |= 1;
    }
    Some((top, exp as i64, sign == Sign::Neg))
}

/// Correctly rounded conversion to `f64` (round-to-nearest-even).
pub fn real_to_f64(x: &BigFloat) -> f64 {
    match top_bits(x) {
        None => 0.0,
        Some((top, exp, neg)) => {
            let v = ldexp(top as f64, exp - 64);
            if neg {
                -v
            } else {
                v
            }
        }
    }
}

/// `log2 |x|`, finite for every nonzero value regardless of its exponent.
pub fn real_log2_abs(x: &BigFloat) -> f64 {
    match top_bits(x) {
        None => f64::NEG_INFINITY,
        Some((top, exp, _)) => (top as f64).log2() + (exp - 64) as f64,
    }
}

fn real_exponent(x: &BigFloat) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        x.exponent().map(|e| e as i64)
    }
}

fn real_mul_pow2(x: &BigFloat, k: i64) -> BigFloat {
    let mut y = x.clone();
    if let Some(e) = real_exponent(x) {
        let ne = (e + k).clamp(
            astro_float::EXPONENT_MIN as i64,
            astro_float::EXPONENT_MAX as i64,
        );
        y.set_exponent(ne as astro_float::Exponent);
    }
    y
}

/// A complex number with multiprecision real and imaginary parts.
#[derive(Clone)]
pub struct MpComplex {
    re: BigFloat,
    im: BigFloat,
    prec: usize,
}

impl MpComplex {
    pub fn zero(prec: usize) -> Self {
        Self::from_f64(0.0, 0.0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_f64(1.0, 0.0, prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Self {
        Self {
            re: BigFloat::from_f64(re, prec),
            im: BigFloat::from_f64(im, prec),
            prec,
        }
    }

    pub fn from_c64(z: Complex64, prec: usize) -> Self {
        Self::from_f64(z.re, z.im, prec)
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        Self {
            re: BigFloat::from_i64(n, prec),
            im: BigFloat::from_f64(0.0, prec),
            prec,
        }
    }

    pub fn from_parts(re: BigFloat, im: BigFloat, prec: usize) -> Self {
        Self { re, im, prec }
    }

    /// Exact rational `num / den` rounded once to `prec`.
    pub fn ratio(num: i64, den: i64, prec: usize) -> Self {
        let re = BigFloat::from_i64(num, prec).div(&BigFloat::from_i64(den, prec), prec, RM);
        Self::from_parts(re, BigFloat::from_f64(0.0, prec), prec)
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    /// Same value re-rounded (or exactly extended) to `prec` bits.
    pub fn with_precision(&self, prec: usize) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        // Zero and exact values never fail to re-round.
        let _ = re.set_precision(prec, RM);
        let _ = im.set_precision(prec, RM);
        Self { re, im, prec }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.im.is_nan() || self.re.is_inf() || self.im.is_inf())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(real_to_f64(&self.re), real_to_f64(&self.im))
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -self.im.clone(),
            prec: self.prec,
        }
    }

    /// `|z|^2` at the value's precision.
    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.prec;
        self.re
            .mul(&self.re, p, RM)
            .add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    /// Largest binary exponent of the two parts, `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        match (real_exponent(&self.re), real_exponent(&self.im)) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Self {
        Self {
            re: real_mul_pow2(&self.re, k),
            im: real_mul_pow2(&self.im, k),
            prec: self.prec,
        }
    }

    /// `log2 |z|`; `-inf` for zero. Never overflows.
    pub fn log2_abs(&self) -> f64 {
        match self.exponent() {
            None => f64::NEG_INFINITY,
            Some(e) => {
                let s = self.mul_pow2(-e).to_c64();
                s.norm().log2() + e as f64
            }
        }
    }

    /// `|z|` as `f64` (may overflow to infinity for astronomically large values).
    pub fn abs_f64(&self) -> f64 {
        let l = self.log2_abs();
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            l.exp2()
        }
    }

    pub fn scale_i64(&self, n: i64) -> Self {
        let f = BigFloat::from_i64(n, self.prec);
        Self {
            re: self.re.mul(&f, self.prec, RM),
            im: self.im.mul(&f, self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn recip(&self) -> Self {
        MpComplex::one(self.prec).div_ref(self)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut n: u64) -> Self {
        let mut base = self.clone();
        let mut acc = MpComplex::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn add_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self {
            re: self.re.add(&o.re, p, RM),
            im: self.im.add(&o.im, p, RM),
            prec: p,
        }
    }

    fn sub_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        Self {
            re: self.re.sub(&o.re, p, RM),
            im: self.im.sub(&o.im, p, RM),
            prec: p,
        }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        if self.im.is_zero() && o.im.is_zero() {
            return Self {
                re: self.re.mul(&o.re, p, RM),
                im: BigFloat::from_f64(0.0, p),
                prec: p,
            };
        }
        let ac = self.re.mul(&o.re, p, RM);
        let bd = self.im.mul(&o.im, p, RM);
        let ad = self.re.mul(&o.im, p, RM);
        let bc = self.im.mul(&o.re, p, RM);
        Self {
            re: ac.sub(&bd, p, RM),
            im: ad.add(&bc, p, RM),
            prec: p,
        }
    }

    fn div_ref(&self, o: &Self) -> Self {
        let p = self.prec.max(o.prec);
        if o.im.is_zero() {
            return Self {
                re: self.re.div(&o.re, p, RM),
                im: self.im.div(&o.re, p, RM),
                prec: p,
            };
        }
        // Scale the divisor near unity so |o|^2 cannot leave the exponent range.
        let e = o.exponent().unwrap_or(0);
        let num = self.mul_pow2(-e);
        let den = o.mul_pow2(-e);
        let d = den
            .re
            .mul(&den.re, p, RM)
            .add(&den.im.mul(&den.im, p, RM), p, RM);
        let re = num
            .re
            .mul(&den.re, p, RM)
            .add(&num.im.mul(&den.im, p, RM), p, RM);
        let im = num
            .im
            .mul(&den.re, p, RM)
            .sub(&num.re.mul(&den.im, p, RM), p, RM);
        Self {
            re: re.div(&d, p, RM),
            im: im.div(&d, p, RM),
            prec: p,
        }
    }
}

impl fmt::Debug for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let z = self.to_c64();
        write!(f, "MpComplex({:e}{:+e}i, {} bits)", z.re, z.im, self.prec)
    }
}

impl PartialEq for MpComplex {
    /// Exact value equality, ignoring the declared precision.
    fn eq(&self, other: &Self) -> bool {
        self.re.cmp(&other.re) == Some(0) && self.im.cmp(&other.im) == Some(0)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl<'a> $tr<&'a MpComplex> for &'a MpComplex {
            type Output = MpComplex;
            fn $method(self, rhs: &'a MpComplex) -> MpComplex {
                self.$inner(rhs)
            }
        }
        impl $tr<MpComplex> for MpComplex {
            type Output = MpComplex;
            fn $method(self, rhs: MpComplex) -> MpComplex {
                (&self).$inner(&rhs)
            }
        }
        impl<'a> $tr<&'a MpComplex> for MpComplex {
            type Output = MpComplex;
            fn $method(self, rhs: &'a MpComplex) -> MpComplex {
                (&self).$inner(rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl Neg for &MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        MpComplex {
            re: -self.re.clone(),
            im: -self.im.clone(),
            prec: self.prec,
        }
    }
}

impl Neg for MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        -&self
    }
}
