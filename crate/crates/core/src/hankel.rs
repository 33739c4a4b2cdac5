//! Hankel ("Hadamard") determinants over a coefficient stream.
//!
//! `H_{k,r}` is the determinant of the `r x r` matrix with entries
//! `s[k + i + j]`, `0 <= i, j < r`. Determinants are evaluated by LU with
//! partial pivoting in [`ScaledComplex`] arithmetic, and every result carries
//! its cancellation margin: `log2(prod_i |row_i| / |det|)`, the number of bits
//! by which the determinant falls below its Hadamard bound.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mp::{ldexp, MpComplex};
use crate::series::CoefficientStream;

/// Bits of headroom below the working precision before a cell is flagged.
pub const DEFAULT_GUARD_BITS: u32 = 16;

/// Minimum number of cells in a structural-zero probe window.
pub const DEFAULT_ZERO_WINDOW: usize = 5;

/// `mantissa * 2^exponent` with `|mantissa|` in `[1/2, 2)` (or exactly zero
/// with exponent 0).
#[derive(Clone, PartialEq)]
pub struct ScaledComplex {
    mantissa: MpComplex,
    exponent: i64,
}

impl ScaledComplex {
    pub fn zero(prec: usize) -> Self {
        Self {
            mantissa: MpComplex::zero(prec),
            exponent: 0,
        }
    }

    pub fn from_mp(z: &MpComplex) -> Self {
        let mut s = Self {
            mantissa: z.clone(),
            exponent: 0,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        match self.mantissa.exponent() {
            None => {
                self.mantissa = MpComplex::zero(self.mantissa.precision());
                self.exponent = 0;
            }
            Some(e) if e != 0 => {
                self.mantissa = self.mantissa.mul_pow2(-e);
                self.exponent += e;
            }
            Some(_) => {}
        }
    }

    pub fn mantissa(&self) -> &MpComplex {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn precision(&self) -> usize {
        self.mantissa.precision()
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn log2_abs(&self) -> f64 {
        self.mantissa.log2_abs() + self.exponent as f64
    }

    /// Nearest `f64` pair; over- or underflows only if the value itself does.
    pub fn to_c64(&self) -> Complex64 {
        let m = self.mantissa.to_c64();
        Complex64::new(ldexp(m.re, self.exponent), ldexp(m.im, self.exponent))
    }

    /// The value as an unscaled multiprecision number.
    pub fn to_mp(&self) -> MpComplex {
        self.mantissa.mul_pow2(self.exponent)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut s = Self {
            mantissa: &self.mantissa * &o.mantissa,
            exponent: self.exponent + o.exponent,
        };
        s.normalize();
        s
    }

    pub fn div(&self, o: &Self) -> Self {
        let mut s = Self {
            mantissa: &self.mantissa / &o.mantissa,
            exponent: self.exponent - o.exponent,
        };
        s.normalize();
        s
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (hi, lo) = if self.exponent >= o.exponent {
            (self, o)
        } else {
            (o, self)
        };
        let gap = hi.exponent - lo.exponent;
        let prec = hi.precision().max(lo.precision()) as i64;
        if gap > prec + 8 {
            return hi.clone();
        }
        let mut s = Self {
            mantissa: &hi.mantissa + &lo.mantissa.mul_pow2(-gap),
            exponent: hi.exponent,
        };
        s.normalize();
        s
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl fmt::Debug for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.mantissa.to_c64();
        write!(f, "({:e}{:+e}i)*2^{}", m.re, m.im, self.exponent)
    }
}

/// One evaluated determinant.
#[derive(Clone, Debug)]
pub struct HankelCell {
    pub k: usize,
    pub r: usize,
    pub value: ScaledComplex,
    /// `log2(prod |row_i| / |det|)`; infinite for an exactly zero determinant.
    pub cancellation_margin: f64,
    pub precision: usize,
    pub guard_bits: u32,
}

impl HankelCell {
    /// The determinant sits below `2^-(precision - guard)` times its Hadamard
    /// bound, so its digits cannot be trusted at this precision.
    pub fn is_flagged(&self) -> bool {
        self.cancellation_margin >= self.precision as f64 - self.guard_bits as f64
    }

    /// The cell itself, or `PrecisionExhausted` when it is flagged.
    pub fn checked(self) -> Result<Self> {
        if self.is_flagged() {
            Err(Error::PrecisionExhausted {
                k: self.k,
                r: self.r,
                precision: self.precision,
            })
        } else {
            Ok(self)
        }
    }

    /// `log2` of the Hadamard bound (product of row norms).
    pub fn log2_ceiling(&self) -> f64 {
        self.value.log2_abs() + self.cancellation_margin
    }
}

/// Outcome of a structural-zero probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroTest {
    /// Every cell vanishes to the full extent the precision can certify.
    Zero,
    /// Every cell is certified nonzero.
    NonZero,
    /// Mixed evidence or a too-short window; retry at higher precision.
    Inconclusive,
}

fn log2_sum_exp2(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.filter(|t| t.is_finite()).collect();
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + v.iter().map(|t| (t - top).exp2()).sum::<f64>().log2()
}

/// Determinant by LU with partial pivoting; returns the value and the log2
/// Hadamard bound of the input rows.
pub(crate) fn lu_determinant(mut a: Vec<Vec<ScaledComplex>>) -> (ScaledComplex, f64) {
    let n = a.len();
    let prec = a
        .first()
        .and_then(|row| row.first())
        .map_or(64, |c| c.precision());
    let ceiling: f64 = a
        .iter()
        .map(|row| 0.5 * log2_sum_exp2(row.iter().map(|x| 2.0 * x.log2_abs())))
        .sum();
    let mut det = ScaledComplex::from_mp(&MpComplex::one(prec));
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col][col].log2_abs();
        for row in col + 1..n {
            let l = a[row][col].log2_abs();
            if l > best {
                best = l;
                piv = row;
            }
        }
        if a[piv][col].is_zero() {
            return (ScaledComplex::zero(prec), ceiling);
        }
        if piv != col {
            a.swap(piv, col);
            det = det.neg();
        }
        let pivot = a[col][col].clone();
        det = det.mul(&pivot);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].div(&pivot);
            for j in col + 1..n {
                let t = factor.mul(&a[col][j]);
                a[row][j] = a[row][j].sub(&t);
            }
        }
    }
    (det, ceiling)
}

/// `H_{k,r}` over `stream` (Taylor coefficients give `H`, Laurent ones the
/// bold `H` of the dual construction), flagged against the default guard.
pub fn hadamard_det(stream: &CoefficientStream, k: usize, r: usize) -> Result<HankelCell> {
    hadamard_det_guarded(stream, k, r, DEFAULT_GUARD_BITS)
}

/// As [`hadamard_det`], flagging against `guard_bits` of headroom.
pub fn hadamard_det_guarded(
    stream: &CoefficientStream,
    k: usize,
    r: usize,
    guard_bits: u32,
) -> Result<HankelCell> {
    if r == 0 {
        return Err(Error::InvalidOrder);
    }
    let needed = k + 2 * (r - 1) + 1;
    if stream.len() < needed {
        return Err(Error::InsufficientStream {
            needed,
            available: stream.len(),
        });
    }
    let s = stream.values();
    let a: Vec<Vec<ScaledComplex>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| ScaledComplex::from_mp(&s[k + i + j]))
                .collect()
        })
        .collect();
    let (value, ceiling) = lu_determinant(a);
    let margin = if value.is_zero() {
        f64::INFINITY
    } else {
        (ceiling - value.log2_abs()).max(0.0)
    };
    Ok(HankelCell {
        k,
        r,
        value,
        cancellation_margin: margin,
        precision: stream.precision(),
        guard_bits,
    })
}

/// Cells for every `k` in `k_from..=k_to`, identical to individual calls.
pub fn det_row(
    stream: &CoefficientStream,
    k_from: usize,
    k_to: usize,
    r: usize,
) -> Result<Vec<HankelCell>> {
    (k_from..=k_to)
        .map(|k| hadamard_det(stream, k, r))
        .collect()
}

/// Classifies a window of cells of one order as structurally zero or not.
pub fn structural_zero_test(cells: &[HankelCell], min_window: usize) -> ZeroTest {
    if cells.is_empty() || cells.len() < min_window {
        return ZeroTest::Inconclusive;
    }
    let flagged = cells.iter().filter(|c| c.is_flagged()).count();
    if flagged == cells.len() {
        ZeroTest::Zero
    } else if flagged == 0 {
        ZeroTest::NonZero
    } else {
        ZeroTest::Inconclusive
    }
}

/// `true` iff the window certifies a structural zero (rank deficiency).
pub fn is_structural_zero(cells: &[HankelCell]) -> bool {
    structural_zero_test(cells, DEFAULT_ZERO_WINDOW) == ZeroTest::Zero
}
