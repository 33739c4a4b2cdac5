//! Series coefficients of the logarithmic derivative `P'/P`.
//!
//! * Taylor side, around `z = 0`: `P'/P = sum c_k z^k`, with
//!   `c_k = -sum_j m_j / z_j^(k+1)`.
//! * Laurent side, around infinity: `P'/P = sum b_k / z^(k+1)`, with
//!   `b_k = sum_j m_j z_j^k` (the power sums of the roots).
//!
//! Both are produced by exact linear recurrences on the coefficients of `P`;
//! the only divisions are by `P(0)` (Taylor) or by the leading coefficient
//! (Laurent).

use std::fmt;

use crate::error::{Error, Result};
use crate::mp::MpComplex;
use crate::poly::Polynomial;

/// Which expansion of `P'/P` a stream holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Taylor,
    Laurent,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::Taylor => "taylor",
            SeriesKind::Laurent => "laurent",
        })
    }
}

impl std::str::FromStr for SeriesKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "taylor" => Ok(SeriesKind::Taylor),
            "laurent" => Ok(SeriesKind::Laurent),
            other => Err(format!(
                "unknown side `{other}` (expected taylor or laurent)"
            )),
        }
    }
}

/// A lazily extended coefficient sequence. Extending never changes values
/// already produced.
#[derive(Clone)]
pub struct CoefficientStream {
    kind: SeriesKind,
    source: Polynomial,
    // Taylor: ascending coefficients p_0..p_n. Laurent: descending a_0..a_n.
    work: Vec<MpComplex>,
    values: Vec<MpComplex>,
}

impl CoefficientStream {
    pub fn new(source: &Polynomial, kind: SeriesKind) -> Result<Self> {
        if source.degree() == 0 {
            return Err(Error::DegreeZero);
        }
        let work = match kind {
            SeriesKind::Taylor => {
                if source.constant().is_zero() {
                    return Err(Error::ConstantTermZero);
                }
                source.ascending()
            }
            SeriesKind::Laurent => source.coeffs().to_vec(),
        };
        Ok(Self {
            kind,
            source: source.clone(),
            work,
            values: Vec::new(),
        })
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn source(&self) -> &Polynomial {
        &self.source
    }

    pub fn precision(&self) -> usize {
        self.source.precision()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[MpComplex] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<&MpComplex> {
        self.values.get(i)
    }

    /// Makes at least `len` values available, growing capacity by doubling.
    pub fn ensure(&mut self, len: usize) {
        if len <= self.values.len() {
            return;
        }
        let target = len.max(2 * self.values.len()).max(8);
        self.extend_to(target);
    }

    /// Extends the stream to exactly `len` values (no-op if already longer).
    pub fn extend_to(&mut self, len: usize) {
        while self.values.len() < len {
            let next = match self.kind {
                SeriesKind::Taylor => self.next_taylor(),
                SeriesKind::Laurent => self.next_laurent(),
            };
            self.values.push(next);
        }
    }

    // c_j = [(j+1) p_{j+1} - sum_{i<j} c_i p_{j-i}] / p_0
    fn next_taylor(&self) -> MpComplex {
        let p = &self.work;
        let n = p.len() - 1;
        let j = self.values.len();
        let prec = self.precision();
        let mut acc = if j < n {
            p[j + 1].scale_i64((j + 1) as i64)
        } else {
            MpComplex::zero(prec)
        };
        let lo = j.saturating_sub(n);
        for i in lo..j {
            acc = &acc - &(&self.values[i] * &p[j - i]);
        }
        &acc / &p[0]
    }

    // Newton's identities: a_0 b_k = -(k a_k + sum_{i=1}^{min(k-1, n)} a_i b_{k-i}),
    // with the k a_k term present only for k <= n; b_0 = n.
    fn next_laurent(&self) -> MpComplex {
        let a = &self.work;
        let n = a.len() - 1;
        let k = self.values.len();
        let prec = self.precision();
        if k == 0 {
            return MpComplex::from_i64(n as i64, prec);
        }
        let mut acc = if k <= n {
            a[k].scale_i64(k as i64)
        } else {
            MpComplex::zero(prec)
        };
        for i in 1..=n.min(k - 1) {
            acc = &acc + &(&a[i] * &self.values[k - i]);
        }
        -(&acc / &a[0])
    }
}

/// `c_0 .. c_{count-1}` of the Taylor expansion of `P'/P` at the origin.
pub fn taylor_coeffs(poly: &Polynomial, count: usize) -> Result<Vec<MpComplex>> {
    let mut s = CoefficientStream::new(poly, SeriesKind::Taylor)?;
    s.extend_to(count);
    Ok(s.values)
}

/// `b_0 .. b_{count-1}` of the Laurent expansion of `P'/P` at infinity.
pub fn laurent_coeffs(poly: &Polynomial, count: usize) -> Result<Vec<MpComplex>> {
    let mut s = CoefficientStream::new(poly, SeriesKind::Laurent)?;
    s.extend_to(count);
    Ok(s.values)
}
