//! Dense complex polynomials in descending-power order, and the root sets the
//! solver returns for them.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mp::MpComplex;
use crate::series::SeriesKind;

/// `a_0 z^n + a_1 z^(n-1) + ... + a_n` with `a_0 != 0`.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<MpComplex>,
}

impl Polynomial {
    /// Validates and wraps descending coefficients. The constant term may be zero.
    pub fn new(coeffs: Vec<MpComplex>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::EmptyInput),
            Some(a0) if a0.is_zero() => Err(Error::LeadingCoefficientZero),
            Some(_) => Ok(Self { coeffs }),
        }
    }

    /// Real coefficients, descending.
    pub fn from_f64(coeffs: &[f64], prec: usize) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| MpComplex::from_f64(c, 0.0, prec))
                .collect(),
        )
    }

    pub fn from_c64(coeffs: &[Complex64], prec: usize) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| MpComplex::from_c64(c, prec))
                .collect(),
        )
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Descending coefficients `a_0 .. a_n`.
    pub fn coeffs(&self) -> &[MpComplex] {
        &self.coeffs
    }

    pub fn leading(&self) -> &MpComplex {
        &self.coeffs[0]
    }

    pub fn constant(&self) -> &MpComplex {
        &self.coeffs[self.degree()]
    }

    pub fn precision(&self) -> usize {
        self.coeffs
            .iter()
            .map(MpComplex::precision)
            .max()
            .unwrap_or(0)
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.with_precision(prec)).collect(),
        }
    }

    /// Coefficients in ascending order `p_0 .. p_n` (`p_j` multiplies `z^j`).
    pub fn ascending(&self) -> Vec<MpComplex> {
        self.coeffs.iter().rev().cloned().collect()
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(MpComplex::to_c64).collect()
    }

    /// Splits `P = z^count * Q` with `Q(0) != 0`.
    pub fn strip_zero_roots(&self) -> (Polynomial, usize) {
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| !c.is_zero())
            .expect("leading coefficient is nonzero");
        let count = self.degree() - keep;
        (
            Polynomial {
                coeffs: self.coeffs[..=keep].to_vec(),
            },
            count,
        )
    }

    /// Horner evaluation at the wider of the two precisions.
    pub fn evaluate(&self, z: &MpComplex) -> MpComplex {
        let mut acc = self.coeffs[0].clone();
        for c in &self.coeffs[1..] {
            acc = &(&acc * z) + c;
        }
        acc
    }

    /// `P(z)` and `P'(z)` in one Horner pass.
    pub fn evaluate_with_derivative(&self, z: &MpComplex) -> (MpComplex, MpComplex) {
        let mut p = self.coeffs[0].clone();
        let mut dp = MpComplex::zero(self.precision().max(z.precision()));
        for c in &self.coeffs[1..] {
            dp = &(&dp * z) + &p;
            p = &(&p * z) + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Result<Polynomial> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::DegreeZero);
        }
        let coeffs = self.coeffs[..n]
            .iter()
            .enumerate()
            .map(|(i, c)| c.scale_i64((n - i) as i64))
            .collect();
        Ok(Polynomial { coeffs })
    }

    /// `Q(z) = P(z + s)` by binomial convolution:
    /// `q_i = sum_{j >= i} C(j, i) s^(j-i) p_j` on ascending coefficients.
    pub fn shift(&self, s: &MpComplex) -> Polynomial {
        let n = self.degree();
        let prec = self.precision().max(s.precision());
        let p = self.ascending();
        let mut s_pow = Vec::with_capacity(n + 1);
        s_pow.push(MpComplex::one(prec));
        for j in 1..=n {
            let next = &s_pow[j - 1] * s;
            s_pow.push(next);
        }
        // Pascal rows are exact as long as C(n, k) < 2^prec.
        let mut row = vec![MpComplex::one(prec)];
        let mut q = vec![MpComplex::zero(prec); n + 1];
        for (j, pj) in p.iter().enumerate() {
            if j > 0 {
                let mut next = Vec::with_capacity(j + 1);
                next.push(MpComplex::one(prec));
                for i in 1..j {
                    next.push(&row[i - 1] + &row[i]);
                }
                next.push(MpComplex::one(prec));
                row = next;
            }
            for i in 0..=j {
                let term = &(&row[i] * &s_pow[j - i]) * pj;
                q[i] = &q[i] + &term;
            }
        }
        q.reverse();
        Polynomial { coeffs: q }
    }

    /// Expands `a_0 * prod (z - z_j)^(m_j)`.
    pub fn from_roots(roots: &[(MpComplex, usize)], a0: &MpComplex) -> Result<Polynomial> {
        if a0.is_zero() {
            return Err(Error::LeadingCoefficientZero);
        }
        let prec = roots
            .iter()
            .map(|(z, _)| z.precision())
            .fold(a0.precision(), usize::max);
        let mut coeffs = vec![a0.with_precision(prec)];
        for (z, m) in roots {
            for _ in 0..*m {
                // Multiply by (z - root): new_i = old_i - root * old_{i-1}.
                let mut next = Vec::with_capacity(coeffs.len() + 1);
                next.push(coeffs[0].clone());
                for i in 1..coeffs.len() {
                    next.push(&coeffs[i] - &(z * &coeffs[i - 1]));
                }
                next.push(-(z * &coeffs[coeffs.len() - 1]));
                coeffs = next;
            }
        }
        Ok(Polynomial { coeffs })
    }

    /// Cauchy's bound `1 + max |a_i / a_0|`: every root lies in the disk of this radius.
    pub fn cauchy_bound(&self) -> f64 {
        let l0 = self.coeffs[0].log2_abs();
        let m = self.coeffs[1..]
            .iter()
            .map(|c| c.log2_abs() - l0)
            .fold(f64::NEG_INFINITY, f64::max);
        1.0 + m.exp2()
    }

    /// Fujiwara's bound `2 max(|a_i/a_0|^(1/i), |a_n/(2 a_0)|^(1/n))`, usually
    /// far tighter than [`Self::cauchy_bound`] when the coefficients are large.
    pub fn fujiwara_bound(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 0.0;
        }
        let l0 = self.coeffs[0].log2_abs();
        let m = (1..=n)
            .map(|i| {
                let l = self.coeffs[i].log2_abs() - l0 - if i == n { 1.0 } else { 0.0 };
                l / i as f64
            })
            .fold(f64::NEG_INFINITY, f64::max);
        2.0 * m.exp2()
    }

    /// Backward-error style residual `|P(z)| / sum |a_i| |z|^(n-i)`.
    pub fn scaled_residual(&self, z: &MpComplex) -> f64 {
        let v = self.evaluate(z);
        let lz = z.log2_abs();
        let n = self.degree();
        let mut terms: Vec<f64> = Vec::with_capacity(n + 1);
        for (i, c) in self.coeffs.iter().enumerate() {
            let lc = c.log2_abs();
            if lc.is_finite() {
                let pow = (n - i) as f64;
                terms.push(if pow == 0.0 { lc } else { lc + pow * lz });
            }
        }
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2();
        (v.log2_abs() - scale).exp2()
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.coeffs.iter().map(|c| c.to_c64()))
            .finish()
    }
}

/// Which construction produced a root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Closed form (linear factor).
    Direct,
    /// Quotient of consecutive converged products on one side of the series,
    /// `position` counting from the smallest modulus, found after `shift`
    /// random shifts (0 for the unshifted polynomial).
    Series {
        side: SeriesKind,
        position: usize,
        shift: usize,
    },
    /// The exact product of all distinct roots divided by the others.
    Complement,
}

#[derive(Debug, Clone)]
pub struct RootEntry {
    pub root: MpComplex,
    pub multiplicity: usize,
    pub residual: f64,
    pub provenance: Provenance,
}

/// Distinct nonzero roots with multiplicities, plus the multiplicity of `z = 0`.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub entries: Vec<RootEntry>,
    pub zero_multiplicity: usize,
    pub shifts_used: usize,
}

impl RootSet {
    pub fn distinct_count(&self) -> usize {
        self.entries.len()
    }

    /// Sum of all multiplicities including the root at the origin.
    pub fn total_multiplicity(&self) -> usize {
        self.zero_multiplicity + self.entries.iter().map(|e| e.multiplicity).sum::<usize>()
    }

    /// Roots repeated according to multiplicity (zeros included).
    pub fn expanded(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.zero_multiplicity];
        for e in &self.entries {
            let z = e.root.to_c64();
            out.extend(std::iter::repeat_n(z, e.multiplicity));
        }
        out
    }
}
