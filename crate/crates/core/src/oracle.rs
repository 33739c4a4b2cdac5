//! Ground truth that does not go through the Hankel pipeline.
//!
//! * Vandermonde determinants, by product formula and by elimination.
//! * Closed forms of `H_{k,r}` as sums over `r`-subsets of the roots.
//! * The error constants `C`, `q`, `D` that bound the distance of a ratio
//!   sequence from its limit, and the `k` past which the bound applies.
//! * A Durand-Kerner simultaneous iteration for the roots themselves.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mp::MpComplex;
use crate::poly::Polynomial;
use crate::series::SeriesKind;

/// Combinatorial prefactor in front of the subset sums of the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefactor {
    /// No extra factor; agrees with direct expansion of the determinant.
    Unit,
    /// An extra `r!`.
    Factorial,
}

/// The convention matching the direct determinant (checked in the tests
/// against `c_0 c_2 - c_1^2 = 1/8` for `(z-1)(z-2)`).
pub const FROZEN_PREFACTOR: Prefactor = Prefactor::Unit;

/// All increasing `r`-subsets of `0..n`, in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r <= n {
        rec(0, n, r, &mut Vec::with_capacity(r), &mut out);
    }
    out
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<MpComplex>>) -> MpComplex {
    let n = a.len();
    let prec = a
        .iter()
        .flatten()
        .map(MpComplex::precision)
        .max()
        .unwrap_or(64);
    let mut det = MpComplex::one(prec);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].log2_abs().total_cmp(&a[y][col].log2_abs()))
            .unwrap();
        if a[piv][col].is_zero() {
            return MpComplex::zero(prec);
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det = &det * &a[col][col];
        for row in col + 1..n {
            let f = &a[row][col] / &a[col][col];
            for j in col + 1..n {
                let t = &f * &a[col][j];
                a[row][j] = &a[row][j] - &t;
            }
        }
    }
    det
}

/// `V(a_1..a_s) = prod_{i<j} (a_j - a_i)`; `V(a_1) = 1`.
pub fn vandermonde(args: &[MpComplex]) -> MpComplex {
    let prec = args.iter().map(MpComplex::precision).max().unwrap_or(64);
    let mut acc = MpComplex::one(prec);
    for j in 0..args.len() {
        for i in 0..j {
            acc = &acc * &(&args[j] - &args[i]);
        }
    }
    acc
}

/// Determinant of the power matrix with rows ordered from `a^(s-1)` down to
/// `a^0`, evaluated by elimination.
pub fn vandermonde_inversed(args: &[MpComplex]) -> MpComplex {
    let s = args.len();
    let prec = args.iter().map(MpComplex::precision).max().unwrap_or(64);
    if s <= 1 {
        return MpComplex::one(prec);
    }
    let m: Vec<Vec<MpComplex>> = (0..s)
        .map(|i| args.iter().map(|a| a.powi((s - 1 - i) as u64)).collect())
        .collect();
    determinant(m)
}

/// `(-1)^floor(s/2)`.
pub fn reversal_sign(s: usize) -> i64 {
    if (s / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn factorial(r: usize) -> i64 {
    (1..=r as i64).product()
}

/// Closed form of `H_{k,r}` (Taylor) or the dual determinant (Laurent) from
/// the distinct roots and their multiplicities, under the frozen prefactor.
pub fn hadamard_via_roots(
    roots: &[MpComplex],
    mults: &[usize],
    k: usize,
    r: usize,
    side: SeriesKind,
) -> MpComplex {
    hadamard_via_roots_with(roots, mults, k, r, side, FROZEN_PREFACTOR)
}

/// Taylor: `(-1)^r sum_J prod m_J (prod z_J)^-(k+2r-1) V(z_J)^2`.
/// Laurent: `sum_J prod m_J (prod z_J)^k V(z_J)^2`. Zero for `r > p`.
pub fn hadamard_via_roots_with(
    roots: &[MpComplex],
    mults: &[usize],
    k: usize,
    r: usize,
    side: SeriesKind,
    prefactor: Prefactor,
) -> MpComplex {
    assert_eq!(roots.len(), mults.len());
    let prec = roots.iter().map(MpComplex::precision).max().unwrap_or(64);
    let p = roots.len();
    if r > p {
        return MpComplex::zero(prec);
    }
    let mut sum = MpComplex::zero(prec);
    for subset in combinations(p, r) {
        let zs: Vec<MpComplex> = subset.iter().map(|&j| roots[j].clone()).collect();
        let m: i64 = subset.iter().map(|&j| mults[j] as i64).product();
        let prod = zs.iter().fold(MpComplex::one(prec), |acc, z| &acc * z);
        let v = vandermonde(&zs);
        let power = match side {
            SeriesKind::Taylor => prod.powi((k + 2 * r - 1) as u64).recip(),
            SeriesKind::Laurent => prod.powi(k as u64),
        };
        let term = (&power * &(&v * &v)).scale_i64(m);
        sum = &sum + &term;
    }
    if side == SeriesKind::Taylor && r % 2 == 1 {
        sum = -sum;
    }
    match prefactor {
        Prefactor::Unit => sum,
        Prefactor::Factorial => sum.scale_i64(factorial(r)),
    }
}

/// Constants of the geometric error bound `|R_r(k) - Pi_r| <= C q^(k + offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorConstant {
    pub side: SeriesKind,
    pub r: usize,
    pub c: f64,
    pub q: f64,
    pub d: f64,
    /// First `k` at which the bound is guaranteed.
    pub k_threshold: usize,
    /// The limit `Pi_r`: product of the `r` smallest (Taylor) or largest
    /// (Laurent) roots.
    pub product: Complex64,
}

impl ErrorConstant {
    /// `2r - 1` on the Taylor side, `0` on the Laurent side.
    pub fn exponent_offset(&self) -> usize {
        match self.side {
            SeriesKind::Taylor => 2 * self.r - 1,
            SeriesKind::Laurent => 0,
        }
    }

    pub fn bound(&self, k: usize) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        self.c * self.q.powi((k + self.exponent_offset()) as i32)
    }
}

/// Roots (with multiplicities) sorted by increasing modulus.
fn by_modulus(roots: &[MpComplex], mults: &[usize]) -> Vec<(MpComplex, usize, f64)> {
    let mut v: Vec<(MpComplex, usize, f64)> = roots
        .iter()
        .zip(mults)
        .map(|(z, &m)| (z.clone(), m, z.log2_abs()))
        .collect();
    v.sort_by(|a, b| a.2.total_cmp(&b.2));
    v
}

fn strict_gap(lo: f64, hi: f64) -> bool {
    // log2 moduli; equal moduli up to rounding count as a tie.
    hi - lo > 1e-12
}

fn smallest_k(q: f64, offset: usize, d: f64, eps: f64) -> usize {
    if d == 0.0 {
        return 0;
    }
    let mut k = 0usize;
    while q.powi((k + offset) as i32) * d >= eps {
        k += 1;
    }
    k
}

/// `D`, `q`, `C = |Pi_r| 2 D (1 + 2 eps)` and the threshold `k` for order `r`.
pub fn theoretical_error_constant(
    roots: &[MpComplex],
    mults: &[usize],
    r: usize,
    side: SeriesKind,
    eps: f64,
) -> Result<ErrorConstant> {
    let p = roots.len();
    if r == 0 || r > p {
        return Err(Error::InvalidOrder);
    }
    let sorted = by_modulus(roots, mults);
    let top: Vec<usize> = match side {
        SeriesKind::Taylor => (0..r).collect(),
        SeriesKind::Laurent => (p - r..p).collect(),
    };
    let prec = roots.iter().map(MpComplex::precision).max().unwrap_or(64);
    let product = top
        .iter()
        .fold(MpComplex::one(prec), |acc, &j| &acc * &sorted[j].0);
    if r == p {
        return Ok(ErrorConstant {
            side,
            r,
            c: 0.0,
            q: 0.0,
            d: 0.0,
            k_threshold: 0,
            product: product.to_c64(),
        });
    }
    let (lo, hi) = match side {
        SeriesKind::Taylor => (sorted[r - 1].2, sorted[r].2),
        SeriesKind::Laurent => (sorted[p - r - 1].2, sorted[p - r].2),
    };
    if !strict_gap(lo, hi) {
        return Err(Error::NoModulusGap { r });
    }
    let q = (lo - hi).exp2();
    let zs =
        |idx: &[usize]| -> Vec<MpComplex> { idx.iter().map(|&j| sorted[j].0.clone()).collect() };
    let m_top: f64 = top.iter().map(|&j| sorted[j].1 as f64).product();
    let l_v_top = vandermonde(&zs(&top)).log2_abs();
    let mut d = 0.0;
    for subset in combinations(p, r) {
        if subset == top {
            continue;
        }
        let m: f64 = subset.iter().map(|&j| sorted[j].1 as f64).product();
        let lv = vandermonde(&zs(&subset)).log2_abs();
        d += m / m_top * (2.0 * (lv - l_v_top)).exp2();
    }
    let offset = match side {
        SeriesKind::Taylor => 2 * r,
        SeriesKind::Laurent => 0,
    };
    Ok(ErrorConstant {
        side,
        r,
        c: product.abs_f64() * 2.0 * d * (1.0 + 2.0 * eps),
        q,
        d,
        k_threshold: smallest_k(q, offset, d, eps),
        product: product.to_c64(),
    })
}

/// The coarser `r = 1` constant `C = |z_extreme| 4 (n - 1)`, valid once
/// `q^(k+2) (n-1) < 1/2` (Taylor) or `q^k (n-1) < 1/2` (Laurent).
pub fn coarse_first_order_constant(
    roots: &[MpComplex],
    mults: &[usize],
    side: SeriesKind,
) -> Result<ErrorConstant> {
    let p = roots.len();
    if p < 2 {
        return Err(Error::NoModulusGap { r: 1 });
    }
    let n: usize = mults.iter().sum();
    let sorted = by_modulus(roots, mults);
    let (extreme, lo, hi) = match side {
        SeriesKind::Taylor => (&sorted[0], sorted[0].2, sorted[1].2),
        SeriesKind::Laurent => (&sorted[p - 1], sorted[p - 2].2, sorted[p - 1].2),
    };
    if !strict_gap(lo, hi) {
        return Err(Error::NoModulusGap { r: 1 });
    }
    let q = (lo - hi).exp2();
    let offset = match side {
        SeriesKind::Taylor => 2,
        SeriesKind::Laurent => 0,
    };
    let n1 = (n - 1) as f64;
    Ok(ErrorConstant {
        side,
        r: 1,
        c: extreme.0.abs_f64() * 4.0 * n1,
        q,
        d: n1,
        k_threshold: smallest_k(q, offset, n1, 0.5),
        product: extreme.0.to_c64(),
    })
}

const DK_MAX_ITER: usize = 500;
const DK_RESTARTS: usize = 3;
const DK_RESIDUAL: f64 = 1e-12;
const DK_SEED: u64 = 0x5eed_d0e5;

fn dk_residual(p: &Polynomial, z: &MpComplex) -> f64 {
    let v = p.evaluate(z).log2_abs();
    let n = p.degree() as f64;
    let scale = p.leading().log2_abs() + n * z.log2_abs().max(0.0);
    (v - scale).exp2()
}

/// All `n` roots (repeated by multiplicity) by Durand-Kerner iteration at the
/// polynomial's precision, started on a circle of Cauchy-bound radius with a
/// random phase.
pub fn independent_roots(p: &Polynomial) -> Result<Vec<MpComplex>> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::DegreeZero);
    }
    let prec = p.precision();
    let a0 = p.leading().clone();
    if n == 1 {
        return Ok(vec![-(&p.coeffs()[1] / &a0)]);
    }
    let radius = p.cauchy_bound();
    let stop = -(prec as f64) * 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(DK_SEED);
    for _ in 0..DK_RESTARTS {
        let phase: f64 = rng.random_range(0.0..2.0 * PI);
        let mut z: Vec<MpComplex> = (0..n)
            .map(|j| {
                let t = phase + 2.0 * PI * j as f64 / n as f64;
                MpComplex::from_c64(Complex64::from_polar(radius, t), prec)
            })
            .collect();
        for _ in 0..DK_MAX_ITER {
            let mut worst = f64::NEG_INFINITY;
            for j in 0..n {
                let mut den = a0.clone();
                for i in 0..n {
                    if i != j {
                        den = &den * &(&z[j] - &z[i]);
                    }
                }
                if den.is_zero() {
                    // Coincident iterates; nudge apart.
                    z[j] = &z[j] + &MpComplex::from_f64(1e-3 * radius, 1e-3 * radius, prec);
                    worst = f64::INFINITY;
                    continue;
                }
                let step = &p.evaluate(&z[j]) / &den;
                let rel = step.log2_abs() - z[j].log2_abs().max(0.0);
                worst = worst.max(rel);
                z[j] = &z[j] - &step;
            }
            if worst < stop {
                break;
            }
        }
        if z.iter()
            .all(|x| x.is_finite() && dk_residual(p, x) < DK_RESIDUAL)
        {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence)
}

/// Merges approximations closer than `tol` (relative to `max(1, |z|)`) into
/// `(centroid, count)` clusters.
pub fn cluster_roots(roots: &[MpComplex], tol: f64) -> Vec<(MpComplex, usize)> {
    let mut clusters: Vec<(Vec<MpComplex>, Complex64)> = Vec::new();
    for z in roots {
        let zc = z.to_c64();
        match clusters
            .iter_mut()
            .find(|(_, c)| (zc - *c).norm() <= tol * c.norm().max(1.0))
        {
            Some((members, c)) => {
                members.push(z.clone());
                let k = members.len() as f64;
                *c = *c + (zc - *c) / k;
            }
            None => clusters.push((vec![z.clone()], zc)),
        }
    }
    clusters
        .into_iter()
        .map(|(members, _)| {
            let prec = members[0].precision();
            let sum = members
                .iter()
                .fold(MpComplex::zero(prec), |acc, z| &acc + z);
            let m = members.len();
            (&sum / &MpComplex::from_i64(m as i64, prec), m)
        })
        .collect()
}
