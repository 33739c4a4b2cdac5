//! The solver.
//!
//! `solve` strips the roots at the origin, counts the distinct roots from the
//! rank of the Laurent Hankel matrices, and collects roots as quotients of
//! converged products from both series. Products that fail to converge
//! because of modulus ties are retried on `P(z + s)` for random complex `s`.
//! Every candidate is polished on `P` itself before the multiplicities are
//! read off the power sums.

mod products;
mod trace;

pub use products::{
    merge_sides, products_from_traces, roots_from_products, top_ratio, usable_roots, RootEstimate,
};
pub use trace::{
    classify, escalating_trace, ratio_trace, ratio_trace_retaining, scheduled_trace,
    theil_sen_rate, RatioTrace, TracePoint, TraceVerdict, VerdictStatus, DEFAULT_RETAINED_BITS,
    SCHEDULE_STEP,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hankel::{
    hadamard_det_guarded, structural_zero_test, ZeroTest, DEFAULT_GUARD_BITS, DEFAULT_ZERO_WINDOW,
};
use crate::mp::MpComplex;
use crate::poly::{Polynomial, Provenance, RootEntry, RootSet};
use crate::series::{CoefficientStream, SeriesKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub precision_bits: usize,
    pub k_max: usize,
    /// Relative tolerance on limits.
    pub tol: f64,
    pub window: usize,
    pub max_shifts: usize,
    pub shift_seed: u64,
    pub residual_tol: f64,
    /// Trace cells must keep this many bits after cancellation.
    pub retained_bits: usize,
    pub max_precision_bits: usize,
    /// Median diff ratio at or above which a trace counts as oscillating.
    pub oscillation_threshold: f64,
    /// Relative error under which an unconverged product still seeds a root.
    pub seed_tol: f64,
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            precision_bits: 256,
            k_max: 256,
            tol: 1e-12,
            window: 8,
            max_shifts: 5,
            shift_seed: 0,
            residual_tol: 1e-12,
            retained_bits: DEFAULT_RETAINED_BITS,
            max_precision_bits: 8192,
            oscillation_threshold: 0.98,
            seed_tol: 1e-2,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.precision_bits < 64 {
            return bad("precision_bits must be at least 64");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol must lie in (0, 1)");
        }
        if self.window < 3 {
            return bad("window must be at least 3");
        }
        if self.k_max < self.window + 2 {
            return bad("k_max must be at least window + 2");
        }
        if !(self.residual_tol > 0.0) {
            return bad("residual_tol must be positive");
        }
        if self.max_precision_bits < self.precision_bits {
            return bad("max_precision_bits must be at least precision_bits");
        }
        if !(self.oscillation_threshold > 0.0 && self.oscillation_threshold <= 1.0) {
            return bad("oscillation_threshold must lie in (0, 1]");
        }
        Ok(())
    }
}

fn probe_order(stream: &CoefficientStream, r: usize) -> Result<ZeroTest> {
    let cells = (0..DEFAULT_ZERO_WINDOW)
        .map(|k| hadamard_det_guarded(stream, k, r, DEFAULT_GUARD_BITS))
        .collect::<Result<Vec<_>>>()?;
    let prec = stream.precision() as f64;
    // Margins between half the precision and the flag line could go either way.
    if cells
        .iter()
        .any(|c| !c.is_flagged() && c.cancellation_margin > prec / 2.0)
    {
        return Ok(ZeroTest::Inconclusive);
    }
    Ok(structural_zero_test(&cells, DEFAULT_ZERO_WINDOW))
}

/// Number of distinct roots: the largest order whose Laurent Hankel
/// determinants are not structurally zero, probing downward from the degree.
pub fn count_distinct_roots(p: &Polynomial, config: &SolverConfig) -> Result<usize> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::DegreeZero);
    }
    let mut prec = p.precision().max(config.precision_bits);
    'escalate: loop {
        let mut stream = CoefficientStream::new(&p.with_precision(prec), SeriesKind::Laurent)?;
        stream.extend_to(DEFAULT_ZERO_WINDOW + 2 * n);
        for r in (1..=n).rev() {
            match probe_order(&stream, r)? {
                ZeroTest::Zero => continue,
                ZeroTest::NonZero => return Ok(r),
                ZeroTest::Inconclusive => {
                    if 2 * prec > config.max_precision_bits {
                        return Err(Error::PrecisionExhausted {
                            k: 0,
                            r,
                            precision: prec,
                        });
                    }
                    prec *= 2;
                    continue 'escalate;
                }
            }
        }
        return Ok(1);
    }
}

/// Solves `sum_j m_j z_j^k = b_k`, `k < p`, for integer multiplicities.
pub fn multiplicities(p: &Polynomial, roots: &[MpComplex]) -> Result<Vec<usize>> {
    let m = roots.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let prec = p.precision();
    let mut stream = CoefficientStream::new(p, SeriesKind::Laurent)?;
    stream.extend_to(m);
    let mut a: Vec<Vec<MpComplex>> = Vec::with_capacity(m);
    let mut row: Vec<MpComplex> = roots.iter().map(|_| MpComplex::one(prec)).collect();
    for k in 0..m {
        let mut full = row.clone();
        full.push(stream.values()[k].clone());
        a.push(full);
        row = row.iter().zip(roots).map(|(x, z)| x * z).collect();
    }
    let x = solve_linear(a).ok_or(Error::IllConditionedSystem)?;
    let mut out = Vec::with_capacity(m);
    for v in &x {
        let c = v.to_c64();
        let rounded = c.re.round();
        if rounded < 1.0 || (c - Complex64::new(rounded, 0.0)).norm() >= 0.1 {
            return Err(Error::NonIntegerMultiplicity { value: c.re });
        }
        out.push(rounded as usize);
    }
    let total: usize = out.iter().sum();
    if total != p.degree() {
        return Err(Error::NonIntegerMultiplicity {
            value: total as f64,
        });
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_linear(mut a: Vec<Vec<MpComplex>>) -> Option<Vec<MpComplex>> {
    let n = a.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&x, &y| a[x][col].log2_abs().total_cmp(&a[y][col].log2_abs()))?;
        if a[piv][col].is_zero() {
            return None;
        }
        a.swap(piv, col);
        for row in col + 1..n {
            let f = &a[row][col] / &a[col][col];
            for j in col..=n {
                let t = &f * &a[col][j];
                a[row][j] = &a[row][j] - &t;
            }
        }
    }
    let prec = a[0][0].precision();
    let mut x = vec![MpComplex::zero(prec); n];
    for i in (0..n).rev() {
        let mut s = a[i][n].clone();
        for j in i + 1..n {
            s = &s - &(&a[i][j] * &x[j]);
        }
        x[i] = &s / &a[i][i];
    }
    Some(x)
}

fn eval2(p: &Polynomial, z: &MpComplex) -> (MpComplex, MpComplex, MpComplex) {
    let prec = p.precision();
    let mut v = MpComplex::zero(prec);
    let mut d1 = MpComplex::zero(prec);
    let mut d2 = MpComplex::zero(prec);
    for c in p.coeffs() {
        d2 = &(&d2 * z) + &d1;
        d1 = &(&d1 * z) + &v;
        v = &(&v * z) + c;
    }
    (v, d1, d2.scale_i64(2))
}

const POLISH_ITER: usize = 40;

/// Newton on `P/P'` (quadratic at roots of any multiplicity). `None` if the
/// steps never settle.
pub fn polish_root(p: &Polynomial, z0: &MpComplex) -> Option<MpComplex> {
    let prec = p.precision();
    let mut z = z0.with_precision(prec);
    let mut best: Option<(f64, MpComplex)> = None;
    let mut prev = f64::INFINITY;
    for _ in 0..POLISH_ITER {
        let (v, d1, d2) = eval2(p, &z);
        if v.is_zero() {
            return Some(z);
        }
        let den = &(&d1 * &d1) - &(&v * &d2);
        if den.is_zero() {
            break;
        }
        let step = &(&v * &d1) / &den;
        let scale = z.log2_abs().max(0.0);
        let ls = step.log2_abs() - scale;
        z = &z - &step;
        if best.as_ref().is_none_or(|b| ls < b.0) {
            best = Some((ls, z.clone()));
        }
        if ls < -(prec as f64) + 24.0 {
            return Some(z);
        }
        // Stalled at the attainable accuracy of a multiple root.
        if ls < -40.0 && ls > prev - 1.0 {
            break;
        }
        prev = ls;
    }
    best.filter(|b| b.0 < -40.0).map(|b| b.1)
}

/// Uniform on the disk of radius `radius`, both parts nonzero.
pub fn draw_shift(rng: &mut impl Rng, radius: f64) -> Complex64 {
    loop {
        let x: f64 = rng.random_range(-1.0..1.0);
        let y: f64 = rng.random_range(-1.0..1.0);
        if x != 0.0 && y != 0.0 && x * x + y * y <= 1.0 {
            return Complex64::new(x, y) * radius;
        }
    }
}

struct Candidate {
    root: MpComplex,
    provenance: Provenance,
}

fn same_root(a: &MpComplex, b: &MpComplex, prec: usize) -> bool {
    let scale = a.log2_abs().max(b.log2_abs()).max(0.0);
    (a - b).log2_abs() - scale < -(prec as f64) / 8.0
}

fn push_candidate(found: &mut Vec<Candidate>, c: Candidate, prec: usize) {
    if !found.iter().any(|f| same_root(&f.root, &c.root, prec)) {
        found.push(c);
    }
}

/// With one distinct root missing, `Pi_p` over the product of the others.
fn complete_last(
    w: &Polynomial,
    count: usize,
    found: &mut Vec<Candidate>,
    config: &SolverConfig,
) -> Result<()> {
    let prec = w.precision();
    let total = top_ratio(w, SeriesKind::Taylor, count, config)?;
    let mut rest = MpComplex::one(prec);
    for c in found.iter() {
        rest = &rest * &c.root;
    }
    let guess = &MpComplex::from_c64(total.limit, prec) / &rest;
    let root = if config.polish {
        match polish_root(w, &guess) {
            Some(z) => z,
            None => return Ok(()),
        }
    } else {
        guess
    };
    push_candidate(
        found,
        Candidate {
            root,
            provenance: Provenance::Complement,
        },
        prec,
    );
    Ok(())
}

/// All roots with multiplicities.
pub fn solve(p: &Polynomial, config: &SolverConfig) -> Result<RootSet> {
    config.validate()?;
    let n = p.degree();
    if n == 0 {
        return Err(Error::DegreeZero);
    }
    let (q, zeros) = p.strip_zero_roots();
    let prec = config.precision_bits.max(p.precision());
    let w = q.with_precision(prec);
    let mut set = RootSet {
        entries: Vec::new(),
        zero_multiplicity: zeros,
        shifts_used: 0,
    };
    match w.degree() {
        0 => return Ok(set),
        1 => {
            let z = -(&w.coeffs()[1] / w.leading());
            set.entries.push(RootEntry {
                residual: w.scaled_residual(&z),
                root: z,
                multiplicity: 1,
                provenance: Provenance::Direct,
            });
            return Ok(set);
        }
        _ => {}
    }

    let count = count_distinct_roots(&w, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.shift_seed);
    let radius = w.cauchy_bound().min(w.fujiwara_bound()) / 4.0;
    let mut found: Vec<Candidate> = Vec::new();
    for attempt in 0..=config.max_shifts {
        let (s, shifted) = if attempt == 0 {
            (MpComplex::zero(prec), w.clone())
        } else {
            let s = MpComplex::from_c64(draw_shift(&mut rng, radius), prec);
            let sp = w.shift(&s);
            (s, sp)
        };
        set.shifts_used = attempt;
        if shifted.constant().is_zero() {
            continue;
        }
        let taylor = products_from_traces(&shifted, SeriesKind::Taylor, count, config)?;
        let laurent = products_from_traces(&shifted, SeriesKind::Laurent, count, config)?;
        let estimates = merge_sides(
            &usable_roots(&taylor, SeriesKind::Taylor, config.seed_tol),
            &usable_roots(&laurent, SeriesKind::Laurent, config.seed_tol),
        );
        for e in estimates {
            let raw = &MpComplex::from_c64(e.value, prec) + &s;
            let root = if config.polish {
                match polish_root(&w, &raw) {
                    Some(z) => z,
                    None => continue,
                }
            } else if e.converged {
                raw
            } else {
                continue;
            };
            let provenance = Provenance::Series {
                side: e.side,
                position: e.position,
                shift: attempt,
            };
            push_candidate(&mut found, Candidate { root, provenance }, prec);
        }
        if found.len() + 1 == count {
            complete_last(&w, count, &mut found, config)?;
        }
        if found.len() >= count {
            break;
        }
    }
    if found.len() < count {
        return Err(Error::ShiftBudgetExhausted {
            shifts: config.max_shifts,
        });
    }

    let roots: Vec<MpComplex> = found.iter().map(|c| c.root.clone()).collect();
    let mults = multiplicities(&w, &roots)?;
    for (c, m) in found.into_iter().zip(mults) {
        let residual = w.scaled_residual(&c.root);
        if !(residual < config.residual_tol) {
            return Err(Error::ResidualCheckFailed {
                root: format!("{}", c.root.to_c64()),
                residual,
            });
        }
        set.entries.push(RootEntry {
            root: c.root,
            multiplicity: m,
            residual,
            provenance: c.provenance,
        });
    }
    set.entries.sort_by(|a, b| {
        let (x, y) = (a.root.to_c64(), b.root.to_c64());
        x.norm()
            .total_cmp(&y.norm())
            .then(x.arg().total_cmp(&y.arg()))
    });
    Ok(set)
}
