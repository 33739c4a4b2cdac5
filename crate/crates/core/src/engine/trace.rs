//! Ratio sequences of consecutive Hankel determinants and their verdicts.

use num_complex::Complex64;

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::hankel::{hadamard_det_guarded, HankelCell};
use crate::mp::MpComplex;
use crate::poly::Polynomial;
use crate::series::{CoefficientStream, SeriesKind};

/// Bits a trace cell must keep after cancellation to count as trusted.
pub const DEFAULT_RETAINED_BITS: usize = 96;

/// Length of one scheduling window of the solver (in `k`).
pub const SCHEDULE_STEP: usize = 16;

#[derive(Debug, Clone)]
pub struct TracePoint {
    pub k: usize,
    pub ratio: MpComplex,
    pub value: Complex64,
    /// `R(k+1) - R(k)` when `k + 1` is also a usable point.
    pub step: Option<Complex64>,
    /// `|R(k+1) - R(k)|`, evaluated before rounding to `f64`.
    pub diff: Option<f64>,
}

/// `R(k) = H_{k,r}/H_{k+1,r}` (Taylor) or `H_{k+1,r}/H_{k,r}` (Laurent) for
/// the usable `k`, and the `k` where the denominator could not be used.
#[derive(Debug, Clone)]
pub struct RatioTrace {
    pub side: SeriesKind,
    pub r: usize,
    pub points: Vec<TracePoint>,
    pub gaps: Vec<usize>,
    pub precision: usize,
}

impl RatioTrace {
    /// Rebuilds a trace from `(k, ratio, diff)` rows; missing `k` below the
    /// last row are gaps.
    pub fn from_rows(side: SeriesKind, r: usize, rows: &[(usize, Complex64, Option<f64>)]) -> Self {
        let mut points: Vec<TracePoint> = rows
            .iter()
            .map(|&(k, v, diff)| TracePoint {
                k,
                ratio: MpComplex::from_c64(v, 53),
                value: v,
                step: None,
                diff,
            })
            .collect();
        points.sort_by_key(|p| p.k);
        for i in 1..points.len() {
            if points[i].k == points[i - 1].k + 1 {
                let s = points[i].value - points[i - 1].value;
                points[i - 1].step = Some(s);
            }
        }
        let mut gaps = Vec::new();
        if let Some(last) = points.last() {
            let have: std::collections::HashSet<usize> = points.iter().map(|p| p.k).collect();
            gaps = (0..last.k).filter(|k| !have.contains(k)).collect();
        }
        Self {
            side,
            r,
            points,
            gaps,
            precision: 53,
        }
    }

    /// The sub-trace with `k` in `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Self {
        let mut points: Vec<TracePoint> = self
            .points
            .iter()
            .filter(|p| p.k >= lo && p.k <= hi)
            .cloned()
            .collect();
        if let Some(last) = points.last_mut() {
            if last.k == hi {
                last.step = None;
                last.diff = None;
            }
        }
        Self {
            side: self.side,
            r: self.r,
            points,
            gaps: self
                .gaps
                .iter()
                .copied()
                .filter(|&k| k >= lo && k <= hi)
                .collect(),
            precision: self.precision,
        }
    }

    pub fn last_k(&self) -> Option<usize> {
        let p = self.points.last().map(|p| p.k);
        let g = self.gaps.last().copied();
        p.max(g)
    }

    /// `(k, |R(k+1) - R(k)|)` over consecutive usable pairs.
    pub fn diffs(&self) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.diff.map(|d| (p.k, d)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Converged,
    Oscillating,
    Inconclusive,
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictStatus::Converged => "converged",
            VerdictStatus::Oscillating => "oscillating",
            VerdictStatus::Inconclusive => "inconclusive",
        })
    }
}

/// `limit`, `q_estimate` and `error_estimate` are best guesses whatever the
/// status; only a `Converged` verdict vouches for them.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVerdict {
    pub status: VerdictStatus,
    pub limit: Complex64,
    pub q_estimate: f64,
    pub error_estimate: f64,
}

impl TraceVerdict {
    pub fn exact(limit: Complex64) -> Self {
        Self {
            status: VerdictStatus::Converged,
            limit,
            q_estimate: 0.0,
            error_estimate: 0.0,
        }
    }

    fn inconclusive(limit: Complex64) -> Self {
        Self {
            status: VerdictStatus::Inconclusive,
            limit,
            q_estimate: f64::NAN,
            error_estimate: f64::INFINITY,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == VerdictStatus::Converged
    }

    /// Good enough to seed a polishing step.
    pub fn is_seed(&self, seed_tol: f64) -> bool {
        match self.status {
            VerdictStatus::Converged => true,
            VerdictStatus::Inconclusive => self.error_estimate <= seed_tol * self.limit.norm(),
            VerdictStatus::Oscillating => false,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `2^slope` of the Theil-Sen fit of `log2 d` against `k`.
pub fn theil_sen_rate(pts: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(k, d)| (k as f64, d.log2()))
        .collect();
    let mut slopes = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            slopes.push((pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0));
        }
    }
    if slopes.is_empty() {
        None
    } else {
        Some(median(&mut slopes).exp2())
    }
}

/// Verdict on the tail of a trace.
pub fn classify(trace: &RatioTrace, config: &SolverConfig) -> Result<TraceVerdict> {
    let w = config.window;
    let n = trace.points.len();
    if n < w {
        return Err(Error::TooFewPoints {
            needed: w,
            available: n,
        });
    }
    let last = &trace.points[n - 1];
    let r_last = last.value;
    let mag = r_last.norm();
    let k_last = trace.last_k().unwrap_or(last.k);

    // A convergent trace has nonvanishing denominators from some k on.
    let recent_gaps = trace.gaps.iter().filter(|&&g| g + 2 * w > k_last).count();
    if recent_gaps >= 2 {
        return Ok(TraceVerdict {
            status: VerdictStatus::Oscillating,
            limit: r_last,
            q_estimate: 1.0,
            error_estimate: f64::INFINITY,
        });
    }

    let floor = mag * (-(config.retained_bits as f64 - 16.0)).exp2();
    let all = trace.diffs();
    if all.len() < w {
        return Ok(TraceVerdict::inconclusive(r_last));
    }
    let clean = |d: f64| if d <= floor { 0.0 } else { d };
    let tail: Vec<(usize, f64)> = all[all.len() - w..]
        .iter()
        .map(|&(k, d)| (k, clean(d)))
        .collect();
    let fit_len = all.len().min(4 * w);
    let fit: Vec<(usize, f64)> = all[all.len() - fit_len..]
        .iter()
        .map(|&(k, d)| (k, clean(d)))
        .collect();

    let mut ratios: Vec<f64> = tail
        .windows(2)
        .filter(|p| p[0].1 > 0.0 && p[1].1 > 0.0 && p[1].0 == p[0].0 + 1)
        .map(|p| p[1].1 / p[0].1)
        .collect();
    let q_med = if ratios.is_empty() {
        0.0
    } else {
        median(&mut ratios)
    };
    let q_fit = theil_sen_rate(&fit);

    let d_last = tail[w - 1].1;
    if d_last == 0.0 {
        // Reached the noise floor of the retained bits.
        let zeros = tail.iter().filter(|d| d.1 == 0.0).count();
        if zeros * 2 >= w || q_fit.is_none_or(|q| q < 1.0) {
            return Ok(TraceVerdict {
                status: VerdictStatus::Converged,
                limit: r_last,
                q_estimate: q_med,
                error_estimate: all[all.len() - w..].iter().map(|d| d.1).fold(0.0, f64::max),
            });
        }
    }
    let q_fit = q_fit.unwrap_or(0.0);
    if q_fit >= config.oscillation_threshold
        || jumping(trace, &tail)
        || flat_envelope(&all, w, config.oscillation_threshold, floor)
    {
        return Ok(TraceVerdict {
            status: VerdictStatus::Oscillating,
            limit: r_last,
            q_estimate: q_fit,
            error_estimate: f64::INFINITY,
        });
    }
    let q = q_med.max(q_fit);
    if q >= 1.0 {
        return Ok(TraceVerdict {
            status: VerdictStatus::Inconclusive,
            limit: r_last,
            q_estimate: q_med,
            error_estimate: f64::INFINITY,
        });
    }
    let recent = tail
        .iter()
        .rev()
        .take(4)
        .enumerate()
        .map(|(i, d)| d.1 * q.powi(i as i32))
        .fold(0.0, f64::max);
    let error = recent * q / (1.0 - q);
    let limit = extrapolate(trace).unwrap_or(r_last);
    let status = if error <= config.tol * mag {
        VerdictStatus::Converged
    } else {
        VerdictStatus::Inconclusive
    };
    Ok(TraceVerdict {
        status,
        limit,
        q_estimate: q_med,
        error_estimate: error,
    })
}

/// Relative step below which a window is not considered to be jumping.
const JUMP: f64 = 0.25;

/// Every step of the window moves the ratio by at least [`JUMP`] of its
/// size and the steps do not shrink monotonically. A tie whose phase turns
/// by nearly a half or third of a circle per step looks like this: the
/// ratio hops between a few slowly drifting values, so the decay fit alone
/// can read it as slow convergence.
fn jumping(trace: &RatioTrace, tail: &[(usize, f64)]) -> bool {
    let value = |k: usize| {
        trace
            .points
            .binary_search_by_key(&k, |p| p.k)
            .ok()
            .map(|i| trace.points[i].value.norm())
    };
    let big = tail.iter().all(|&(k, d)| match (value(k), value(k + 1)) {
        (Some(a), Some(b)) => d >= JUMP * a.max(b),
        _ => false,
    });
    big && tail.windows(2).any(|p| p[1].1 >= p[0].1)
}

/// Across the two halves of the last (up to) `16 window` diffs, the largest
/// or the median diff shrinks by less than `threshold` per step. A tie whose
/// ratio circles with a period of dozens of steps keeps both statistics level
/// where a fit over a shorter stretch may catch a falling slope; the median
/// also shrugs off the spikes where a tied ratio passes near a pole. Needs
/// `4 window` diffs.
fn flat_envelope(all: &[(usize, f64)], w: usize, threshold: f64, floor: f64) -> bool {
    let len = all.len().min(16 * w);
    if len < 4 * w {
        return false;
    }
    let seg: Vec<f64> = all[all.len() - len..].iter().map(|d| d.1).collect();
    let half = len / 2;
    let least = threshold.powi(half as i32);
    let level = |early: f64, late: f64| late > floor && early > 0.0 && late / early >= least;
    let peak = |s: &[f64]| s.iter().copied().fold(0.0, f64::max);
    let (early, late) = (&seg[..half], &seg[len - half..]);
    level(peak(early), peak(late)) || level(median(&mut early.to_vec()), median(&mut late.to_vec()))
}

/// `R_last + s rho / (1 - rho)` with the complex step ratio `rho`, when the
/// last two ratios agree; `None` otherwise.
fn extrapolate(trace: &RatioTrace) -> Option<Complex64> {
    let n = trace.points.len();
    if n < 4 {
        return None;
    }
    let p = &trace.points[n - 4..];
    if p[3].k != p[0].k + 3 {
        return None;
    }
    let (s0, s1, s2) = (p[0].step?, p[1].step?, p[2].step?);
    if s0.norm() == 0.0 || s1.norm() == 0.0 {
        return None;
    }
    let rho = s2 / s1;
    let rho_prev = s1 / s0;
    if rho.norm() >= 1.0 || (rho - rho_prev).norm() > 0.1 * rho.norm() {
        return None;
    }
    Some(p[3].value + s2 * rho / (Complex64::new(1.0, 0.0) - rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CellState {
    Trusted,
    Zero,
    Untrusted,
}

/// Incremental builder of one trace at a fixed precision.
pub(crate) struct TraceBuilder {
    side: SeriesKind,
    r: usize,
    retained: usize,
    stream: CoefficientStream,
    cells: Vec<(HankelCell, CellState)>,
    last_trusted_margin: Option<f64>,
    trace: RatioTrace,
}

impl TraceBuilder {
    pub fn new(poly: &Polynomial, side: SeriesKind, r: usize, retained: usize) -> Result<Self> {
        if r == 0 || r > poly.degree() {
            return Err(Error::InvalidOrder);
        }
        let stream = CoefficientStream::new(poly, side)?;
        Ok(Self {
            side,
            r,
            retained,
            stream,
            cells: Vec::new(),
            last_trusted_margin: None,
            trace: RatioTrace {
                side,
                r,
                points: Vec::new(),
                gaps: Vec::new(),
                precision: poly.precision(),
            },
        })
    }

    pub fn trace(&self) -> &RatioTrace {
        &self.trace
    }

    pub fn into_trace(self) -> RatioTrace {
        self.trace
    }

    fn push_cell(&mut self) -> Result<()> {
        let k = self.cells.len();
        self.stream.ensure(k + 2 * self.r);
        let cell = hadamard_det_guarded(&self.stream, k, self.r, self.retained as u32)?;
        let state = if cell.value.is_zero() {
            CellState::Zero
        } else if cell.is_flagged() {
            let threshold = cell.precision as f64 - self.retained as f64;
            if self
                .last_trusted_margin
                .is_none_or(|m| m >= threshold / 2.0)
            {
                return Err(Error::PrecisionExhausted {
                    k,
                    r: self.r,
                    precision: cell.precision,
                });
            }
            CellState::Untrusted
        } else {
            self.last_trusted_margin = Some(cell.cancellation_margin);
            CellState::Trusted
        };
        self.cells.push((cell, state));
        Ok(())
    }

    /// Extends the trace through `k_end`; on error the points computed so far
    /// stay in place.
    pub fn extend_to(&mut self, k_end: usize) -> Result<()> {
        let mut k = self.trace.last_k().map_or(0, |k| k + 1);
        while k <= k_end {
            while self.cells.len() < k + 2 {
                self.push_cell()?;
            }
            let (num, den) = match self.side {
                SeriesKind::Taylor => (&self.cells[k], &self.cells[k + 1]),
                SeriesKind::Laurent => (&self.cells[k + 1], &self.cells[k]),
            };
            if den.1 == CellState::Trusted && num.1 != CellState::Untrusted {
                let ratio = if num.1 == CellState::Zero {
                    MpComplex::zero(self.stream.precision())
                } else {
                    num.0.value.div(&den.0.value).to_mp()
                };
                if let Some(prev) = self.trace.points.last_mut() {
                    if prev.k + 1 == k {
                        let step = &ratio - &prev.ratio;
                        prev.diff = Some(step.abs_f64());
                        prev.step = Some(step.to_c64());
                    }
                }
                self.trace.points.push(TracePoint {
                    k,
                    value: ratio.to_c64(),
                    ratio,
                    step: None,
                    diff: None,
                });
            } else {
                self.trace.gaps.push(k);
            }
            k += 1;
        }
        Ok(())
    }
}

/// The trace for `k = 0..=k_max` at the polynomial's own precision, with
/// [`DEFAULT_RETAINED_BITS`] required after cancellation.
pub fn ratio_trace(p: &Polynomial, side: SeriesKind, r: usize, k_max: usize) -> Result<RatioTrace> {
    ratio_trace_retaining(p, side, r, k_max, DEFAULT_RETAINED_BITS)
}

pub fn ratio_trace_retaining(
    p: &Polynomial,
    side: SeriesKind,
    r: usize,
    k_max: usize,
    retained: usize,
) -> Result<RatioTrace> {
    let mut b = TraceBuilder::new(p, side, r, retained)?;
    b.extend_to(k_max)?;
    Ok(b.into_trace())
}

/// As [`ratio_trace`], doubling the working precision from
/// `config.precision_bits` up to `config.max_precision_bits` whenever the
/// cancellation eats into the retained bits.
pub fn escalating_trace(
    p: &Polynomial,
    side: SeriesKind,
    r: usize,
    k_max: usize,
    config: &SolverConfig,
) -> Result<RatioTrace> {
    let mut prec = p.precision().max(config.precision_bits);
    loop {
        let mut b = TraceBuilder::new(&p.with_precision(prec), side, r, config.retained_bits)?;
        match b.extend_to(k_max) {
            Ok(()) => return Ok(b.into_trace()),
            Err(Error::PrecisionExhausted { .. }) if 2 * prec <= config.max_precision_bits => {
                prec *= 2
            }
            Err(e) => return Err(e),
        }
    }
}

fn verdict_or_inconclusive(trace: &RatioTrace, config: &SolverConfig) -> TraceVerdict {
    match classify(trace, config) {
        Ok(v) => v,
        Err(_) => TraceVerdict::inconclusive(
            trace
                .points
                .last()
                .map_or(Complex64::new(0.0, 0.0), |p| p.value),
        ),
    }
}

/// The solver's schedule. The trace grows in windows of [`SCHEDULE_STEP`] and
/// is classified after each one; it stops once the verdict is settled or can
/// no longer improve within `k_max`. Precision escalates on demand; at the ceiling the trace is
/// cut where precision ran out.
pub fn scheduled_trace(
    p: &Polynomial,
    side: SeriesKind,
    r: usize,
    config: &SolverConfig,
) -> Result<(RatioTrace, TraceVerdict)> {
    let mut prec = p.precision().max(config.precision_bits);
    let mut builder = TraceBuilder::new(&p.with_precision(prec), side, r, config.retained_bits)?;
    let mut k_end = SCHEDULE_STEP.min(config.k_max + 1) - 1;
    let mut oscillating_before = false;
    loop {
        match builder.extend_to(k_end) {
            Ok(()) => {}
            Err(Error::PrecisionExhausted { .. }) if 2 * prec <= config.max_precision_bits => {
                prec *= 2;
                builder =
                    TraceBuilder::new(&p.with_precision(prec), side, r, config.retained_bits)?;
                continue;
            }
            Err(Error::PrecisionExhausted { .. }) => {
                let trace = builder.into_trace();
                let v = verdict_or_inconclusive(&trace, config);
                return Ok((trace, v));
            }
            Err(e) => return Err(e),
        }
        let v = verdict_or_inconclusive(builder.trace(), config);
        let done = k_end >= config.k_max
            || match v.status {
                VerdictStatus::Converged => true,
                VerdictStatus::Oscillating => {
                    let settled = oscillating_before && k_end >= 63;
                    oscillating_before = true;
                    settled
                }
                VerdictStatus::Inconclusive => {
                    oscillating_before = false;
                    hopeless(&v, k_end, config)
                }
            };
        if done {
            return Ok((builder.into_trace(), v));
        }
        k_end = (k_end + SCHEDULE_STEP).min(config.k_max);
    }
}

/// The projected error at `k_max` misses the next quality level.
fn hopeless(v: &TraceVerdict, k_end: usize, config: &SolverConfig) -> bool {
    if k_end < 3 * SCHEDULE_STEP || !v.error_estimate.is_finite() || !(v.q_estimate > 0.0) {
        return false;
    }
    let mag = v.limit.norm();
    let projected = v.error_estimate * v.q_estimate.min(1.0).powi((config.k_max - k_end) as i32);
    if v.error_estimate <= config.seed_tol * mag {
        projected > config.tol * mag
    } else {
        projected > config.seed_tol * mag
    }
}
