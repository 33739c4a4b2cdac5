//! Acceptance criteria 1-10. Runs without the libtest harness so that every
//! criterion reports exactly one `PASS`/`FAIL` line; the process fails if any
//! criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command as Process;
use std::time::Instant;

use hroots::engine::{
    classify, count_distinct_roots, escalating_trace, multiplicities, RatioTrace, VerdictStatus,
};
use hroots::hankel::{hadamard_det_guarded, HankelCell};
use hroots::oracle::{
    coarse_first_order_constant, hadamard_via_roots, independent_roots, reversal_sign,
    theoretical_error_constant, vandermonde, vandermonde_inversed,
};
use hroots::series::{taylor_coeffs, CoefficientStream};
use hroots::{solve, MpComplex, Polynomial, SeriesKind, SolverConfig};
use hroots_cli::{run, Command, JobSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PREC: usize = 256;
/// Relative tolerance of the exact identities.
const IDENTITY_TOL: f64 = 1e-20;
/// Criterion 1.
const RESIDUAL_TOL: f64 = 1e-12;
/// Criterion 4: relative slack on the fitted rate.
const RATE_SLACK: f64 = 0.15;
/// Criterion 5: the bound constant's epsilon.
const BOUND_EPS: f64 = 0.4;
/// Criterion 6.
const TIE_KMAX: usize = 128;
/// Criterion 8: per-root agreement.
const ORACLE_TOL: f64 = 1e-8;
/// Bits a determinant must keep after cancellation.
const GUARD: u32 = 96;
const MAX_PREC: usize = 8192;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mp(z: Complex64) -> MpComplex {
    MpComplex::from_c64(z, PREC)
}

fn int_poly(roots: &[i64]) -> Polynomial {
    let r: Vec<(MpComplex, usize)> = roots
        .iter()
        .map(|&x| (MpComplex::from_i64(x, PREC), 1))
        .collect();
    Polynomial::from_roots(&r, &MpComplex::one(PREC)).unwrap()
}

fn rel(got: &MpComplex, want: &MpComplex) -> f64 {
    (got - want).abs_f64() / want.abs_f64()
}

/// Distinct integer roots in `[-9, 9] \ {0}`, degree 1 to 6.
fn integer_corpus() -> Vec<Vec<i64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..50)
        .map(|_| {
            let n = rng.random_range(1..=6);
            let mut roots: Vec<i64> = Vec::new();
            while roots.len() < n {
                let x = rng.random_range(-9..=9);
                if x != 0 && !roots.contains(&x) {
                    roots.push(x);
                }
            }
            roots
        })
        .collect()
}

/// Polynomials with at least one pair of distinct roots of equal modulus.
fn tie_corpus() -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    (0..20)
        .map(|i| {
            let a: f64 = rng.random_range(0.5..3.0);
            let t: f64 = rng.random_range(0.2..3.0);
            let mut roots = match i % 3 {
                0 => vec![Complex64::from_polar(a, t), Complex64::from_polar(a, -t)],
                1 => vec![Complex64::new(a, 0.0), Complex64::new(-a, 0.0)],
                _ => vec![
                    Complex64::from_polar(a, t),
                    Complex64::from_polar(a, t + rng.random_range(0.5..2.5)),
                ],
            };
            // Up to two more roots well away from the tied modulus.
            for j in 0..(i / 3) % 3 {
                let m = if j == 0 { a * 0.4 } else { a * 2.2 };
                roots.push(Complex64::from_polar(
                    m,
                    rng.random_range(0.0..std::f64::consts::TAU),
                ));
            }
            roots
        })
        .collect()
}

/// Gaussian-integer roots with multiplicities up to 4.
fn multiple_corpus() -> Vec<Vec<(Complex64, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..30)
        .map(|_| {
            let p = rng.random_range(1..=4);
            let mut out: Vec<(Complex64, usize)> = Vec::new();
            while out.len() < p {
                let z = Complex64::new(
                    rng.random_range(-4..=4) as f64,
                    rng.random_range(-4..=4) as f64,
                );
                if z.norm() > 0.0 && out.iter().all(|(w, _)| *w != z) {
                    out.push((z, rng.random_range(1..=4)));
                }
            }
            out
        })
        .collect()
}

/// Monic, degree 1 to 8, other coefficients uniform in the unit disk.
fn disk_corpus() -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    (0..100)
        .map(|_| {
            let n = rng.random_range(1..=8);
            let mut c = vec![Complex64::new(1.0, 0.0)];
            while c.len() <= n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                if z.norm_sqr() <= 1.0 {
                    c.push(z);
                }
            }
            c
        })
        .collect()
}

fn from_c64_roots(roots: &[(Complex64, usize)]) -> Polynomial {
    let r: Vec<(MpComplex, usize)> = roots.iter().map(|&(z, m)| (mp(z), m)).collect();
    Polynomial::from_roots(&r, &MpComplex::one(PREC)).unwrap()
}

/// A determinant recomputed at doubling precision until it keeps [`GUARD`]
/// bits, or the last attempt if the ceiling is reached first.
fn robust_det(p: &Polynomial, side: SeriesKind, k: usize, r: usize) -> HankelCell {
    let mut prec = PREC;
    loop {
        let mut s = CoefficientStream::new(&p.with_precision(prec), side).unwrap();
        s.extend_to(k + 2 * r);
        let cell = hadamard_det_guarded(&s, k, r, GUARD).unwrap();
        if !cell.is_flagged() || cell.value.is_zero() || 2 * prec > MAX_PREC {
            return cell;
        }
        prec *= 2;
    }
}

fn escalation_config() -> SolverConfig {
    SolverConfig {
        retained_bits: GUARD as usize,
        max_precision_bits: MAX_PREC,
        ..SolverConfig::default()
    }
}

fn criterion_1() -> Outcome {
    let p = Polynomial::from_f64(&[1.0, 0.0, -1.0], PREC).unwrap();
    let c = taylor_coeffs(&p, 40).map_err(|e| e.to_string())?;
    for (k, ck) in c.iter().enumerate() {
        let want = if k % 2 == 0 { 0.0 } else { -2.0 };
        ensure(ck.to_c64() == Complex64::new(want, 0.0), || {
            format!("c_{k} = {:?}", ck.to_c64())
        })?;
    }
    let cfg = SolverConfig::default();
    let trace =
        escalating_trace(&p, SeriesKind::Taylor, 1, cfg.k_max, &cfg).map_err(|e| e.to_string())?;
    let v = classify(&trace, &cfg).map_err(|e| e.to_string())?;
    ensure(v.status == VerdictStatus::Oscillating, || {
        format!("r=1 trace is {}", v.status)
    })?;
    let set = solve(&p, &cfg).map_err(|e| e.to_string())?;
    let mut roots = set.expanded();
    roots.sort_by(|a, b| a.re.total_cmp(&b.re));
    ensure(roots.len() == 2, || format!("{roots:?}"))?;
    ensure(
        (roots[0] + 1.0).norm() < RESIDUAL_TOL && (roots[1] - 1.0).norm() < RESIDUAL_TOL,
        || format!("{roots:?}"),
    )?;
    let worst = set.entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    ensure(worst < RESIDUAL_TOL, || format!("residual {worst:e}"))?;
    ensure(set.shifts_used >= 1, || "no shift used".into())?;
    Ok(format!(
        "c_k exact to k=39, trace oscillating, shifts={}, residual {worst:e}",
        set.shifts_used
    ))
}

fn criterion_2() -> Outcome {
    let cfg = escalation_config();
    let mut worst = 0.0f64;
    let mut count = 0;
    for roots in integer_corpus() {
        let p = int_poly(&roots);
        let n = roots.len();
        let prod = MpComplex::from_i64(roots.iter().product(), PREC);
        for side in [SeriesKind::Taylor, SeriesKind::Laurent] {
            let t =
                escalating_trace(&p, side, n, 20, &cfg).map_err(|e| format!("{roots:?}: {e}"))?;
            ensure(t.points.len() == 21, || {
                format!("{roots:?} {side}: gaps {:?}", t.gaps)
            })?;
            for pt in &t.points {
                let e = rel(&pt.ratio, &prod);
                worst = worst.max(e);
                count += 1;
                ensure(e < IDENTITY_TOL, || {
                    format!("{roots:?} {side} k={}: rel {e:e}", pt.k)
                })?;
            }
        }
    }
    Ok(format!("{count} ratios, worst relative error {worst:e}"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut zeros = 0;
    let mut count = 0;
    for roots in integer_corpus() {
        let p = int_poly(&roots);
        let n = roots.len();
        let zs: Vec<MpComplex> = roots
            .iter()
            .map(|&x| MpComplex::from_i64(x, PREC))
            .collect();
        let ones = vec![1; n];
        for side in [SeriesKind::Taylor, SeriesKind::Laurent] {
            for r in 1..=n {
                for k in 0..=20 {
                    let want = hadamard_via_roots(&zs, &ones, k, r, side);
                    let cell = robust_det(&p, side, k, r);
                    let got = cell.value.to_mp();
                    count += 1;
                    if want.is_zero() {
                        // Exact cancellation: the direct value must sit below its own noise floor.
                        zeros += 1;
                        ensure(got.is_zero() || cell.is_flagged(), || {
                            format!(
                                "{roots:?} {side} k={k} r={r}: closed form 0, direct {:?}",
                                got.to_c64()
                            )
                        })?;
                        continue;
                    }
                    let e = rel(&got, &want);
                    worst = worst.max(e);
                    ensure(e < IDENTITY_TOL, || {
                        format!("{roots:?} {side} k={k} r={r}: rel {e:e}")
                    })?;
                }
            }
            let beyond = hadamard_via_roots(&zs, &ones, 3, n + 1, side);
            ensure(beyond.is_zero(), || {
                format!("{roots:?} {side}: r = p + 1 gives {:?}", beyond.to_c64())
            })?;
        }
    }
    Ok(format!(
        "{count} determinants ({zeros} exact zeros), worst relative error {worst:e}"
    ))
}

fn criterion_4() -> Outcome {
    let cfg = SolverConfig::default();
    let p = int_poly(&[1, 2, 4]);
    let mut parts = Vec::new();
    for (side, r, want) in [
        (SeriesKind::Taylor, 1, 0.5),
        (SeriesKind::Taylor, 2, 0.5),
        (SeriesKind::Laurent, 1, 0.5),
    ] {
        let t = escalating_trace(&p, side, r, 64, &cfg).map_err(|e| e.to_string())?;
        let v = classify(&t.restrict(16, 64), &cfg).map_err(|e| e.to_string())?;
        let q = v.q_estimate;
        ensure((q - want).abs() <= RATE_SLACK * want, || {
            format!("{side} r={r}: q = {q}")
        })?;
        parts.push(format!("{side} r={r} q={q:.4}"));
    }
    Ok(parts.join(", "))
}

/// Largest `bound / error` shortfall seen, i.e. `max error / bound`.
fn check_bound(
    trace: &RatioTrace,
    limit: &MpComplex,
    c: &hroots::oracle::ErrorConstant,
    label: &str,
) -> Result<(usize, f64), String> {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for pt in trace.points.iter().filter(|pt| pt.k >= c.k_threshold) {
        let err = (&pt.ratio - limit).abs_f64();
        let bound = c.bound(pt.k);
        checked += 1;
        worst = worst.max(err / bound);
        ensure(err <= bound, || {
            format!("{label} k={}: error {err:e} above bound {bound:e}", pt.k)
        })?;
    }
    Ok((checked, worst))
}

fn criterion_5() -> Outcome {
    let cfg = escalation_config();
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut positions = 0;
    for roots in integer_corpus() {
        let p = int_poly(&roots);
        let n = roots.len();
        let zs: Vec<MpComplex> = roots
            .iter()
            .map(|&x| MpComplex::from_i64(x, PREC))
            .collect();
        let ones = vec![1; n];
        let mut sorted = roots.clone();
        sorted.sort_by_key(|x| x.abs());
        for side in [SeriesKind::Taylor, SeriesKind::Laurent] {
            for r in 1..n {
                let c = match theoretical_error_constant(&zs, &ones, r, side, BOUND_EPS) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                let chosen = match side {
                    SeriesKind::Taylor => &sorted[..r],
                    SeriesKind::Laurent => &sorted[n - r..],
                };
                let limit = MpComplex::from_i64(chosen.iter().product(), PREC);
                let t = escalating_trace(&p, side, r, c.k_threshold + 32, &cfg)
                    .map_err(|e| format!("{roots:?} {side} r={r}: {e}"))?;
                let (m, w) = check_bound(&t, &limit, &c, &format!("{roots:?} {side} r={r}"))?;
                positions += 1;
                checked += m;
                worst = worst.max(w);
            }
            if let Ok(c) = coarse_first_order_constant(&zs, &ones, side) {
                let extreme = match side {
                    SeriesKind::Taylor => sorted[0],
                    SeriesKind::Laurent => sorted[n - 1],
                };
                let t = escalating_trace(&p, side, 1, c.k_threshold + 32, &cfg)
                    .map_err(|e| format!("{roots:?} {side} coarse bound: {e}"))?;
                let (m, w) = check_bound(
                    &t,
                    &MpComplex::from_i64(extreme, PREC),
                    &c,
                    &format!("{roots:?} {side} coarse bound"),
                )?;
                checked += m;
                worst = worst.max(w);
            }
        }
    }
    ensure(positions > 0, || "no gap positions".into())?;
    Ok(format!(
        "{positions} gap positions, {checked} points, largest error/bound {worst:.3e}"
    ))
}

/// 1-based orders `r` at which the `side` product splits a modulus tie.
fn tied_orders(roots: &[Complex64], side: SeriesKind) -> Vec<usize> {
    let mut m: Vec<f64> = roots.iter().map(|z| z.norm()).collect();
    m.sort_by(f64::total_cmp);
    let n = m.len();
    (1..n)
        .filter(|&r| {
            let (a, b) = match side {
                SeriesKind::Taylor => (m[r - 1], m[r]),
                SeriesKind::Laurent => (m[n - r - 1], m[n - r]),
            };
            (b - a).abs() <= 1e-12 * b
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let cfg = SolverConfig::default();
    let mut cases = 0;
    for roots in tie_corpus() {
        let rm: Vec<(Complex64, usize)> = roots.iter().map(|&z| (z, 1)).collect();
        // Round the coefficients to doubles, as a user would supply them.
        let coeffs = from_c64_roots(&rm).to_c64();
        let p = Polynomial::from_c64(&coeffs, PREC).unwrap();
        for side in [SeriesKind::Taylor, SeriesKind::Laurent] {
            let tied = tied_orders(&roots, side);
            ensure(!tied.is_empty(), || {
                format!("{roots:?}: no tie on the {side} side")
            })?;
            for r in tied {
                let t = escalating_trace(&p, side, r, TIE_KMAX, &cfg)
                    .map_err(|e| format!("{roots:?}: {e}"))?;
                let v = classify(&t, &cfg).map_err(|e| format!("{roots:?} {side} r={r}: {e}"))?;
                ensure(v.status == VerdictStatus::Oscillating, || {
                    format!("{roots:?} {side} r={r}: {} (q={})", v.status, v.q_estimate)
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} tied orders, all oscillating"))
}

fn criterion_7() -> Outcome {
    let cfg = SolverConfig::default();
    for roots in multiple_corpus() {
        let p = from_c64_roots(&roots);
        let count = count_distinct_roots(&p, &cfg).map_err(|e| format!("{roots:?}: {e}"))?;
        ensure(count == roots.len(), || {
            format!("{roots:?}: counted {count}")
        })?;
        let zs: Vec<MpComplex> = roots.iter().map(|&(z, _)| mp(z)).collect();
        let m = multiplicities(&p, &zs).map_err(|e| format!("{roots:?}: {e}"))?;
        let want: Vec<usize> = roots.iter().map(|&(_, m)| m).collect();
        ensure(m == want, || format!("{roots:?}: multiplicities {m:?}"))?;
        ensure(m.iter().sum::<usize>() == p.degree(), || {
            format!("{roots:?}: sum")
        })?;
    }
    Ok("30 polynomials, counts and multiplicities exact".into())
}

fn criterion_8() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = 0.0f64;
    let mut shifted = 0;
    for (i, c) in disk_corpus().iter().enumerate() {
        let p = Polynomial::from_c64(c, PREC).unwrap();
        let set = solve(&p, &cfg).map_err(|e| format!("#{i}: {e}"))?;
        shifted += usize::from(set.shifts_used > 0);
        let mut ours = set.expanded();
        let theirs: Vec<Complex64> = independent_roots(&p)
            .map_err(|e| format!("#{i}: oracle {e}"))?
            .iter()
            .map(|z| z.to_c64())
            .collect();
        ensure(ours.len() == theirs.len(), || {
            format!("#{i}: {} vs {} roots", ours.len(), theirs.len())
        })?;
        for w in theirs {
            let (j, d) = ours
                .iter()
                .enumerate()
                .map(|(j, z)| (j, (z - w).norm() / w.norm().max(1.0)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            worst = worst.max(d);
            ensure(d <= ORACLE_TOL, || format!("#{i}: root {w} off by {d:e}"))?;
            ours.remove(j);
        }
    }
    Ok(format!(
        "100 polynomials ({shifted} needed shifts), worst distance {worst:e}"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let s = rng.random_range(1..=8);
        let args: Vec<MpComplex> = (0..s)
            .map(|_| {
                mp(Complex64::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ))
            })
            .collect();
        let sign = MpComplex::from_i64(reversal_sign(s), PREC);
        let v = vandermonde(&args);
        let e1 = rel(&(&sign * &vandermonde_inversed(&args)), &v);
        let recips: Vec<MpComplex> = args.iter().map(MpComplex::recip).collect();
        let prod = args.iter().fold(MpComplex::one(PREC), |a, z| &a * z);
        let rhs = &(&prod.powi(s as u64 - 1) * &sign) * &vandermonde(&recips);
        let e2 = rel(&rhs, &v);
        worst = worst.max(e1).max(e2);
        ensure(e1 < IDENTITY_TOL && e2 < IDENTITY_TOL, || {
            format!("s={s}: {e1:e}, {e2:e}")
        })?;
    }
    Ok(format!("200 tuples, worst relative error {worst:e}"))
}

fn plain(coeffs: &[Complex64]) -> String {
    format!(
        "{{\"coefficients\": [{}]}}",
        coeffs
            .iter()
            .map(|c| format!("[{:?},{:?}]", c.re, c.im))
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// Every polynomial used above, as CLI input.
fn full_corpus() -> Vec<String> {
    let mut out = vec!["1 0 -1".to_string(), "1 -3 2".to_string()];
    out.extend(
        integer_corpus()
            .iter()
            .map(|r| plain(&int_poly(r).to_c64())),
    );
    out.extend(tie_corpus().iter().map(|r| {
        let rm: Vec<_> = r.iter().map(|&z| (z, 1)).collect();
        plain(&from_c64_roots(&rm).to_c64())
    }));
    out.extend(
        multiple_corpus()
            .iter()
            .map(|r| plain(&from_c64_roots(r).to_c64())),
    );
    out.extend(disk_corpus().iter().map(|c| plain(c)));
    out
}

fn criterion_10() -> Outcome {
    let corpus = full_corpus();
    let mut ok = 0;
    for input in &corpus {
        let mut job = JobSpec::new(Command::Roots, input);
        job.exact = true;
        let a = run(&job, &mut std::io::empty());
        let b = run(&job, &mut std::io::empty());
        ensure(a == b, || format!("outputs differ for {input}"))?;
        ok += usize::from(a.code == 0);
    }
    // The binary itself, on a sample, through argv and stdin.
    let exe = env!("CARGO_BIN_EXE_hroots");
    for input in corpus.iter().step_by(25) {
        let once = || {
            let mut child = Process::new(exe)
                .args(["roots", "--exact", "--seed", "7"])
                .stdin(std::process::Stdio::piped())
                .stdout(std::process::Stdio::piped())
                .stderr(std::process::Stdio::piped())
                .spawn()
                .unwrap();
            use std::io::Write;
            child
                .stdin
                .take()
                .unwrap()
                .write_all(input.as_bytes())
                .unwrap();
            child.wait_with_output().unwrap()
        };
        let (a, b) = (once(), once());
        ensure(
            a.stdout == b.stdout && a.stderr == b.stderr && a.status == b.status,
            || format!("binary outputs differ for {input}"),
        )?;
    }
    Ok(format!(
        "{} inputs byte-identical across runs ({ok} solved)",
        corpus.len()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("worked example z^2 - 1", criterion_1),
        ("exact top ratio", criterion_2),
        ("closed-form determinants", criterion_3),
        ("geometric rate", criterion_4),
        ("error bound compliance", criterion_5),
        ("tie detection", criterion_6),
        ("multiplicity recovery", criterion_7),
        ("oracle equivalence", criterion_8),
        ("vandermonde identities", criterion_9),
        ("determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {id:>2} PASS {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2} FAIL {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
