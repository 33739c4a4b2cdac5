//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Each export takes the coefficients as text (descending, separated by
//! whitespace or commas, complex values written `1+2i`) and returns JSON.
//! Errors come back as a thrown string.

use hroots::engine::{classify, escalating_trace, TraceVerdict};
use hroots::hankel::hadamard_det_guarded;
use hroots::series::CoefficientStream;
use hroots::{solve, Polynomial, SeriesKind, SolverConfig};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Upper limit on `k` so a browser tab stays responsive.
const K_LIMIT: usize = 200;

pub fn parse_coeffs(text: &str, precision: usize) -> Result<Polynomial, String> {
    let coeffs = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<Complex64>()
                .map_err(|_| format!("not a number: {t}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err("coefficients must be finite".into());
    }
    Polynomial::from_c64(&coeffs, precision).map_err(|e| e.to_string())
}

fn parse_side(side: &str) -> Result<SeriesKind, String> {
    side.parse().map_err(|_| format!("unknown side {side:?}"))
}

fn config(precision: usize) -> SolverConfig {
    SolverConfig {
        precision_bits: precision.max(64),
        ..SolverConfig::default()
    }
}

#[derive(Serialize)]
struct Root {
    re: f64,
    im: f64,
    multiplicity: usize,
    residual: f64,
}

#[derive(Serialize)]
struct Roots {
    roots: Vec<Root>,
    zero_multiplicity: usize,
    shifts_used: usize,
}

pub fn roots_json(coeffs: &str, precision: usize) -> Result<String, String> {
    let cfg = config(precision);
    let p = parse_coeffs(coeffs, cfg.precision_bits)?;
    let set = solve(&p, &cfg).map_err(|e| e.to_string())?;
    let out = Roots {
        roots: set
            .entries
            .iter()
            .map(|e| {
                let z = e.root.to_c64();
                Root {
                    re: z.re,
                    im: z.im,
                    multiplicity: e.multiplicity,
                    residual: e.residual,
                }
            })
            .collect(),
        zero_multiplicity: set.zero_multiplicity,
        shifts_used: set.shifts_used,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Point {
    k: usize,
    re: f64,
    im: f64,
    diff: Option<f64>,
}

#[derive(Serialize)]
struct Trace {
    points: Vec<Point>,
    gaps: Vec<usize>,
    status: String,
    limit: [f64; 2],
    q: f64,
    error: f64,
}

pub fn trace_json(coeffs: &str, side: &str, r: usize, k_max: usize) -> Result<String, String> {
    let cfg = SolverConfig {
        k_max: k_max.clamp(SolverConfig::default().window + 2, K_LIMIT),
        ..config(256)
    };
    let p = parse_coeffs(coeffs, cfg.precision_bits)?;
    let t =
        escalating_trace(&p, parse_side(side)?, r, cfg.k_max, &cfg).map_err(|e| e.to_string())?;
    let v: TraceVerdict = classify(&t, &cfg).map_err(|e| e.to_string())?;
    let out = Trace {
        points: t
            .points
            .iter()
            .map(|pt| Point {
                k: pt.k,
                re: pt.value.re,
                im: pt.value.im,
                diff: pt.diff,
            })
            .collect(),
        gaps: t.gaps.clone(),
        status: v.status.to_string(),
        limit: [v.limit.re, v.limit.im],
        // JSON has no infinities.
        q: if v.q_estimate.is_finite() {
            v.q_estimate
        } else {
            -1.0
        },
        error: if v.error_estimate.is_finite() {
            v.error_estimate
        } else {
            -1.0
        },
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Det {
    k: usize,
    log2_abs: f64,
    cancellation_bits: f64,
}

pub fn dets_json(coeffs: &str, side: &str, r: usize, k_max: usize) -> Result<String, String> {
    if r == 0 {
        return Err("order must be at least 1".into());
    }
    let k_max = k_max.min(K_LIMIT);
    let p = parse_coeffs(coeffs, 256)?;
    let mut s = CoefficientStream::new(&p, parse_side(side)?).map_err(|e| e.to_string())?;
    s.extend_to(k_max + 2 * r);
    let rows = (0..=k_max)
        .map(|k| {
            hadamard_det_guarded(&s, k, r, 0).map(|c| Det {
                k,
                log2_abs: if c.value.is_zero() {
                    f64::MIN
                } else {
                    c.value.log2_abs()
                },
                cancellation_bits: c.cancellation_margin.min(f64::MAX),
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn roots(coeffs: &str, precision: usize) -> Result<String, JsValue> {
    roots_json(coeffs, precision).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn trace(coeffs: &str, side: &str, r: usize, k_max: usize) -> Result<String, JsValue> {
    trace_json(coeffs, side, r, k_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn dets(coeffs: &str, side: &str, r: usize, k_max: usize) -> Result<String, JsValue> {
    dets_json(coeffs, side, r, k_max).map_err(|e| JsValue::from_str(&e))
}
