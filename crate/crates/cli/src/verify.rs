//! `verify`: solver output checked against the oracle's independent roots
//! and the closed-form determinants.

use hroots::hankel::hadamard_det;
use hroots::oracle::{cluster_roots, hadamard_via_roots, independent_roots};
use hroots::series::CoefficientStream;
use hroots::{solve, Polynomial, SeriesKind, SolverConfig};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        pass,
        detail: detail.into(),
    }
}

/// Relative agreement required between solver and oracle roots.
const ROOT_AGREEMENT: f64 = 1e-8;
/// Relative agreement required for `H_{k,r}` against its closed form.
const CLOSED_FORM_AGREEMENT: f64 = 1e-8;

pub fn verify(p: &Polynomial, config: &SolverConfig) -> Vec<Check> {
    let set = match solve(p, config) {
        Ok(s) => s,
        Err(e) => return vec![check("solve", false, e.to_string())],
    };
    let mut out = vec![check(
        "solve",
        true,
        format!("{} distinct roots", set.distinct_count()),
    )];

    let total = set.total_multiplicity();
    out.push(check(
        "degree",
        total == p.degree(),
        format!("multiplicities sum to {total}, degree {}", p.degree()),
    ));

    let worst = set.entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    out.push(check(
        "residuals",
        worst <= config.residual_tol,
        format!("largest scaled residual {worst:e}"),
    ));

    let (q, zeros) = p.strip_zero_roots();
    let q = q.with_precision(config.precision_bits.max(p.precision()));
    if q.degree() == 0 {
        out.push(check(
            "oracle_roots",
            zeros == set.zero_multiplicity,
            "only roots at the origin",
        ));
        return out;
    }
    out.push(match independent_roots(&q) {
        Err(e) => check("oracle_roots", false, e.to_string()),
        Ok(dk) => {
            let clusters = cluster_roots(&dk, 1e-6);
            let mut worst = 0.0f64;
            let mut matched = clusters.len() == set.entries.len();
            for (c, m) in &clusters {
                let cz = c.to_c64();
                match set
                    .entries
                    .iter()
                    .map(|e| (e, (e.root.to_c64() - cz).norm() / cz.norm().max(1.0)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                {
                    Some((e, d)) => {
                        worst = worst.max(d);
                        matched &= e.multiplicity == *m;
                    }
                    None => matched = false,
                }
            }
            // Clusters of multiplicity m only pin the root to about eps^(1/m).
            check(
                "oracle_roots",
                matched && worst <= ROOT_AGREEMENT.powf(1.0 / max_mult(&clusters) as f64),
                format!(
                    "{} clusters, largest relative distance {worst:e}",
                    clusters.len()
                ),
            )
        }
    });

    let roots: Vec<_> = set.entries.iter().map(|e| e.root.clone()).collect();
    let mults: Vec<usize> = set.entries.iter().map(|e| e.multiplicity).collect();
    let mut worst = 0.0f64;
    let mut failure = None;
    'sides: for side in [SeriesKind::Taylor, SeriesKind::Laurent] {
        let mut s = match CoefficientStream::new(&q, side) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        for r in 1..=roots.len().min(3) {
            s.extend_to(4 + 2 * r);
            for k in 0..4 {
                let cell = match hadamard_det(&s, k, r) {
                    Ok(c) => c,
                    Err(e) => {
                        failure = Some(e.to_string());
                        break 'sides;
                    }
                };
                let got = cell.value.to_mp();
                let want = hadamard_via_roots(&roots, &mults, k, r, side);
                let d = (&got - &want).abs_f64() / want.abs_f64().max(f64::MIN_POSITIVE);
                worst = worst.max(d);
            }
        }
    }
    out.push(match failure {
        Some(m) => check("closed_form", false, m),
        None => check(
            "closed_form",
            worst <= CLOSED_FORM_AGREEMENT,
            format!("largest relative deviation {worst:e}"),
        ),
    });
    out
}

fn max_mult(c: &[(hroots::MpComplex, usize)]) -> usize {
    c.iter().map(|(_, m)| *m).max().unwrap_or(1)
}
