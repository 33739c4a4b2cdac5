//! Products of extreme-modulus roots and the roots peeled off them.

use num_complex::Complex64;

use super::trace::{scheduled_trace, TraceBuilder, TraceVerdict};
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::series::SeriesKind;

/// `(r, verdict on Pi_r)` for `r = 1..=p`. Taylor products run over the `r`
/// smallest roots, Laurent ones over the `r` largest. The `r = p` entry is
/// the exact ratio at `k = 0`.
pub fn products_from_traces(
    p: &Polynomial,
    side: SeriesKind,
    count: usize,
    config: &SolverConfig,
) -> Result<Vec<(usize, TraceVerdict)>> {
    if count == 0 || count > p.degree() {
        return Err(Error::InvalidOrder);
    }
    let mut out = Vec::with_capacity(count);
    for r in 1..count {
        let (_, v) = scheduled_trace(p, side, r, config)?;
        out.push((r, v));
    }
    out.push((count, top_ratio(p, side, count, config)?));
    Ok(out)
}

/// `H_{0,p}/H_{1,p}` (Taylor) or `H_{1,p}/H_{0,p}` (Laurent), constant in `k`.
pub fn top_ratio(
    p: &Polynomial,
    side: SeriesKind,
    count: usize,
    config: &SolverConfig,
) -> Result<TraceVerdict> {
    let mut prec = p.precision().max(config.precision_bits);
    loop {
        let mut b = TraceBuilder::new(&p.with_precision(prec), side, count, config.retained_bits)?;
        match b.extend_to(0) {
            Ok(()) => {
                return match b.trace().points.first() {
                    Some(pt) => Ok(TraceVerdict::exact(pt.value)),
                    None => Err(Error::GapInProducts { r: count }),
                };
            }
            Err(Error::PrecisionExhausted { .. }) if 2 * prec <= config.max_precision_bits => {
                prec *= 2
            }
            Err(e) => return Err(e),
        }
    }
}

/// One root recovered as a quotient of consecutive products.
#[derive(Debug, Clone, PartialEq)]
pub struct RootEstimate {
    pub side: SeriesKind,
    /// 1-based rank by increasing modulus.
    pub position: usize,
    pub value: Complex64,
    /// Propagated from the two products' error estimates.
    pub error: f64,
    /// Both products converged (rather than only seeding).
    pub converged: bool,
}

fn quotient(
    side: SeriesKind,
    count: usize,
    r: usize,
    num: &TraceVerdict,
    den: Option<&TraceVerdict>,
) -> RootEstimate {
    let (dv, de, dconv) = den.map_or((Complex64::new(1.0, 0.0), 0.0, true), |d| {
        (d.limit, d.error_estimate, d.is_converged())
    });
    let value = num.limit / dv;
    let error = value.norm() * (num.error_estimate / num.limit.norm() + de / dv.norm());
    let position = match side {
        SeriesKind::Taylor => r,
        SeriesKind::Laurent => count - r + 1,
    };
    RootEstimate {
        side,
        position,
        value,
        error,
        converged: num.is_converged() && dconv,
    }
}

/// `z_r = Pi_r / Pi_(r-1)` with `Pi_0 = 1`, for consecutive converged
/// products; `GapInProducts` names the first order that did not converge.
pub fn roots_from_products(
    products: &[(usize, TraceVerdict)],
    side: SeriesKind,
) -> Result<Vec<RootEstimate>> {
    if let Some((r, _)) = products.iter().find(|(_, v)| !v.is_converged()) {
        return Err(Error::GapInProducts { r: *r });
    }
    Ok(usable_roots(products, side, 0.0))
}

/// Every quotient whose two products at least seed (see
/// [`TraceVerdict::is_seed`]), skipping the rest.
pub fn usable_roots(
    products: &[(usize, TraceVerdict)],
    side: SeriesKind,
    seed_tol: f64,
) -> Vec<RootEstimate> {
    let count = products.len();
    let mut out = Vec::new();
    for (i, (r, v)) in products.iter().enumerate() {
        let den = if i == 0 {
            None
        } else {
            Some(&products[i - 1].1)
        };
        if !v.is_seed(seed_tol) || den.is_some_and(|d| !d.is_seed(seed_tol)) {
            continue;
        }
        out.push(quotient(side, count, *r, v, den));
    }
    out
}

/// Per position, the estimate with the smaller error; Taylor wins ties.
pub fn merge_sides(taylor: &[RootEstimate], laurent: &[RootEstimate]) -> Vec<RootEstimate> {
    let mut out: Vec<RootEstimate> = taylor.to_vec();
    for l in laurent {
        match out.iter_mut().find(|t| t.position == l.position) {
            Some(t) => {
                if l.error < t.error {
                    *t = l.clone();
                }
            }
            None => out.push(l.clone()),
        }
    }
    out.sort_by_key(|e| e.position);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::MpComplex;

    const P: usize = 256;

    fn from_roots(r: &[i64]) -> Polynomial {
        let roots: Vec<(MpComplex, usize)> =
            r.iter().map(|&x| (MpComplex::from_i64(x, P), 1)).collect();
        Polynomial::from_roots(&roots, &MpComplex::one(P)).unwrap()
    }

    fn exact(x: f64) -> TraceVerdict {
        TraceVerdict::exact(Complex64::new(x, 0.0))
    }

    #[test]
    fn products_examples() {
        let cfg = SolverConfig::default();
        let p = from_roots(&[1, 2, 3]);
        let t = products_from_traces(&p, SeriesKind::Taylor, 3, &cfg).unwrap();
        let l = products_from_traces(&p, SeriesKind::Laurent, 3, &cfg).unwrap();
        for (got, want) in t
            .iter()
            .zip([1.0, 2.0, 6.0])
            .chain(l.iter().zip([3.0, 6.0, 6.0]))
        {
            assert!(got.1.is_converged(), "{got:?}");
            assert!((got.1.limit.re - want).abs() < 1e-10, "{got:?}");
        }
        assert_eq!(t[2].1.error_estimate, 0.0);
        assert_eq!(t[2].1.limit.re, 6.0);
    }

    #[test]
    fn products_with_tie_at_first_order() {
        // e^{+-i pi/3} and 2: r = 1 sits inside the tie.
        let cfg = SolverConfig::default();
        let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let p = Polynomial::from_c64(
            &[
                Complex64::new(1.0, 0.0),
                -(w + w.conj() + 2.0),
                w * w.conj() + 2.0 * (w + w.conj()),
                -(2.0 * w * w.conj()),
            ],
            P,
        )
        .unwrap();
        let t = products_from_traces(&p, SeriesKind::Taylor, 3, &cfg).unwrap();
        assert_eq!(t[0].1.status, super::super::VerdictStatus::Oscillating);
        assert!(t[1].1.is_converged());
        assert!((t[1].1.limit - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((t[2].1.limit - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quotient_examples() {
        let t = roots_from_products(
            &[(1, exact(1.0)), (2, exact(2.0)), (3, exact(6.0))],
            SeriesKind::Taylor,
        )
        .unwrap();
        assert_eq!(
            t.iter().map(|e| e.value.re).collect::<Vec<_>>(),
            [1.0, 2.0, 3.0]
        );
        assert_eq!(t.iter().map(|e| e.position).collect::<Vec<_>>(), [1, 2, 3]);
        let l = roots_from_products(
            &[(1, exact(3.0)), (2, exact(6.0)), (3, exact(6.0))],
            SeriesKind::Laurent,
        )
        .unwrap();
        assert_eq!(
            l.iter().map(|e| e.value.re).collect::<Vec<_>>(),
            [3.0, 2.0, 1.0]
        );
        assert_eq!(l.iter().map(|e| e.position).collect::<Vec<_>>(), [3, 2, 1]);
        let single = roots_from_products(&[(1, exact(2.0))], SeriesKind::Taylor).unwrap();
        assert_eq!(single[0].value.re, 2.0);
    }

    #[test]
    fn gap_in_products() {
        let mut osc = exact(1.0);
        osc.status = super::super::VerdictStatus::Oscillating;
        let prods = [(1, osc), (2, exact(2.0)), (3, exact(6.0))];
        assert_eq!(
            roots_from_products(&prods, SeriesKind::Taylor),
            Err(Error::GapInProducts { r: 1 })
        );
        let partial = usable_roots(&prods, SeriesKind::Taylor, 1e-4);
        assert_eq!(partial.len(), 1);
        assert_eq!(partial[0].position, 3);
        assert_eq!(partial[0].value.re, 3.0);
    }

    #[test]
    fn merge_prefers_smaller_error() {
        let mk = |side, position, error| RootEstimate {
            side,
            position,
            value: Complex64::new(position as f64, 0.0),
            error,
            converged: true,
        };
        let t = [
            mk(SeriesKind::Taylor, 1, 1e-3),
            mk(SeriesKind::Taylor, 2, 1e-9),
        ];
        let l = [
            mk(SeriesKind::Laurent, 1, 1e-3),
            mk(SeriesKind::Laurent, 2, 1e-12),
            mk(SeriesKind::Laurent, 3, 0.0),
        ];
        let m = merge_sides(&t, &l);
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].side, SeriesKind::Taylor);
        assert_eq!(m[1].side, SeriesKind::Laurent);
        assert_eq!(m[2].position, 3);
    }
}
