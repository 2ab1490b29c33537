//! Grid search for revival times, for pairs where no congruence solution is
//! available (e.g. parallel but not cospectral vertices).
//!
//! The objective is the norm of `U(t) e_a` outside `{a, b}` (or outside `a`
//! and its largest other entry when `b` is free). It is computed from the
//! small entries directly, so it is V-shaped at a zero and golden-section
//! search pins the time down to rounding level.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{
    certificate_from_column, oracle_check, ColumnBasis, DetectionConfig, FrCertificate, Method,
    TransportKind, WalkError,
};
use crate::exec::par_map;
use crate::graph::Vertex;
use crate::spectral::{SpectralDecomposition, SpectralError};

/// Grid values above this are never refined.
const CANDIDATE_CEILING: f64 = 0.5;
/// Refined times closer than this count as one event.
const MERGE_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn off_pair(col: &DVector<Complex64>, a: Vertex, b: Option<Vertex>) -> f64 {
    let b = b.unwrap_or_else(|| {
        col.iter()
            .enumerate()
            .filter(|&(v, _)| v != a)
            .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
            .map_or(a, |(v, _)| v)
    });
    col.iter()
        .enumerate()
        .filter(|&(v, _)| v != a && v != b)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Revival and state-transfer certificates from `a` (to `b` if given) over
/// `(0, t_max]`, sorted by time. Periodic events are dropped.
pub fn scan_fr(
    dec: &SpectralDecomposition,
    a: Vertex,
    b: Option<Vertex>,
    cfg: &DetectionConfig,
) -> Result<Vec<FrCertificate>, WalkError> {
    cfg.validate()?;
    let n = dec.order();
    for v in std::iter::once(a).chain(b) {
        if v >= n {
            return Err(SpectralError::UnknownVertex(v, n).into());
        }
    }
    if b == Some(a) {
        return Err(SpectralError::SameVertex(a).into());
    }
    let basis = ColumnBasis::new(dec, a);
    let objective = |t: f64| off_pair(&basis.column(t), a, b);
    let step = cfg.t_max / cfg.grid_points as f64;
    let times: Vec<f64> = (0..=cfg.grid_points).map(|i| i as f64 * step).collect();
    let values = par_map(cfg.execution, &times, |&t| objective(t));

    let mut starts = Vec::new();
    let mut prev_candidate = false;
    for i in 1..cfg.grid_points {
        let is_min = values[i] < CANDIDATE_CEILING
            && values[i] <= values[i - 1]
            && values[i] <= values[i + 1];
        if is_min && !prev_candidate {
            starts.push(i);
        }
        prev_candidate = is_min;
    }
    if values[cfg.grid_points] < CANDIDATE_CEILING
        && values[cfg.grid_points] <= values[cfg.grid_points - 1]
        && !prev_candidate
    {
        starts.push(cfg.grid_points);
    }

    let refined = par_map(cfg.execution, &starts, |&i| {
        let lo = times[i - 1];
        let hi = times.get(i + 1).copied().unwrap_or(cfg.t_max);
        let t = golden_section(objective, lo, hi, cfg.refine_iters);
        // a flat run (e.g. no vertices outside the pair) keeps the grid point
        if objective(times[i]) <= objective(t) {
            times[i]
        } else {
            t
        }
    });

    let mut out: Vec<FrCertificate> = Vec::new();
    for t in refined {
        let col = basis.column(t);
        let Some(mut cert) = certificate_from_column(dec, &col, a, t, Method::GridScan, cfg) else {
            continue;
        };
        if cert.kind == TransportKind::Periodic || b.is_some_and(|b| b != cert.b) {
            continue;
        }
        if out.iter().any(|c| c.b == cert.b && (c.tau - cert.tau).abs() < MERGE_TOL) {
            continue;
        }
        oracle_check(dec, &cert)?;
        cert.method = Method::GridScan;
        out.push(cert);
    }
    out.sort_by(|x, y| x.tau.total_cmp(&y.tau).then(x.b.cmp(&y.b)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::graph::{path, weighted_path};
    use std::f64::consts::PI;

    fn dec(g: &crate::graph::WeightedGraph) -> SpectralDecomposition {
        SpectralDecomposition::of_graph(g).unwrap()
    }

    #[test]
    fn weighted_p3_balanced() {
        let w = 2f64.sqrt() - 1.0;
        let d = dec(&weighted_path(&[w, 1.0]).unwrap());
        let certs = scan_fr(&d, 0, Some(2), &DetectionConfig::default()).unwrap();
        let tau = PI / (w * w + 1.0).sqrt();
        let c = &certs[0];
        assert!((c.tau - tau).abs() < 1e-7, "{} vs {tau}", c.tau);
        assert_eq!(c.kind, TransportKind::BalancedFr);
        assert!((c.alpha.norm() - c.beta.norm()).abs() < 1e-9);
        assert!(c.gamma.is_none());
    }

    #[test]
    fn p5_has_nothing() {
        let d = dec(&path(5).unwrap());
        let cfg = DetectionConfig { t_max: 100.0, ..Default::default() };
        for a in 0..5 {
            assert!(scan_fr(&d, a, None, &cfg).unwrap().is_empty(), "vertex {a}");
        }
    }

    #[test]
    fn p2_revives_immediately() {
        let d = dec(&path(2).unwrap());
        let certs = scan_fr(&d, 0, None, &DetectionConfig::default()).unwrap();
        assert_eq!(certs.len(), 1);
        assert_eq!(certs[0].b, 1);
        assert!(certs[0].kind.is_revival());
    }

    #[test]
    fn strategies_agree() {
        let d = dec(&path(4).unwrap());
        let seq = DetectionConfig { execution: Execution::Sequential, ..Default::default() };
        let par = DetectionConfig::default();
        assert_eq!(scan_fr(&d, 0, None, &seq).unwrap(), scan_fr(&d, 0, None, &par).unwrap());
    }
}
