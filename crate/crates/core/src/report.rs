//! Machine-readable run reports and the analysis pipelines behind them.
//!
//! Floats are rounded to 12 significant digits when a report is built, so
//! emitting and re-parsing a report gives back an identical value.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exec::par_map;
use crate::graph::{
    coarsest_equitable_refinement, quotient, EquitablePartition, GraphError, Vertex, WeightedGraph,
};
use crate::number::{ClassKind, ClassifyError};
use crate::spectral::{SpectralDecomposition, TOL_SPEC};
use crate::walk::{
    certify_pair, scan_fr, transition_column, verify_quotient_transport, DetectionConfig,
    FrCertificate, Method, TransportKind, WalkError,
};

/// Significant digits kept in reports.
pub const REPORT_DIGITS: usize = 12;
/// Revalidation never demands a residual below this.
pub const REVALIDATION_FLOOR: f64 = 1e-10;

/// Rounds to [`REPORT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", REPORT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// A certificate in the report's external form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub graph: String,
    pub a: Vertex,
    pub b: Vertex,
    pub tau: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: Option<f64>,
    pub zeta: Option<f64>,
    pub kind: TransportKind,
    pub residual: f64,
    pub method: Method,
}

impl CertificateRecord {
    pub fn new(graph: &str, c: &FrCertificate) -> Self {
        let pair = |z: Complex64| [round_sig(z.re), round_sig(z.im)];
        Self {
            graph: graph.to_string(),
            a: c.a,
            b: c.b,
            tau: round_sig(c.tau),
            alpha: pair(c.alpha),
            beta: pair(c.beta),
            gamma: c.gamma.map(round_sig),
            zeta: c.zeta.map(round_sig),
            kind: c.kind,
            residual: round_sig(c.residual),
            method: c.method,
        }
    }

    pub fn to_certificate(&self) -> FrCertificate {
        FrCertificate {
            a: self.a,
            b: self.b,
            tau: self.tau,
            alpha: Complex64::new(self.alpha[0], self.alpha[1]),
            beta: Complex64::new(self.beta[0], self.beta[1]),
            gamma: self.gamma,
            zeta: self.zeta,
            kind: self.kind,
            residual: self.residual,
            method: self.method,
        }
    }

    /// Recomputes the off-pair residual at the stored time and compares the
    /// amplitudes. Returns the recomputed residual when the record holds up.
    pub fn revalidate(&self, dec: &SpectralDecomposition, tol_walk: f64) -> Result<f64, String> {
        let n = dec.order();
        if self.a >= n || self.b >= n {
            return Err(format!("vertex out of range for a graph on {n} vertices"));
        }
        let col = transition_column(dec, self.a, self.tau);
        let residual = col
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != self.a && v != self.b)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let c = self.to_certificate();
        let amp = if self.a == self.b {
            (col[self.a] - c.alpha).norm()
        } else {
            (col[self.a] - c.alpha).norm().max((col[self.b] - c.beta).norm())
        };
        let bound = 2.0 * self.residual.max(REVALIDATION_FLOOR);
        if residual > bound {
            return Err(format!("residual {residual:e} exceeds {bound:e}"));
        }
        if amp > tol_walk {
            return Err(format!("amplitudes moved by {amp:e}"));
        }
        Ok(residual)
    }
}

/// A named check with an optional residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub holds: bool,
    pub residual: Option<f64>,
    pub detail: Option<String>,
}

impl Predicate {
    pub fn new(holds: bool, residual: Option<f64>, detail: Option<String>) -> Self {
        Self { holds, residual: residual.map(round_sig), detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input_spec: String,
    pub config: DetectionConfig,
    pub certificates: Vec<CertificateRecord>,
    pub predicates: BTreeMap<String, Predicate>,
    /// Milliseconds per phase.
    pub timing: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite values")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Every certificate recorded against `graph_name` re-validates on `graph`.
    pub fn revalidate(&self, graph_name: &str, graph: &WeightedGraph) -> Result<(), String> {
        let dec = SpectralDecomposition::of_graph(graph).map_err(|e| e.to_string())?;
        for (i, c) in self.certificates.iter().enumerate() {
            if c.graph == graph_name {
                c.revalidate(&dec, self.config.tol_walk)
                    .map_err(|e| format!("certificate {i} ({} -> {} at {}): {e}", c.a, c.b, c.tau))?;
            }
        }
        Ok(())
    }

    /// Names of failing predicates.
    pub fn failures(&self) -> Vec<&str> {
        self.predicates
            .iter()
            .filter(|(_, p)| !p.holds)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    fn time(&mut self, phase: &str, start: Instant) {
        self.timing.insert(phase.into(), round_sig(start.elapsed().as_secs_f64() * 1e3));
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Also grid-scan every source vertex.
    pub scan: bool,
    /// Only pairs containing this vertex.
    pub from: Option<Vertex>,
}

/// Keeps the earliest revival and earliest state transfer per unordered pair.
fn earliest_per_pair(mut certs: Vec<FrCertificate>) -> Vec<FrCertificate> {
    certs.sort_by(|x, y| {
        (x.a.min(x.b), x.a.max(x.b)).cmp(&(y.a.min(y.b), y.a.max(y.b))).then(x.tau.total_cmp(&y.tau))
    });
    let mut out: Vec<FrCertificate> = Vec::new();
    for c in certs {
        let key = (c.a.min(c.b), c.a.max(c.b));
        let pst = c.kind == TransportKind::PerfectStateTransfer;
        if out.iter().any(|o| {
            (o.a.min(o.b), o.a.max(o.b)) == key && (o.kind == TransportKind::PerfectStateTransfer) == pst
        }) {
            continue;
        }
        out.push(c);
    }
    out
}

fn spectral_predicates(report: &mut RunReport, dec: &SpectralDecomposition) {
    let res = dec.residuals().max();
    report.predicates.insert(
        "spectral.projector_residuals".into(),
        Predicate::new(res < TOL_SPEC, Some(res), None),
    );
    report.predicates.insert(
        "spectral.unambiguous_grouping".into(),
        Predicate::new(
            !dec.is_ambiguous(),
            None,
            Some(format!("{} distinct eigenvalues", dec.eigenvalues().len())),
        ),
    );
}

/// Decompose, profile all pairs, classify and certify the strongly
/// cospectral ones, optionally scan, and collect everything in a report.
pub fn analyze(
    spec: &str,
    graph: &WeightedGraph,
    cfg: &DetectionConfig,
    opts: AnalyzeOptions,
) -> Result<RunReport, WalkError> {
    cfg.validate()?;
    let n = graph.order();
    if let Some(v) = opts.from.filter(|&v| v >= n) {
        return Err(GraphError::UnknownVertex(v.to_string()).into());
    }
    let mut report = RunReport {
        input_spec: spec.to_string(),
        config: *cfg,
        certificates: Vec::new(),
        predicates: BTreeMap::new(),
        timing: BTreeMap::new(),
    };
    let total = Instant::now();

    let start = Instant::now();
    let dec = SpectralDecomposition::of_graph(graph)?;
    report.time("decompose", start);
    spectral_predicates(&mut report, &dec);

    let start = Instant::now();
    let pairs: Vec<(Vertex, Vertex)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| opts.from.is_none_or(|v| v == a || v == b))
        .map(|(a, b)| if opts.from == Some(b) { (b, a) } else { (a, b) })
        .collect();
    let analyses = par_map(cfg.execution, &pairs, |&(a, b)| certify_pair(&dec, a, b, cfg));
    let mut certs = Vec::new();
    for ((a, b), pa) in pairs.iter().zip(analyses) {
        let pa = pa?;
        if let Some(cls) = &pa.classification {
            report
                .predicates
                .insert(format!("pair.{a}-{b}.classification"), classification_predicate(cls));
        }
        certs.extend(pa.certificates);
    }
    report.time("certify", start);

    if opts.scan {
        let start = Instant::now();
        let sources: Vec<Vertex> = match opts.from {
            Some(v) => vec![v],
            None => (0..n).collect(),
        };
        let scanned = par_map(cfg.execution, &sources, |&a| scan_fr(&dec, a, None, cfg));
        for s in scanned {
            // one orientation per pair unless a source vertex was fixed
            certs.extend(s?.into_iter().filter(|c| opts.from.is_some() || c.a < c.b));
        }
        report.time("scan", start);
    }

    let mut certs = earliest_per_pair(certs);
    certs.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)).then(x.tau.total_cmp(&y.tau)));
    report.certificates = certs.iter().map(|c| CertificateRecord::new(spec, c)).collect();
    report.time("total", total);
    Ok(report)
}

fn classification_predicate(cls: &Result<crate::number::EigenvalueClassification, ClassifyError>) -> Predicate {
    match cls {
        Ok(c) => {
            let detail = match c.kind {
                ClassKind::AllInteger => format!("all integer, g = {}", c.g()),
                ClassKind::Quadratic => format!("quadratic, Δ = {}, g = {}", c.delta, c.g()),
            };
            Predicate::new(true, Some(c.residual), Some(detail))
        }
        Err(e) => Predicate::new(false, None, Some(e.to_string())),
    }
}

/// Result of [`analyze_quotient`].
#[derive(Debug, Clone)]
pub struct QuotientRun {
    pub partition: EquitablePartition,
    pub quotient: WeightedGraph,
    pub report: RunReport,
}

/// Name under which quotient certificates are recorded.
pub const QUOTIENT_GRAPH: &str = "quotient";

/// Pins become singleton cells, the rest starts as one cell; the coarsest
/// equitable refinement is quotiented, transport is checked between the
/// first two pins, and the quotient is analyzed.
pub fn analyze_quotient(
    spec: &str,
    graph: &WeightedGraph,
    pins: &[Vertex],
    cfg: &DetectionConfig,
) -> Result<QuotientRun, WalkError> {
    cfg.validate()?;
    let n = graph.order();
    let mut cells: Vec<Vec<Vertex>> = Vec::new();
    for &p in pins {
        if p >= n {
            return Err(GraphError::UnknownVertex(p.to_string()).into());
        }
        if !cells.iter().any(|c| c[0] == p) {
            cells.push(vec![p]);
        }
    }
    let rest: Vec<Vertex> = (0..n).filter(|v| !pins.contains(v)).collect();
    if !rest.is_empty() {
        cells.push(rest);
    }
    let start = Instant::now();
    let partition = coarsest_equitable_refinement(graph, &cells)?;
    let q = quotient(graph, &partition)?;
    let refine_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut report = analyze(spec, &q, cfg, AnalyzeOptions::default())?;
    for c in &mut report.certificates {
        c.graph = QUOTIENT_GRAPH.into();
    }
    report.input_spec = format!(
        "{spec} --pin {}",
        pins.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" --pin ")
    );
    report.timing.insert("refine".into(), round_sig(refine_ms));
    report.predicates.insert(
        "quotient.cells".into(),
        Predicate::new(
            true,
            None,
            Some(format!("{} cells, sizes {:?}", partition.len(), partition.shape())),
        ),
    );
    let m = q.weights();
    let rows: Vec<String> = (0..m.nrows())
        .map(|r| {
            let row: Vec<String> = (0..m.ncols()).map(|c| round_sig(m[(r, c)]).to_string()).collect();
            format!("[{}]", row.join(", "))
        })
        .collect();
    report.predicates.insert(
        "quotient.matrix".into(),
        Predicate::new(true, None, Some(format!("[{}]", rows.join(", ")))),
    );
    for (i, &p) in pins.iter().enumerate() {
        report.predicates.insert(
            format!("quotient.pin{i}.singleton"),
            Predicate::new(partition.is_singleton(p), None, None),
        );
    }
    if let [a, b, ..] = *pins {
        if a != b {
            let start = Instant::now();
            let tr = verify_quotient_transport(graph, &partition, a, b, cfg)?;
            report.time("transport", start);
            report.predicates.insert(
                "quotient.transport".into(),
                Predicate::new(
                    tr.transport_ok,
                    Some(tr.max_deviation),
                    Some(format!("{} sample times", tr.samples)),
                ),
            );
            report.predicates.insert(
                "quotient.revival_correspondence".into(),
                Predicate::new(
                    tr.corollary_ok,
                    None,
                    Some(format!(
                        "{} graph / {} quotient certificates",
                        tr.graph_certificates.len(),
                        tr.quotient_certificates.len()
                    )),
                ),
            );
            report
                .certificates
                .extend(tr.graph_certificates.iter().map(|c| CertificateRecord::new(spec, c)));
        }
    }
    Ok(QuotientRun { partition, quotient: q, report })
}

/// Quotient weights rounded for display and comparison.
pub fn rounded_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(round_sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cocktail_party, cycle, double_cone, path};

    #[test]
    fn round_sig_keeps_twelve_digits() {
        assert_eq!(round_sig(2.0943951023931953), 2.09439510239);
        assert_eq!(round_sig(-1.0e-17), -1.0e-17);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn c6_antipodal_pairs() {
        let g = cycle(6).unwrap();
        let r = analyze("cycle:6", &g, &DetectionConfig::default(), AnalyzeOptions::default()).unwrap();
        assert_eq!(r.certificates.len(), 3);
        for c in &r.certificates {
            assert_eq!(c.b, c.a + 3);
            assert!((c.tau - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
        }
        let from0 = AnalyzeOptions { scan: false, from: Some(0) };
        let r = analyze("cycle:6", &g, &DetectionConfig::default(), from0).unwrap();
        assert_eq!(r.certificates.len(), 1);
        assert!(r.failures().is_empty());
    }

    #[test]
    fn json_round_trip_and_revalidation() {
        let g = path(4).unwrap();
        let opts = AnalyzeOptions { scan: true, from: None };
        let r = analyze("path:4", &g, &DetectionConfig::default(), opts).unwrap();
        assert!(!r.certificates.is_empty());
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        back.revalidate("path:4", &g).unwrap();
    }

    #[test]
    fn tampered_certificate_fails_revalidation() {
        let g = path(4).unwrap();
        let mut r = analyze("path:4", &g, &DetectionConfig::default(), AnalyzeOptions::default()).unwrap();
        r.certificates[0].tau += 1e-3;
        assert!(r.revalidate("path:4", &g).is_err());
    }

    #[test]
    fn cone_quotient() {
        let g = double_cone(&cycle(4).unwrap());
        let last = g.order() - 1;
        let run = analyze_quotient("cone2:cycle:4", &g, &[0, last], &DetectionConfig::default()).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 2.0, 2.0, 2.0, 0.0, 2.0, 0.0]);
        assert!((run.quotient.weights() - expected).amax() < 1e-12);
        assert!(run.report.failures().is_empty(), "{:?}", run.report.failures());
        assert!(run.report.certificates.iter().any(|c| c.graph == QUOTIENT_GRAPH));
    }

    #[test]
    fn cocktail_quotient_has_revival() {
        let g = cocktail_party(3).unwrap();
        let run = analyze_quotient("cocktail:3", &g, &[0, 1], &DetectionConfig::default()).unwrap();
        assert_eq!(run.quotient.order(), 3);
        assert!(run
            .report
            .certificates
            .iter()
            .any(|c| c.graph == QUOTIENT_GRAPH && c.kind.is_revival()));
    }
}
