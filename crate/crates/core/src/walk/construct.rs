//! Checks for the constructions that produce revival: periodic × uniform
//! mixing products, overlays with a commuting matching, the two-layer
//! `X_θ` graphs, equitable quotients, and the bipartite dichotomy.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{
    certify_pair, check_periodic, check_pst, check_uniform_mixing, detect_at, scan_fr,
    transition_column, DetectionConfig, FrCertificate, Method, WalkError,
};
use crate::graph::{
    cartesian_product, quotient, union_overlay, x_theta, EquitablePartition, Vertex, WeightedGraph,
};
use crate::spectral::SpectralDecomposition;

/// Walk entries between singleton cells are compared at this many times.
pub const QUOTIENT_SAMPLES: usize = 200;
/// The sampled interval is `(0, QUOTIENT_T_MAX]`.
pub const QUOTIENT_T_MAX: f64 = 10.0;

fn is_k2(y: &WeightedGraph) -> bool {
    y.order() == 2 && y.weight(0, 1) == 1.0 && y.weight(0, 0) == 0.0 && y.weight(1, 1) == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IumReport {
    pub x_periodic: bool,
    pub y_uniform_mixing: bool,
    /// `Y = K_2` with `0 < τ < π/2`, which needs no uniform mixing.
    pub bunkbed: bool,
    pub skipped: Option<String>,
    /// Size of the revival group `{(a, v) : v ∈ Y}`.
    pub group_size: usize,
    /// Largest mass of `U(τ) e_(a,u)` outside the group, over all `u`.
    pub max_leak: f64,
    /// Smallest amplitude inside the group, over all `u`.
    pub min_amplitude: f64,
    /// Plain revival certificate from `(a, 0)` when `|Y| = 2`.
    pub certificate: Option<FrCertificate>,
    pub holds: bool,
}

/// `X` periodic at `a` and `Y` uniformly mixing at `τ` give generalized
/// revival in `X □ Y` among the copies of `a`.
pub fn verify_construction_ium(
    x: &WeightedGraph,
    y: &WeightedGraph,
    a: Vertex,
    tau: f64,
    cfg: &DetectionConfig,
) -> Result<IumReport, WalkError> {
    let dx = SpectralDecomposition::of_graph(x)?;
    let dy = SpectralDecomposition::of_graph(y)?;
    let x_periodic = check_periodic(&dx, a, tau, cfg);
    let y_uniform_mixing = check_uniform_mixing(&dy, tau, cfg);
    let bunkbed = is_k2(y) && tau > 0.0 && tau < PI / 2.0;
    let mut report = IumReport {
        x_periodic,
        y_uniform_mixing,
        bunkbed,
        skipped: None,
        group_size: y.order(),
        max_leak: f64::NAN,
        min_amplitude: f64::NAN,
        certificate: None,
        holds: false,
    };
    if !x_periodic || !(y_uniform_mixing || bunkbed) {
        report.skipped = Some(format!(
            "preconditions: X periodic at {a}: {x_periodic}, Y uniform mixing: {y_uniform_mixing}, bunkbed: {bunkbed}"
        ));
        return Ok(report);
    }
    let prod = cartesian_product(x, y);
    let dp = SpectralDecomposition::of_graph(&prod)?;
    let ny = y.order();
    let group: Vec<Vertex> = (0..ny).map(|v| a * ny + v).collect();
    let (mut leak, mut floor) = (0.0f64, f64::INFINITY);
    for &src in &group {
        let col = transition_column(&dp, src, tau);
        let outside = col
            .iter()
            .enumerate()
            .filter(|(v, _)| !group.contains(v))
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        leak = leak.max(outside);
        floor = group.iter().map(|&v| col[v].norm()).fold(floor, f64::min);
    }
    report.max_leak = leak;
    report.min_amplitude = floor;
    if ny == 2 {
        report.certificate = detect_at(&dp, group[0], tau, cfg)?.map(|mut c| {
            c.method = Method::Construction;
            c
        });
    }
    report.holds = leak <= cfg.tol_walk
        && floor > cfg.beta_min
        && (ny != 2 || report.certificate.as_ref().is_some_and(|c| c.b == group[1]));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnionReport {
    /// `max |A(X)A(Y) − A(Y)A(X)|`.
    pub commutator: f64,
    pub commute: bool,
    pub isolated_edge: bool,
    pub tau_in_range: bool,
    pub pst_on_x: bool,
    /// `U_X(τ)_{b,a}`.
    pub lambda: Complex64,
    pub expected_alpha: Complex64,
    pub expected_beta: Complex64,
    pub certificate: Option<FrCertificate>,
    pub amplitude_error: f64,
    pub holds: bool,
}

/// PST on `X` at `τ < π/2` plus an isolated edge `ab` of a commuting `Y`
/// gives revival on `X ∪ Y` with `U(τ) e_a = λ(cos(wτ) e_b − i sin(wτ) e_a)`.
pub fn verify_construction_union(
    x: &WeightedGraph,
    y: &WeightedGraph,
    a: Vertex,
    b: Vertex,
    tau: f64,
    cfg: &DetectionConfig,
) -> Result<UnionReport, WalkError> {
    let overlay = union_overlay(x, y)?;
    let (ax, ay) = (x.weights(), y.weights());
    let commutator = (ax * ay - ay * ax).amax();
    let w = y.weight(a, b);
    let isolated_edge = a != b
        && w > 0.0
        && y.neighbors(a).all(|(v, _)| v == b)
        && y.neighbors(b).all(|(v, _)| v == a);
    let dx = SpectralDecomposition::of_graph(x)?;
    let lambda = transition_column(&dx, a, tau)[b];
    let pst_on_x = check_pst(&dx, a, b, tau, cfg);
    let tau_in_range = tau > 0.0 && tau < PI / 2.0;
    let expected_alpha = -Complex64::i() * lambda * (w * tau).sin();
    let expected_beta = lambda * (w * tau).cos();
    let dov = SpectralDecomposition::of_graph(&overlay)?;
    let certificate = detect_at(&dov, a, tau, cfg)?.map(|mut c| {
        c.method = Method::Construction;
        c
    });
    let amplitude_error = certificate.as_ref().map_or(f64::INFINITY, |c| {
        (c.alpha - expected_alpha).norm().max((c.beta - expected_beta).norm())
    });
    let commute = commutator <= 1e-10;
    Ok(UnionReport {
        commutator,
        commute,
        isolated_edge,
        tau_in_range,
        pst_on_x,
        lambda,
        expected_alpha,
        expected_beta,
        holds: commute
            && isolated_edge
            && tau_in_range
            && pst_on_x
            && certificate.as_ref().is_some_and(|c| c.b == b)
            && amplitude_error <= cfg.tol_walk,
        certificate,
        amplitude_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XThetaReport {
    pub t_swaps: bool,
    pub pst_on_y: bool,
    /// `U_Y(π/2)_{b,a}`, the phase carried by the transfer on `Y`.
    pub lambda: Complex64,
    /// Observed amplitudes on `(0,a)` and `(1,b)` divided by `λ`.
    pub normalized_alpha: Complex64,
    pub normalized_beta: Complex64,
    /// `‖U(π/2) e_(0,a) − λ(−i sin 2θ e_(0,a) − i cos 2θ e_(1,b))‖`.
    pub residual: f64,
    pub certificate: Option<FrCertificate>,
    pub holds: bool,
}

/// Revival between `(0,a)` and `(1,b)` at `π/2` on `X_θ`, given PST from `a`
/// to `b` on `Y` at `π/2` and an involutive automorphism `T` swapping them.
pub fn verify_construction_xtheta(
    y: &WeightedGraph,
    t: &[Vertex],
    theta: f64,
    a: Vertex,
    b: Vertex,
    cfg: &DetectionConfig,
) -> Result<XThetaReport, WalkError> {
    let g = x_theta(y, t, theta)?;
    let n = y.order();
    let tau = PI / 2.0;
    let dy = SpectralDecomposition::of_graph(y)?;
    let lambda = transition_column(&dy, a, tau)[b];
    let pst_on_y = check_pst(&dy, a, b, tau, cfg);
    let t_swaps = t.get(a) == Some(&b);
    let dg = SpectralDecomposition::of_graph(&g)?;
    let col = transition_column(&dg, a, tau);
    let (s, c) = ((2.0 * theta).sin(), (2.0 * theta).cos());
    let mut diff = col.clone();
    diff[a] -= lambda * Complex64::new(0.0, -s);
    diff[n + b] -= lambda * Complex64::new(0.0, -c);
    let residual = diff.norm();
    let certificate = detect_at(&dg, a, tau, cfg)?.map(|mut c| {
        c.method = Method::Construction;
        c
    });
    Ok(XThetaReport {
        t_swaps,
        pst_on_y,
        lambda,
        normalized_alpha: col[a] / lambda,
        normalized_beta: col[n + b] / lambda,
        residual,
        holds: t_swaps && pst_on_y && residual <= cfg.tol_walk,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientReport {
    pub cell_a: usize,
    pub cell_b: usize,
    pub samples: usize,
    /// Largest difference of the `(a,b)`, `(a,a)`, `(b,b)` walk entries.
    pub max_deviation: f64,
    pub transport_ok: bool,
    pub graph_certificates: Vec<FrCertificate>,
    pub quotient_certificates: Vec<FrCertificate>,
    /// Every certificate on either side is reproduced on the other.
    pub corollary_ok: bool,
    pub holds: bool,
}

fn pair_certificates(
    dec: &SpectralDecomposition,
    a: Vertex,
    b: Vertex,
    cfg: &DetectionConfig,
) -> Result<Vec<FrCertificate>, WalkError> {
    let pa = certify_pair(dec, a, b, cfg)?;
    if pa.profile.strongly_cospectral {
        Ok(pa.certificates)
    } else {
        scan_fr(dec, a, Some(b), cfg)
    }
}

fn reproduced(
    cert: &FrCertificate,
    dec: &SpectralDecomposition,
    a: Vertex,
    b: Vertex,
    cfg: &DetectionConfig,
) -> Result<bool, WalkError> {
    Ok(detect_at(dec, a, cert.tau, cfg)?.is_some_and(|c| {
        c.b == b
            && c.kind == cert.kind
            && (c.alpha - cert.alpha).norm() <= cfg.tol_walk
            && (c.beta - cert.beta).norm() <= cfg.tol_walk
    }))
}

/// Walk entries between singleton cells `{a}`, `{b}` agree with the
/// quotient's, and revival occurs in one iff it occurs in the other.
pub fn verify_quotient_transport(
    x: &WeightedGraph,
    p: &EquitablePartition,
    a: Vertex,
    b: Vertex,
    cfg: &DetectionConfig,
) -> Result<QuotientReport, WalkError> {
    if !p.is_singleton(a) || !p.is_singleton(b) {
        return Err(WalkError::Precondition(format!(
            "vertices {a} and {b} must be singleton cells"
        )));
    }
    let (ca, cb) = (p.cell_of(a).unwrap(), p.cell_of(b).unwrap());
    let q = quotient(x, p)?;
    let dx = SpectralDecomposition::of_graph(x)?;
    let dq = SpectralDecomposition::of_graph(&q)?;
    let mut max_deviation: f64 = 0.0;
    for j in 1..=QUOTIENT_SAMPLES {
        let t = j as f64 * QUOTIENT_T_MAX / QUOTIENT_SAMPLES as f64;
        let (ux_a, ux_b) = (transition_column(&dx, a, t), transition_column(&dx, b, t));
        let (uq_a, uq_b) = (transition_column(&dq, ca, t), transition_column(&dq, cb, t));
        for (g, h) in [(ux_a[b], uq_a[cb]), (ux_a[a], uq_a[ca]), (ux_b[b], uq_b[cb])] {
            max_deviation = max_deviation.max((g - h).norm());
        }
    }
    let transport_ok = max_deviation <= cfg.tol_walk;
    let graph_certificates = if a == b { Vec::new() } else { pair_certificates(&dx, a, b, cfg)? };
    let quotient_certificates = if a == b { Vec::new() } else { pair_certificates(&dq, ca, cb, cfg)? };
    let mut corollary_ok = true;
    for c in &graph_certificates {
        corollary_ok &= reproduced(c, &dq, ca, cb, cfg)?;
    }
    for c in &quotient_certificates {
        corollary_ok &= reproduced(c, &dx, a, b, cfg)?;
    }
    Ok(QuotientReport {
        cell_a: ca,
        cell_b: cb,
        samples: QUOTIENT_SAMPLES,
        max_deviation,
        transport_ok,
        graph_certificates,
        quotient_certificates,
        corollary_ok,
        holds: transport_ok && corollary_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum BipartiteReport {
    NotApplicable { reason: String },
    /// Revival across the bipartition forces strong cospectrality.
    DifferentParts { strongly_cospectral: bool },
    /// Revival within a part forces periodicity at `2τ` at both ends.
    SameParts { periodic_at_2tau: bool },
}

impl BipartiteReport {
    pub fn holds(&self) -> bool {
        match self {
            Self::NotApplicable { .. } => true,
            Self::DifferentParts { strongly_cospectral } => *strongly_cospectral,
            Self::SameParts { periodic_at_2tau } => *periodic_at_2tau,
        }
    }
}

pub fn bipartite_structure_check(
    x: &WeightedGraph,
    dec: &SpectralDecomposition,
    cert: &FrCertificate,
    cfg: &DetectionConfig,
) -> Result<BipartiteReport, WalkError> {
    let Some(colour) = x.bipartition() else {
        return Ok(BipartiteReport::NotApplicable {
            reason: "graph is not bipartite".into(),
        });
    };
    if cert.a == cert.b {
        return Ok(BipartiteReport::NotApplicable {
            reason: "certificate has a single vertex".into(),
        });
    }
    Ok(if colour[cert.a] != colour[cert.b] {
        BipartiteReport::DifferentParts {
            strongly_cospectral: dec.pair_profile(cert.a, cert.b)?.strongly_cospectral,
        }
    } else {
        let t = 2.0 * cert.tau;
        BipartiteReport::SameParts {
            periodic_at_2tau: check_periodic(dec, cert.a, t, cfg) && check_periodic(dec, cert.b, t, cfg),
        }
    })
}
