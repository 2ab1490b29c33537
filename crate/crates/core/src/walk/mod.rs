//! The walk `U(t) = e^{−itA} = Σ_r e^{−itθ_r} E_r` and detection of
//! fractional revival, perfect state transfer, periodicity and uniform mixing.
//!
//! Every certificate leaving this module has been checked twice: once on the
//! spectral column and once against [`matrix_exp_oracle`], which never touches
//! the eigendecomposition.

mod certify;
mod construct;
mod scan;

pub use certify::{
    certify_pair, certify_strongly_cospectral, check_gamma_consequences, equiv_cond_residues,
    CongruenceCheck, GammaReport, PairAnalysis, PgstReport,
};
pub use construct::{
    bipartite_structure_check, verify_construction_ium, verify_construction_union,
    verify_construction_xtheta, verify_quotient_transport, BipartiteReport, IumReport,
    QuotientReport, UnionReport, XThetaReport,
};
pub use scan::scan_fr;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::graph::{GraphError, Vertex};
use crate::spectral::{SpectralDecomposition, SpectralError};

/// Spectral and oracle columns must agree to this before a certificate is reported.
pub const ORACLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub tol_walk: f64,
    pub beta_min: f64,
    pub t_max: f64,
    pub grid_points: usize,
    pub refine_iters: usize,
    /// Number of grid multiples tried when solving the timing congruences.
    pub max_k: usize,
    /// Horizon of the pretty-good-state-transfer sweep.
    pub pgst_t_max: f64,
    pub execution: Execution,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            tol_walk: 1e-8,
            beta_min: 1e-6,
            t_max: 50.0,
            grid_points: 20_000,
            refine_iters: 60,
            max_k: 64,
            pgst_t_max: 1e4,
            execution: Execution::default(),
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        let positive = [self.tol_walk, self.beta_min, self.t_max, self.pgst_t_max];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(WalkError::InvalidConfig("tolerances and horizons must be positive".into()));
        }
        if self.grid_points < 100 {
            return Err(WalkError::InvalidConfig(format!(
                "grid_points must be at least 100, got {}",
                self.grid_points
            )));
        }
        if self.refine_iters == 0 || self.max_k == 0 {
            return Err(WalkError::InvalidConfig("refine_iters and max_k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("spectral and exponential walks disagree by {deviation:e} at vertex {a}, t = {t}")]
    NumericalHealth { deviation: f64, a: Vertex, t: f64 },
    #[error("invalid detection config: {0}")]
    InvalidConfig(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    FractionalRevival,
    PerfectStateTransfer,
    Periodic,
    BalancedFr,
}

impl TransportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FractionalRevival => "fractional_revival",
            Self::PerfectStateTransfer => "perfect_state_transfer",
            Self::Periodic => "periodic",
            Self::BalancedFr => "balanced_fr",
        }
    }

    /// Fractional revival proper (balanced or not); excludes PST and periodicity.
    pub fn is_revival(self) -> bool {
        matches!(self, Self::FractionalRevival | Self::BalancedFr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GridScan,
    EquivCondSolve,
    Construction,
    /// A caller-supplied time checked with [`detect_at`].
    Direct,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GridScan => "grid_scan",
            Self::EquivCondSolve => "equiv_cond_solve",
            Self::Construction => "construction",
            Self::Direct => "direct",
        }
    }
}

/// `U(τ) e_a = α e_a + β e_b` up to `residual`. For periodic certificates `b == a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrCertificate {
    pub a: Vertex,
    pub b: Vertex,
    pub tau: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Option<f64>,
    pub zeta: Option<f64>,
    pub kind: TransportKind,
    pub residual: f64,
    pub method: Method,
}

/// `U(t)` from the spectral decomposition.
pub fn transition_matrix(dec: &SpectralDecomposition, t: f64) -> DMatrix<Complex64> {
    let n = dec.order();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for (theta, e) in dec.eigenvalues().iter().zip(dec.projectors()) {
        let phase = Complex64::from_polar(1.0, -t * theta);
        u.zip_apply(e, |x, y| *x += phase * y);
    }
    u
}

/// Column `U(t) e_a` from the spectral decomposition.
pub fn transition_column(dec: &SpectralDecomposition, a: Vertex, t: f64) -> DVector<Complex64> {
    let mut col = DVector::<Complex64>::zeros(dec.order());
    for (theta, e) in dec.eigenvalues().iter().zip(dec.projectors()) {
        let phase = Complex64::from_polar(1.0, -t * theta);
        col.zip_apply(&e.column(a), |x, y| *x += phase * y);
    }
    col
}

/// Precomputed `E_r e_a` for fast repeated columns at one vertex.
pub(crate) struct ColumnBasis<'a> {
    eigenvalues: &'a [f64],
    projections: Vec<DVector<f64>>,
}

impl<'a> ColumnBasis<'a> {
    pub(crate) fn new(dec: &'a SpectralDecomposition, a: Vertex) -> Self {
        let support = dec.support(a).unwrap_or_default();
        Self {
            eigenvalues: dec.eigenvalues(),
            projections: (0..dec.eigenvalues().len())
                .map(|r| {
                    if support.contains(&r) {
                        dec.projection(r, a)
                    } else {
                        DVector::zeros(dec.order())
                    }
                })
                .collect(),
        }
    }

    pub(crate) fn column(&self, t: f64) -> DVector<Complex64> {
        let n = self.projections[0].len();
        let mut col = DVector::<Complex64>::zeros(n);
        for (theta, p) in self.eigenvalues.iter().zip(&self.projections) {
            let phase = Complex64::from_polar(1.0, -t * theta);
            col.zip_apply(p, |x, y| *x += phase * y);
        }
        col
    }
}

/// `e^{−itA}` by scaling and squaring a truncated Taylor series; independent
/// of any eigendecomposition.
pub fn matrix_exp_oracle(a: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let n = a.nrows();
    let m: DMatrix<Complex64> = a.map(|x| Complex64::new(0.0, -t * x));
    let norm = a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Reduces an angle to `(−π/2, π/2]`.
fn half_turn(x: f64) -> f64 {
    let y = x.rem_euclid(PI);
    if y > PI / 2.0 {
        y - PI
    } else {
        y
    }
}

/// Recovers `(γ, ζ)` from `α = e^{iζ} cos γ`, `β = i e^{iζ} sin γ`, with
/// `γ ∈ (−π/2, π/2]` and `ζ ∈ (−π, π]`.
pub fn fr_angles(alpha: Complex64, beta: Complex64) -> (f64, f64) {
    let (s, d) = ((alpha + beta).arg(), (alpha - beta).arg());
    let gamma = half_turn((s - d) / 2.0);
    (gamma, wrap_angle(s - gamma))
}

/// `(e^{iζ} cos γ, i e^{iζ} sin γ)`.
pub fn amplitudes_from_angles(gamma: f64, zeta: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, zeta);
    (phase * gamma.cos(), Complex64::i() * phase * gamma.sin())
}

/// Splits a column into `(α, b, β, residual)` where `b` carries the largest
/// off-`a` amplitude and `residual` is the norm of everything else. `None`
/// when two off-`a` vertices exceed `beta_min`.
pub(crate) fn split_column(
    col: &DVector<Complex64>,
    a: Vertex,
    beta_min: f64,
) -> Option<(Complex64, Vertex, Complex64, f64)> {
    let alpha = col[a];
    let mut best: Option<(Vertex, f64)> = None;
    let mut large = 0;
    for (v, z) in col.iter().enumerate() {
        if v == a {
            continue;
        }
        let m = z.norm();
        if m > beta_min {
            large += 1;
        }
        if best.is_none_or(|(_, bm)| m > bm) {
            best = Some((v, m));
        }
    }
    if large > 1 {
        return None;
    }
    let Some((b, _)) = best else {
        return Some((alpha, a, Complex64::new(0.0, 0.0), 0.0));
    };
    let residual = col
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != a && v != b)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    Some((alpha, b, col[b], residual))
}

fn kind_of(alpha: Complex64, beta: Complex64, cfg: &DetectionConfig) -> Option<TransportKind> {
    let (am, bm) = (alpha.norm(), beta.norm());
    if bm < cfg.tol_walk {
        Some(TransportKind::Periodic)
    } else if bm <= cfg.beta_min {
        None
    } else if am < cfg.tol_walk {
        Some(TransportKind::PerfectStateTransfer)
    } else if (am - bm).abs() < cfg.tol_walk {
        Some(TransportKind::BalancedFr)
    } else {
        Some(TransportKind::FractionalRevival)
    }
}

/// Classifies a column into a certificate without the oracle cross-check.
pub(crate) fn certificate_from_column(
    dec: &SpectralDecomposition,
    col: &DVector<Complex64>,
    a: Vertex,
    tau: f64,
    method: Method,
    cfg: &DetectionConfig,
) -> Option<FrCertificate> {
    let Some((alpha, b, beta, residual)) = split_column(col, a, cfg.beta_min) else {
        log::debug!("ambiguous concentration from {a} at t = {tau}");
        return None;
    };
    if residual > cfg.tol_walk {
        return None;
    }
    let kind = kind_of(alpha, beta, cfg)?;
    let (b, beta, residual) = if kind == TransportKind::Periodic {
        let rest = col
            .iter()
            .enumerate()
            .filter(|&(v, _)| v != a)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if rest > cfg.tol_walk {
            return None;
        }
        (a, Complex64::new(0.0, 0.0), rest)
    } else {
        (b, beta, residual)
    };
    let (gamma, zeta) = if b != a
        && dec.pair_profile(a, b).is_ok_and(|p| p.strongly_cospectral)
    {
        let (g, z) = fr_angles(alpha, beta);
        (Some(g), Some(z))
    } else {
        (None, None)
    };
    Some(FrCertificate {
        a,
        b,
        tau,
        alpha,
        beta,
        gamma,
        zeta,
        kind,
        residual,
        method,
    })
}

/// Cross-checks a certificate's column against the exponential oracle.
pub(crate) fn oracle_check(
    dec: &SpectralDecomposition,
    cert: &FrCertificate,
) -> Result<(), WalkError> {
    let spectral = transition_column(dec, cert.a, cert.tau);
    let oracle = matrix_exp_oracle(dec.matrix(), cert.tau).column(cert.a).into_owned();
    let deviation = (spectral - oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > ORACLE_TOL {
        log::warn!(
            "numerical health: certificate from {} at t = {} voided (oracle deviation {deviation:e})",
            cert.a,
            cert.tau
        );
        return Err(WalkError::NumericalHealth {
            deviation,
            a: cert.a,
            t: cert.tau,
        });
    }
    Ok(())
}

/// Examines `U(τ) e_a`; returns a certificate when its mass sits on `a` and
/// at most one other vertex.
pub fn detect_at(
    dec: &SpectralDecomposition,
    a: Vertex,
    tau: f64,
    cfg: &DetectionConfig,
) -> Result<Option<FrCertificate>, WalkError> {
    if a >= dec.order() {
        return Err(SpectralError::UnknownVertex(a, dec.order()).into());
    }
    if !(tau > 0.0) {
        return Err(WalkError::Precondition(format!("τ must be positive, got {tau}")));
    }
    let col = transition_column(dec, a, tau);
    let Some(cert) = certificate_from_column(dec, &col, a, tau, Method::Direct, cfg) else {
        return Ok(None);
    };
    oracle_check(dec, &cert)?;
    Ok(Some(cert))
}

/// `|U(τ)_{a,a}| = 1`.
pub fn check_periodic(dec: &SpectralDecomposition, a: Vertex, tau: f64, cfg: &DetectionConfig) -> bool {
    (transition_column(dec, a, tau)[a].norm() - 1.0).abs() <= cfg.tol_walk
}

/// `|U(τ)_{b,a}| = 1`.
pub fn check_pst(
    dec: &SpectralDecomposition,
    a: Vertex,
    b: Vertex,
    tau: f64,
    cfg: &DetectionConfig,
) -> bool {
    (transition_column(dec, a, tau)[b].norm() - 1.0).abs() <= cfg.tol_walk
}

/// Every `|U(τ)_{u,v}| = 1/√n`.
pub fn check_uniform_mixing(dec: &SpectralDecomposition, tau: f64, cfg: &DetectionConfig) -> bool {
    let flat = 1.0 / (dec.order() as f64).sqrt();
    transition_matrix(dec, tau)
        .iter()
        .all(|z| (z.norm() - flat).abs() <= cfg.tol_walk)
}

/// Reverse certificate: from `b` at the same time with amplitudes
/// `(−ᾱβ/β̄, β)`.
pub fn check_symmetry(cert: &FrCertificate, dec: &SpectralDecomposition, cfg: &DetectionConfig) -> bool {
    if cert.a == cert.b || cert.beta.norm() <= cfg.beta_min {
        return false;
    }
    let col = transition_column(dec, cert.b, cert.tau);
    let expected_bb = -cert.alpha.conj() * cert.beta / cert.beta.conj();
    let rest = col
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != cert.a && v != cert.b)
        .map(|(_, z)| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    (col[cert.b] - expected_bb).norm() <= cfg.tol_walk
        && (col[cert.a] - cert.beta).norm() <= cfg.tol_walk
        && rest <= cfg.tol_walk
}

/// Checks the certificate invariants: normalization, residual against a
/// fresh column, and the angle form when angles are present.
pub fn certificate_consistent(
    cert: &FrCertificate,
    dec: &SpectralDecomposition,
    cfg: &DetectionConfig,
) -> bool {
    let norm = cert.alpha.norm_sqr() + cert.beta.norm_sqr();
    let col = transition_column(dec, cert.a, cert.tau);
    let mut expected = DVector::<Complex64>::zeros(dec.order());
    expected[cert.a] += cert.alpha;
    expected[cert.b] += cert.beta;
    let residual = (col - expected).norm();
    let angles_ok = match (cert.gamma, cert.zeta) {
        (Some(g), Some(z)) => {
            let (al, be) = amplitudes_from_angles(g, z);
            (al - cert.alpha).norm() <= cfg.tol_walk && (be - cert.beta).norm() <= cfg.tol_walk
        }
        _ => true,
    };
    (norm - 1.0).abs() <= cfg.tol_walk && residual <= cfg.tol_walk && angles_ok
}
