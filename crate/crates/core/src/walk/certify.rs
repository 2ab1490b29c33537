//! Solving the timing congruences for strongly cospectral pairs.
//!
//! With `θ_p` the largest eigenvalue in `Φ⁺`, revival from `a` to `b` at `τ`
//! means `τ(θ_p − θ_r) ≡ 0 (mod 2π)` on `Φ⁺` and `τ(θ_p − θ_s) ≡ −2γ` on
//! `Φ⁻`, with `ζ = −τθ_p − γ`. The classification fixes the grid on which
//! the `Φ⁺` congruences can hold; each grid time then determines `γ`.

use std::f64::consts::PI;

use serde::Serialize;

use super::{
    amplitudes_from_angles, half_turn, kind_of, oracle_check, transition_column, wrap_angle,
    ColumnBasis, DetectionConfig, FrCertificate, Method, WalkError,
};
use crate::exec::par_map;
use crate::graph::Vertex;
use crate::number::{classify, rationalize, ClassifyError, EigenvalueClassification, RationalApprox, MAX_DEN, RATIONAL_TOL};
use crate::spectral::{PairProfile, SpectralDecomposition};

/// Angle tolerance for the congruences.
pub const CONGRUENCE_TOL: f64 = 1e-7;

fn anchor(profile: &PairProfile) -> Option<usize> {
    // eigenvalues are sorted descending, so the smallest index is the largest value
    profile.phi_plus.iter().copied().min()
}

/// Largest deviations from the timing congruences for a certificate with angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CongruenceCheck {
    /// `max |τ(θ_p − θ_r)| mod 2π` over `Φ⁺`.
    pub plus: f64,
    /// `max |τ(θ_p − θ_s) + 2γ| mod 2π` over `Φ⁻`.
    pub minus: f64,
    /// `|ζ + τθ_p + γ| mod 2π`.
    pub zeta: f64,
    pub holds: bool,
}

pub fn equiv_cond_residues(
    dec: &SpectralDecomposition,
    profile: &PairProfile,
    cert: &FrCertificate,
) -> Option<CongruenceCheck> {
    let (gamma, zeta) = (cert.gamma?, cert.zeta?);
    let p = anchor(profile)?;
    let theta = dec.eigenvalues();
    let tp = theta[p];
    let dev = |x: f64| wrap_angle(x).abs();
    let plus = profile
        .phi_plus
        .iter()
        .map(|&r| dev(cert.tau * (tp - theta[r])))
        .fold(0.0, f64::max);
    let minus = profile
        .phi_minus
        .iter()
        .map(|&s| dev(cert.tau * (tp - theta[s]) + 2.0 * gamma))
        .fold(0.0, f64::max);
    let zeta = dev(zeta + cert.tau * tp + gamma);
    Some(CongruenceCheck {
        plus,
        minus,
        zeta,
        holds: plus <= CONGRUENCE_TOL && minus <= CONGRUENCE_TOL && zeta <= CONGRUENCE_TOL,
    })
}

/// Certificates at the grid times `k · tau_step`, `k = 1..=max_k`, stopping at
/// the first time the pair is periodic (later times repeat). Periodic times
/// themselves are not reported.
pub fn certify_strongly_cospectral(
    dec: &SpectralDecomposition,
    profile: &PairProfile,
    cls: &EigenvalueClassification,
    cfg: &DetectionConfig,
) -> Result<Vec<FrCertificate>, WalkError> {
    if !profile.strongly_cospectral {
        return Err(WalkError::Precondition(format!(
            "{} and {} are not strongly cospectral",
            profile.a, profile.b
        )));
    }
    let Some(p) = anchor(profile) else {
        return Ok(Vec::new());
    };
    let theta = dec.eigenvalues();
    let tp = theta[p];
    let mut out = Vec::new();
    for k in 1..=cfg.max_k {
        let tau = k as f64 * cls.tau_step;
        let plus_ok = profile
            .phi_plus
            .iter()
            .all(|&r| wrap_angle(tau * (tp - theta[r])).abs() <= CONGRUENCE_TOL);
        let residues: Vec<f64> = profile
            .phi_minus
            .iter()
            .map(|&s| wrap_angle(tau * (tp - theta[s])))
            .collect();
        let Some(&rho) = residues.first() else {
            break;
        };
        let minus_ok = residues
            .iter()
            .all(|&x| wrap_angle(x - rho).abs() <= CONGRUENCE_TOL);
        if !(plus_ok && minus_ok) {
            continue;
        }
        let gamma = half_turn(-rho / 2.0);
        if gamma.sin().abs() <= cfg.beta_min {
            break;
        }
        let zeta = wrap_angle(-tau * tp - gamma);
        let (alpha, beta) = amplitudes_from_angles(gamma, zeta);
        let col = transition_column(dec, profile.a, tau);
        let mut expected = col.clone();
        expected[profile.a] -= alpha;
        expected[profile.b] -= beta;
        let residual = expected.norm();
        if residual > cfg.tol_walk {
            log::warn!(
                "congruence solution at t = {tau} for ({}, {}) fails the column check (residual {residual:e})",
                profile.a,
                profile.b
            );
            continue;
        }
        let Some(kind) = kind_of(alpha, beta, cfg) else {
            continue;
        };
        let cert = FrCertificate {
            a: profile.a,
            b: profile.b,
            tau,
            alpha,
            beta,
            gamma: Some(gamma),
            zeta: Some(zeta),
            kind,
            residual,
            method: Method::EquivCondSolve,
        };
        oracle_check(dec, &cert)?;
        out.push(cert);
    }
    Ok(out)
}

/// Everything known about one ordered pair.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub profile: PairProfile,
    /// `None` unless the pair is strongly cospectral.
    pub classification: Option<Result<EigenvalueClassification, ClassifyError>>,
    pub certificates: Vec<FrCertificate>,
}

/// Profile, classification and certificates for `(a, b)`.
pub fn certify_pair(
    dec: &SpectralDecomposition,
    a: Vertex,
    b: Vertex,
    cfg: &DetectionConfig,
) -> Result<PairAnalysis, WalkError> {
    let profile = dec.pair_profile(a, b)?;
    if !profile.strongly_cospectral {
        return Ok(PairAnalysis {
            profile,
            classification: None,
            certificates: Vec::new(),
        });
    }
    let cls = classify(&profile.phi_plus_values(dec), &profile.phi_minus_values(dec));
    let certificates = match &cls {
        Ok(c) => certify_strongly_cospectral(dec, &profile, c, cfg)?,
        Err(_) => Vec::new(),
    };
    Ok(PairAnalysis {
        profile,
        classification: Some(cls),
        certificates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PgstReport {
    pub max_fidelity: f64,
    /// Best multiple `ℓ` of `τ`.
    pub ell: usize,
    pub at_time: f64,
}

/// Consequences of the revival angle: periodicity and state transfer at
/// multiples of `τ` when `γ/π` is rational, otherwise a sweep over `ℓτ`
/// for high fidelity to `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaReport {
    pub gamma_over_pi: f64,
    pub rational: Option<RationalApprox>,
    pub periodic_time: Option<f64>,
    pub periodic_holds: Option<bool>,
    pub pst_time: Option<f64>,
    pub pst_holds: Option<bool>,
    pub pgst: Option<PgstReport>,
}

impl GammaReport {
    /// No predicted consequence failed.
    pub fn holds(&self) -> bool {
        self.periodic_holds != Some(false) && self.pst_holds != Some(false)
    }
}

pub fn check_gamma_consequences(
    cert: &FrCertificate,
    dec: &SpectralDecomposition,
    cfg: &DetectionConfig,
) -> Result<GammaReport, WalkError> {
    let Some(gamma) = cert.gamma else {
        return Err(WalkError::Precondition("certificate has no angle γ".into()));
    };
    let ratio = gamma / PI;
    let rational = rationalize(ratio, MAX_DEN, RATIONAL_TOL);
    let mut report = GammaReport {
        gamma_over_pi: ratio,
        rational,
        periodic_time: None,
        periodic_holds: None,
        pst_time: None,
        pst_holds: None,
        pgst: None,
    };
    match rational {
        Some(r) => {
            let q = r.denominator;
            let tp = q as f64 * cert.tau;
            report.periodic_time = Some(tp);
            report.periodic_holds = Some(
                super::check_periodic(dec, cert.a, tp, cfg) && super::check_periodic(dec, cert.b, tp, cfg),
            );
            if q % 2 == 0 {
                let ts = (q / 2) as f64 * cert.tau;
                report.pst_time = Some(ts);
                report.pst_holds = Some(super::check_pst(dec, cert.a, cert.b, ts, cfg));
            }
        }
        None => {
            let basis = ColumnBasis::new(dec, cert.a);
            let count = (cfg.pgst_t_max / cert.tau).floor() as usize;
            let ells: Vec<usize> = (1..=count).collect();
            let fid = par_map(cfg.execution, &ells, |&l| {
                basis.column(l as f64 * cert.tau)[cert.b].norm()
            });
            let (i, &best) = fid
                .iter()
                .enumerate()
                .fold((0, &0.0), |acc, (i, f)| if *f > *acc.1 { (i, f) } else { acc });
            report.pgst = Some(PgstReport {
                max_fidelity: best,
                ell: ells.get(i).copied().unwrap_or(0),
                at_time: ells.get(i).map_or(0.0, |&l| l as f64 * cert.tau),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::TransportKind;
    use num_complex::Complex64;
    use crate::graph::{cocktail_party, cycle, path, WeightedGraph};
    use approx::assert_abs_diff_eq;

    fn analysis(g: &WeightedGraph, a: Vertex, b: Vertex) -> (SpectralDecomposition, PairAnalysis) {
        let dec = SpectralDecomposition::of_graph(g).unwrap();
        let pa = certify_pair(&dec, a, b, &DetectionConfig::default()).unwrap();
        (dec, pa)
    }

    #[test]
    fn c6_solution_matches_detection() {
        let (dec, pa) = analysis(&cycle(6).unwrap(), 0, 3);
        let certs = pa.certificates;
        assert_eq!(certs.len(), 2);
        let c = &certs[0];
        assert_abs_diff_eq!(c.tau, 2.0 * PI / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.gamma.unwrap(), -PI / 3.0, epsilon = 1e-9);
        assert!((c.alpha - Complex64::new(-0.5, 0.0)).norm() < 1e-9);
        assert!((c.beta - Complex64::new(0.0, 3f64.sqrt() / 2.0)).norm() < 1e-9);
        let cfg = DetectionConfig::default();
        let d = super::super::detect_at(&dec, 0, c.tau, &cfg).unwrap().unwrap();
        assert!((d.alpha - c.alpha).norm() < 1e-9 && (d.beta - c.beta).norm() < 1e-9);
        let chk = equiv_cond_residues(&dec, &pa.profile, c).unwrap();
        assert!(chk.holds, "{chk:?}");
        let g = check_gamma_consequences(c, &dec, &cfg).unwrap();
        assert_eq!(g.rational.unwrap().denominator, 3);
        assert_eq!(g.periodic_holds, Some(true));
        assert_eq!(g.pst_holds, None);
    }

    #[test]
    fn p4_on_sqrt5_grid() {
        let (dec, pa) = analysis(&path(4).unwrap(), 0, 3);
        let c = &pa.certificates[0];
        assert_abs_diff_eq!(c.tau, 2.0 * PI / 5f64.sqrt(), epsilon = 1e-12);
        assert_eq!(c.kind, TransportKind::FractionalRevival);
        let cfg = DetectionConfig::default();
        let g = check_gamma_consequences(c, &dec, &cfg).unwrap();
        assert!(g.rational.is_none());
        assert!(g.pgst.unwrap().max_fidelity > 0.99);
    }

    #[test]
    fn cocktail_party_even() {
        for n in [2usize, 4, 6] {
            let (_, pa) = analysis(&cocktail_party(n).unwrap(), 0, 1);
            let first = &pa.certificates[0];
            assert_abs_diff_eq!(first.tau, PI / n as f64, epsilon = 1e-12);
            assert!(first.kind.is_revival() || n == 2);
            let pst = pa
                .certificates
                .iter()
                .find(|c| c.kind == TransportKind::PerfectStateTransfer)
                .unwrap();
            assert_abs_diff_eq!(pst.tau, PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn not_strongly_cospectral_is_rejected() {
        let (dec, pa) = analysis(&path(4).unwrap(), 0, 1);
        assert!(pa.classification.is_none() && pa.certificates.is_empty());
        let cls = classify(&[1.0], &[-1.0]).unwrap();
        assert!(certify_strongly_cospectral(&dec, &pa.profile, &cls, &DetectionConfig::default()).is_err());
    }
}
