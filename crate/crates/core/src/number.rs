//! Arithmetic behind the timing conditions: bounded-denominator rational
//! recognition, ratio conditions on eigenvalue sets, the integer /
//! quadratic-integer classification `θ = (a + b√Δ)/2`, and the cosine
//! independence criterion.
//!
//! "Not rational" here always means "no continued-fraction convergent with
//! denominator at most `max_den` fits within `tol`"; it is a bounded verdict,
//! not a proof of irrationality.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RATIONAL_TOL: f64 = 1e-9;
pub const MAX_DEN: u64 = 1_000_000;
pub const CLASS_TOL: f64 = 1e-7;
/// Extra range of the `b` search beyond the spectral-radius bound.
pub const B_SEARCH_MARGIN: i64 = 64;

/// A convergent `p/q` with residual `r` is accepted only when `r·q²` stays
/// below this bound (or `r` is at rounding level). Convergents of genuine
/// irrationals satisfy `r·q² ≈ 1/(a_{k+1} + 2)`, so without the guard any
/// irrational with modest partial quotients is "rational" once `q ≈ 3·10⁴`.
pub const DIOPHANTINE_GUARD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub numerator: i64,
    pub denominator: u64,
    pub residual: f64,
}

impl RationalApprox {
    /// `p/q` in lowest terms, with zero residual.
    pub fn new(p: i64, q: u64) -> Option<Self> {
        if q == 0 {
            return None;
        }
        let g = gcd(p.unsigned_abs(), q).max(1);
        Some(Self {
            numerator: p / g as i64,
            denominator: q / g,
            residual: 0.0,
        })
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn is_integer(&self) -> bool {
        self.denominator == 1
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// First continued-fraction convergent of `x` with denominator `<= max_den`
/// that fits within `tol` and passes [`DIOPHANTINE_GUARD`].
pub fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<RationalApprox> {
    if !x.is_finite() || max_den == 0 {
        return None;
    }
    let floor_noise = 4.0 * f64::EPSILON * x.abs().max(1.0);
    let (mut h0, mut h1): (i128, i128) = (1, x.floor() as i128);
    let (mut k0, mut k1): (i128, i128) = (0, 1);
    let mut frac = x - x.floor();
    loop {
        let residual = (x - h1 as f64 / k1 as f64).abs();
        let q = k1 as f64;
        if residual <= tol && (residual * q * q <= DIOPHANTINE_GUARD || residual <= floor_noise) {
            let p = i64::try_from(h1).ok()?;
            let mut r = RationalApprox::new(p, k1 as u64)?;
            r.residual = residual;
            return Some(r);
        }
        if frac <= 0.0 {
            return None;
        }
        let inv = 1.0 / frac;
        let a = inv.floor();
        if !a.is_finite() || a > max_den as f64 {
            return None;
        }
        frac = inv - a;
        let a = a as i128;
        (h0, h1) = (h1, a * h1 + h0);
        (k0, k1) = (k1, a * k1 + k0);
        if k1 > max_den as i128 {
            return None;
        }
    }
}

fn rationalize_default(x: f64) -> Option<RationalApprox> {
    rationalize(x, MAX_DEN, RATIONAL_TOL)
}

/// `N(μ)`: the reduced denominator.
pub fn n_of(mu: &RationalApprox) -> u64 {
    let g = gcd(mu.numerator.unsigned_abs(), mu.denominator).max(1);
    mu.denominator / g
}

/// A failing quadruple `(i, j, r, s)`: `(v_i − v_j)/(v_r − v_s)` did not rationalize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioWitness {
    pub indices: [usize; 4],
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub holds: bool,
    pub witness: Option<RatioWitness>,
}

/// Whether every ratio of pairwise differences is rational. Values within
/// [`CLASS_TOL`] of each other are merged; fewer than three distinct values
/// hold vacuously. Witness indices refer to the input slice.
pub fn ratio_condition(values: &[f64]) -> RatioReport {
    let distinct = dedupe(values);
    if distinct.len() < 3 {
        return RatioReport {
            holds: true,
            witness: None,
        };
    }
    let (imax, vmax) = distinct[0];
    let (imin, vmin) = distinct[distinct.len() - 1];
    for &(i, v) in &distinct[1..distinct.len() - 1] {
        let ratio = (v - vmin) / (vmax - vmin);
        if rationalize_default(ratio).is_none() {
            return RatioReport {
                holds: false,
                witness: Some(RatioWitness {
                    indices: [i, imin, imax, imin],
                    ratio,
                }),
            };
        }
    }
    RatioReport {
        holds: true,
        witness: None,
    }
}

/// Distinct values (first index kept), sorted descending.
fn dedupe(values: &[f64]) -> Vec<(usize, f64)> {
    let mut sorted: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
    sorted.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (i, v) in sorted {
        match out.last_mut() {
            Some(last) if (last.1 - v).abs() <= CLASS_TOL => last.0 = last.0.min(i),
            _ => out.push((i, v)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    AllInteger,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("no eigenvalues to classify")]
    Empty,
    #[error("ratio condition fails on {part:?}: {witness:?}")]
    RatioFails { part: Part, witness: RatioWitness },
    #[error("square-free parts differ: Δ⁺ = {plus}, Δ⁻ = {minus}")]
    DeltaMismatch { plus: u64, minus: u64 },
    #[error("not classifiable: {0}")]
    NotClassifiable(String),
}

/// Every value written as `(a + b_r √Δ)/2`, with `a⁺` on `Φ⁺` and `a⁻` on `Φ⁻`.
///
/// For the all-integer kind `Δ = 1`, `a = 2·min` and `b_r = 2(θ_r − min)` per part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueClassification {
    pub kind: ClassKind,
    pub a_plus: i64,
    pub a_minus: i64,
    pub delta: u64,
    pub b_plus: Vec<i64>,
    pub b_minus: Vec<i64>,
    /// gcd of `b_r − b_s` over `Φ⁺` (0 for a single value); twice the gcd of
    /// `(θ_r − θ_s)/√Δ`, kept integral so odd differences are representable.
    pub b_gcd_plus: u64,
    pub b_gcd_minus: u64,
    /// Spacing of the candidate time grid `τ_k = k · tau_step`.
    pub tau_step: f64,
    pub residual: f64,
}

impl EigenvalueClassification {
    pub fn reconstruct(&self) -> (Vec<f64>, Vec<f64>) {
        let root = (self.delta as f64).sqrt();
        let f = |a: i64, bs: &[i64]| -> Vec<f64> {
            bs.iter().map(|&b| (a as f64 + b as f64 * root) / 2.0).collect()
        };
        (f(self.a_plus, &self.b_plus), f(self.a_minus, &self.b_minus))
    }

    /// The first `k` grid times.
    pub fn tau_grid(&self, k: usize) -> Vec<f64> {
        (1..=k).map(|i| i as f64 * self.tau_step).collect()
    }

    /// `gcd(g⁺, g⁻)` over `(θ_r − θ_s)/√Δ`; a half-integer when some `b`
    /// differences are odd.
    pub fn g(&self) -> f64 {
        gcd(self.b_gcd_plus, self.b_gcd_minus) as f64 / 2.0
    }
}

fn near_int(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= CLASS_TOL).then_some(r as i64)
}

/// Square-free kernel of `n`: the `Δ` with `n = s² Δ`.
pub fn squarefree_part(mut n: u64) -> u64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    out * n
}

struct PartFit {
    a: i64,
    b: Vec<i64>,
    b_gcd: u64,
}

/// Fits one part with a known `Δ`: `b` differences from the spread, then
/// the offset `b_min` found by search so that `2θ_min − b_min√Δ` is an integer.
fn fit_part(values: &[f64], delta: u64, bound: i64) -> Option<PartFit> {
    let root = (delta as f64).sqrt();
    let vmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let diffs: Vec<i64> = values
        .iter()
        .map(|&v| near_int(2.0 * (v - vmin) / root))
        .collect::<Option<_>>()?;
    let (bmin, a) = (-bound..=bound)
        .filter_map(|b| near_int(2.0 * vmin - b as f64 * root).map(|a| (b, a)))
        .min_by_key(|&(b, _)| b.abs())?;
    let b: Vec<i64> = diffs.iter().map(|d| bmin + d).collect();
    let b_gcd = diffs.iter().fold(0, |g, d| gcd(g, d.unsigned_abs()));
    Some(PartFit { a, b, b_gcd })
}

/// Classifies the two halves of a strongly cospectral pair's support.
pub fn classify(plus: &[f64], minus: &[f64]) -> Result<EigenvalueClassification, ClassifyError> {
    if plus.is_empty() && minus.is_empty() {
        return Err(ClassifyError::Empty);
    }
    for (part, vals) in [(Part::Plus, plus), (Part::Minus, minus)] {
        if let Some(witness) = ratio_condition(vals).witness {
            return Err(ClassifyError::RatioFails { part, witness });
        }
    }
    let all: Vec<f64> = plus.iter().chain(minus).copied().collect();
    let radius = all.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let span = all.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - all.iter().copied().fold(f64::INFINITY, f64::min);

    let integer = all.iter().all(|&v| near_int(v).is_some());
    let delta = if integer {
        1
    } else {
        let mut found: Option<(Part, u64)> = None;
        for (part, vals) in [(Part::Plus, plus), (Part::Minus, minus)] {
            if dedupe(vals).len() < 2 {
                continue;
            }
            let spread = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - vals.iter().copied().fold(f64::INFINITY, f64::min);
            let sq = 4.0 * spread * spread;
            let Some(n) = near_int(sq).filter(|&n| n > 0) else {
                return Err(ClassifyError::NotClassifiable(format!(
                    "4·(spread)² = {sq} on {part:?} is not an integer"
                )));
            };
            let d = squarefree_part(n as u64);
            match found {
                None => found = Some((part, d)),
                Some((_, prev)) if prev != d => {
                    return Err(ClassifyError::DeltaMismatch { plus: prev, minus: d })
                }
                _ => {}
            }
        }
        match found {
            Some((_, d)) => d,
            None => {
                return Err(ClassifyError::NotClassifiable(
                    "non-integer eigenvalues with no part fixing Δ".into(),
                ))
            }
        }
    };

    let root = (delta as f64).sqrt();
    // conjugate-closed spectra satisfy |b|√Δ <= 2·radius; the margin admits
    // offsets `a` beyond the radius, which √Δ irrational keeps unambiguous
    let bound = (2.0 * radius / root).ceil() as i64 + B_SEARCH_MARGIN;
    let fit = |vals: &[f64]| -> Result<PartFit, ClassifyError> {
        if vals.is_empty() {
            return Ok(PartFit { a: 0, b: Vec::new(), b_gcd: 0 });
        }
        fit_part(vals, delta, bound).ok_or_else(|| {
            ClassifyError::NotClassifiable(format!("no (a, b) fit with Δ = {delta} for {vals:?}"))
        })
    };
    let (p, m) = (fit(plus)?, fit(minus)?);
    let kind = if delta == 1 && integer {
        ClassKind::AllInteger
    } else {
        ClassKind::Quadratic
    };
    // τ(θ_r − θ_s) = τ(b_r − b_s)√Δ/2 ∈ 2πℤ for all pairs
    let g = gcd(p.b_gcd, m.b_gcd);
    let tau_step = if g > 0 {
        4.0 * PI / (g as f64 * root)
    } else {
        // no internal differences constrain τ; sample quarter phases of the span
        PI / (2.0 * span.max(f64::MIN_POSITIVE))
    };
    let mut cls = EigenvalueClassification {
        kind,
        a_plus: p.a,
        a_minus: m.a,
        delta,
        b_plus: p.b,
        b_minus: m.b,
        b_gcd_plus: p.b_gcd,
        b_gcd_minus: m.b_gcd,
        tau_step,
        residual: 0.0,
    };
    let (rp, rm) = cls.reconstruct();
    cls.residual = rp
        .iter()
        .zip(plus)
        .chain(rm.iter().zip(minus))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    if cls.residual > CLASS_TOL {
        return Err(ClassifyError::NotClassifiable(format!(
            "reconstruction error {:e}",
            cls.residual
        )));
    }
    Ok(cls)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("μ1 ± μ2 is an integer; the criterion does not apply")]
pub struct CosinePrecondition;

/// Whether `{1, cos μ1π, cos μ2π}` is linearly independent over ℚ, for
/// rational `μ1, μ2` with `μ1 ± μ2` non-integral: both `N(μ) >= 4` and
/// `(N(μ1), N(μ2)) != (5, 5)`.
pub fn cosine_independent(mu1: &RationalApprox, mu2: &RationalApprox) -> Result<bool, CosinePrecondition> {
    let (n1, n2) = (n_of(mu1), n_of(mu2));
    let (p1, q1) = (mu1.numerator as i128, mu1.denominator as i128);
    let (p2, q2) = (mu2.numerator as i128, mu2.denominator as i128);
    let (x1, x2, l) = (p1 * q2, p2 * q1, q1 * q2);
    if (x1 + x2) % l == 0 || (x1 - x2) % l == 0 {
        return Err(CosinePrecondition);
    }
    Ok(n1 >= 4 && n2 >= 4 && (n1, n2) != (5, 5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn q(p: i64, d: u64) -> RationalApprox {
        RationalApprox::new(p, d).unwrap()
    }

    #[test]
    fn rationalize_examples() {
        let r = rationalize(0.5, MAX_DEN, RATIONAL_TOL).unwrap();
        assert_eq!((r.numerator, r.denominator), (1, 2));
        assert!(rationalize(5f64.sqrt() - 2.0, MAX_DEN, RATIONAL_TOL).is_none());
        let r = rationalize(-7.0 / 3.0, MAX_DEN, RATIONAL_TOL).unwrap();
        assert_eq!((r.numerator, r.denominator), (-7, 3));
        assert_eq!(rationalize(4.0, 1, RATIONAL_TOL).unwrap().numerator, 4);
        assert!(rationalize(f64::NAN, MAX_DEN, RATIONAL_TOL).is_none());
        assert!(rationalize(PI, MAX_DEN, RATIONAL_TOL).is_none());
    }

    #[test]
    fn guard_is_what_rejects_sqrt5() {
        // 5473/23184 is within 1e-9 of √5 − 2; only the guard rejects it
        let x = 5f64.sqrt() - 2.0;
        assert!((x - 5473.0 / 23184.0).abs() < 1e-9);
    }

    #[test]
    fn p5_ratio_is_not_rational() {
        let t: Vec<f64> = (1..=5).map(|r| 2.0 * (r as f64 * PI / 6.0).cos()).collect();
        assert!(rationalize((t[0] - t[1]) / (t[0] - t[4]), MAX_DEN, RATIONAL_TOL).is_none());
    }

    #[test]
    fn n_of_examples() {
        assert_eq!(n_of(&q(4, 14)), 7);
        assert_eq!(n_of(&q(7, 22)), 22);
        assert_eq!(n_of(&q(8, 6)), 3);
        let raw = RationalApprox { numerator: 4, denominator: 14, residual: 0.0 };
        assert_eq!(n_of(&raw), 7);
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_independent(&q(4, 14), &q(8, 14)), Ok(true));
        assert_eq!(cosine_independent(&q(1, 3), &q(2, 3)), Err(CosinePrecondition));
        assert_eq!(cosine_independent(&q(1, 3), &q(1, 6)), Ok(false));
        assert_eq!(cosine_independent(&q(2, 5), &q(4, 5)), Ok(false));
        assert_eq!(cosine_independent(&q(1, 4), &q(1, 7)), Ok(true));
    }

    #[test]
    fn ratio_condition_examples() {
        assert!(ratio_condition(&[2.0, -1.0]).holds);
        let r5 = 5f64.sqrt();
        let c10 = [2.0, (-1.0 + r5) / 2.0, (-1.0 - r5) / 2.0];
        let rep = ratio_condition(&c10);
        assert!(!rep.holds);
        assert_eq!(rep.witness.unwrap().indices, [1, 2, 0, 2]);
        let r2 = 2f64.sqrt();
        assert!(!ratio_condition(&[2.0, r2, 0.0, -r2, -2.0]).holds);
        assert!(ratio_condition(&[3.0, 1.0, 0.0, -2.0]).holds);
    }

    #[test]
    fn classify_p4() {
        let r5 = 5f64.sqrt();
        let c = classify(&[(1.0 + r5) / 2.0, (1.0 - r5) / 2.0], &[(r5 - 1.0) / 2.0, (-1.0 - r5) / 2.0]).unwrap();
        assert_eq!(c.kind, ClassKind::Quadratic);
        assert_eq!((c.a_plus, c.a_minus, c.delta), (1, -1, 5));
        assert_eq!(c.b_plus, vec![1, -1]);
        assert_eq!(c.b_minus, vec![1, -1]);
        assert_eq!((c.b_gcd_plus, c.b_gcd_minus, c.g()), (2, 2, 1.0));
        assert_abs_diff_eq!(c.tau_step, 2.0 * PI / r5, epsilon = 1e-12);
    }

    #[test]
    fn classify_c6() {
        let c = classify(&[2.0, -1.0], &[1.0, -2.0]).unwrap();
        assert_eq!(c.kind, ClassKind::AllInteger);
        assert_eq!((c.b_gcd_plus, c.b_gcd_minus, c.g()), (6, 6, 3.0));
        assert!(c.tau_grid(4).iter().any(|t| (t - 2.0 * PI / 3.0).abs() < 1e-12));
    }

    #[test]
    fn classify_odd_b_differences() {
        // (θ1 − θ2)/√7 = 1/2: the grid must be twice as coarse as 2π/√7
        let r7 = 7f64.sqrt();
        let c = classify(&[(-2.0 - 4.0 * r7) / 2.0, (-2.0 - 5.0 * r7) / 2.0], &[]).unwrap();
        assert_eq!((c.delta, c.b_gcd_plus, c.g()), (7, 1, 0.5));
        assert_abs_diff_eq!(c.tau_step, 4.0 * PI / r7, epsilon = 1e-12);
        let p = &c.reconstruct().0;
        let phase = c.tau_step * (p[0] - p[1]) / (2.0 * PI);
        assert_abs_diff_eq!(phase, phase.round(), epsilon = 1e-9);
    }

    #[test]
    fn classify_offset_beyond_radius() {
        // (3 + 0√2)/2 and (3 − 6√2)/2: |b|√Δ exceeds twice the spectral radius
        let r2 = 2f64.sqrt();
        let c = classify(&[1.5, (3.0 - 6.0 * r2) / 2.0], &[]).unwrap();
        assert_eq!((c.delta, c.a_plus, c.b_plus.clone()), (2, 3, vec![0, -6]));
    }

    #[test]
    fn classify_double_cone_quotients() {
        for (k, n) in [(2u64, 4u64), (2, 5), (3, 4), (1, 3)] {
            let s = ((k * k + 8 * n) as f64).sqrt();
            let kf = k as f64;
            let c = classify(&[(kf + s) / 2.0, (kf - s) / 2.0], &[0.0]).unwrap();
            let square = s.fract() == 0.0;
            assert_eq!(c.kind == ClassKind::AllInteger, square, "k={k} n={n}");
            assert_abs_diff_eq!(c.tau_step, 2.0 * PI / s, epsilon = 1e-12);
        }
    }

    #[test]
    fn classify_rejects_mixed_fields() {
        let r2 = 2f64.sqrt();
        assert!(matches!(
            classify(&[2.0, 0.0, -2.0], &[r2, -r2]),
            Err(ClassifyError::DeltaMismatch { plus: 1, minus: 2 })
        ));
        let r5 = 5f64.sqrt();
        assert!(matches!(
            classify(&[2.0, (-1.0 + r5) / 2.0, (-1.0 - r5) / 2.0], &[0.5]),
            Err(ClassifyError::RatioFails { part: Part::Plus, .. })
        ));
        assert!(classify(&[PI], &[0.0]).is_err());
    }

    #[test]
    fn singleton_parts_fall_back_to_quarter_phase() {
        let c = classify(&[1.0], &[-1.0]).unwrap();
        assert_abs_diff_eq!(c.tau_step, PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn squarefree() {
        assert_eq!(squarefree_part(20), 5);
        assert_eq!(squarefree_part(32), 2);
        assert_eq!(squarefree_part(36), 1);
        assert_eq!(squarefree_part(1), 1);
        assert_eq!(squarefree_part(30), 30);
    }
}
