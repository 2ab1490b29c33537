//! Grouped eigendecomposition `A = Σ θ_r E_r` and the pair relations built
//! on it: eigenvalue support, parallel, cospectral and strongly cospectral
//! vertices, and the sign partition `Φ⁺ / Φ⁻`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Vertex, WeightedGraph};

/// Absolute tolerance for projector identities and pair relations.
pub const TOL_SPEC: f64 = 1e-9;
/// A projection `E_r e_a` counts as nonzero above this norm.
pub const TOL_SUPPORT: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("matrix has a non-finite entry")]
    NonFinite,
    #[error("group tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("symmetric eigensolver did not converge")]
    EigenFailure,
    #[error("vertex {0} out of range for order {1}")]
    UnknownVertex(Vertex, usize),
    #[error("pair relations need two distinct vertices, got {0} twice")]
    SameVertex(Vertex),
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<DMatrix<f64>>,
    multiplicities: Vec<usize>,
    group_tolerance: f64,
    ambiguous: bool,
    matrix: DMatrix<f64>,
    nonnegative: bool,
    connected: bool,
}

/// Largest violations of the projector identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectorResiduals {
    pub completeness: f64,
    pub idempotence: f64,
    pub orthogonality: f64,
    /// `‖Σ θ_r E_r − A‖ / max(1, ‖A‖_∞)`, so that scaling a graph does not
    /// change the verdict.
    pub reconstruction: f64,
}

impl ProjectorResiduals {
    pub fn max(&self) -> f64 {
        self.completeness
            .max(self.idempotence)
            .max(self.orthogonality)
            .max(self.reconstruction)
    }
}

/// `1e-8 · max(1, ‖A‖_∞)`.
pub fn default_group_tol(a: &DMatrix<f64>) -> f64 {
    let inf_norm = a
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    1e-8 * inf_norm.max(1.0)
}

impl SpectralDecomposition {
    /// Decomposes a symmetric matrix, clustering eigenvalues whose sorted
    /// gaps fall below `group_tol` (default [`default_group_tol`]).
    pub fn new(a: &DMatrix<f64>, group_tol: Option<f64>) -> Result<Self, SpectralError> {
        let (rows, cols) = a.shape();
        if rows != cols || rows == 0 {
            return Err(SpectralError::NotSquare { rows, cols });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        for i in 0..rows {
            for j in i + 1..rows {
                let (x, y) = (a[(i, j)], a[(j, i)]);
                if (x - y).abs() > SYMMETRY_TOL * x.abs().max(y.abs()).max(1.0) {
                    return Err(SpectralError::Asymmetric { i, j });
                }
            }
        }
        let tol = group_tol.unwrap_or_else(|| default_group_tol(a));
        if !(tol > 0.0) {
            return Err(SpectralError::BadTolerance(tol));
        }
        let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
            .ok_or(SpectralError::EigenFailure)?;

        let mut order: Vec<usize> = (0..rows).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let mut groups: Vec<Vec<usize>> = vec![vec![order[0]]];
        let mut ambiguous = false;
        for w in order.windows(2) {
            let gap = eig.eigenvalues[w[0]] - eig.eigenvalues[w[1]];
            if gap >= tol / 10.0 && gap < 10.0 * tol {
                ambiguous = true;
            }
            if gap >= tol {
                groups.push(vec![w[1]]);
            } else {
                groups.last_mut().unwrap().push(w[1]);
            }
        }

        let mut eigenvalues = Vec::with_capacity(groups.len());
        let mut projectors = Vec::with_capacity(groups.len());
        for g in &groups {
            let vals: Vec<f64> = g.iter().map(|&i| eig.eigenvalues[i]).collect();
            if vals[0] - vals[vals.len() - 1] >= tol {
                ambiguous = true;
            }
            eigenvalues.push(vals.iter().sum::<f64>() / vals.len() as f64);
            let mut e = DMatrix::zeros(rows, rows);
            for &i in g {
                let v = eig.eigenvectors.column(i);
                e.ger(1.0, &v, &v, 1.0);
            }
            projectors.push(e);
        }
        if ambiguous {
            log::warn!("eigenvalue clustering is ambiguous at group tolerance {tol:e}");
        }
        Ok(Self {
            eigenvalues,
            multiplicities: groups.iter().map(Vec::len).collect(),
            projectors,
            group_tolerance: tol,
            ambiguous,
            nonnegative: a.iter().all(|&x| x >= 0.0),
            connected: connected(a),
            matrix: a.clone(),
        })
    }

    pub fn of_graph(g: &WeightedGraph) -> Result<Self, SpectralError> {
        Self::new(g.weights(), None)
    }

    /// Distinct eigenvalues, largest first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[DMatrix<f64>] {
        &self.projectors
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn group_tolerance(&self) -> f64 {
        self.group_tolerance
    }

    /// True when some eigenvalue gap lies within a factor 10 of the group tolerance.
    pub fn is_ambiguous(&self) -> bool {
        self.ambiguous
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    /// Whether the Perron–Frobenius anchoring `θ_0 ∈ Φ⁺` is guaranteed.
    pub fn perron_anchor_valid(&self) -> bool {
        self.nonnegative && self.connected
    }

    /// `E_r e_a`.
    pub fn projection(&self, r: usize, a: Vertex) -> DVector<f64> {
        self.projectors[r].column(a).into_owned()
    }

    pub fn residuals(&self) -> ProjectorResiduals {
        let n = self.order();
        let mut sum = -DMatrix::<f64>::identity(n, n);
        let mut recon = -self.matrix.clone();
        let mut idempotence: f64 = 0.0;
        let mut orthogonality: f64 = 0.0;
        for (r, e) in self.projectors.iter().enumerate() {
            sum += e;
            recon += e * self.eigenvalues[r];
            idempotence = idempotence.max((e * e - e).amax());
            for f in &self.projectors[r + 1..] {
                orthogonality = orthogonality.max((e * f).amax());
            }
        }
        ProjectorResiduals {
            completeness: sum.amax(),
            idempotence,
            orthogonality,
            reconstruction: recon.amax() / self.matrix.row_iter().map(|r| r.abs().sum()).fold(1.0, f64::max),
        }
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), SpectralError> {
        if v < self.order() {
            Ok(())
        } else {
            Err(SpectralError::UnknownVertex(v, self.order()))
        }
    }

    /// `Φ_a`: indices `r` with `‖E_r e_a‖ > TOL_SUPPORT`.
    pub fn support(&self, a: Vertex) -> Result<Vec<usize>, SpectralError> {
        self.check_vertex(a)?;
        Ok((0..self.eigenvalues.len())
            .filter(|&r| self.projectors[r].column(a).norm() > TOL_SUPPORT)
            .collect())
    }

    pub fn pair_profile(&self, a: Vertex, b: Vertex) -> Result<PairProfile, SpectralError> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        if a == b {
            return Err(SpectralError::SameVertex(a));
        }
        let support = self.support(a)?;
        let support_b = self.support(b)?;
        let mut parallel = true;
        let mut cospectral = true;
        let mut strongly = true;
        let mut phi_plus = Vec::new();
        let mut phi_minus = Vec::new();
        for (r, e) in self.projectors.iter().enumerate() {
            if (e[(a, a)] - e[(b, b)]).abs() > TOL_SPEC {
                cospectral = false;
            }
            if !support.contains(&r) && !support_b.contains(&r) {
                continue;
            }
            let (v, w) = (e.column(a), e.column(b));
            let (nv, nw) = (v.norm(), w.norm());
            if (v.dot(&w).abs() - nv * nw).abs() > TOL_SPEC {
                parallel = false;
            }
            let k = v.iamax();
            let sign = if v[k] * w[k] >= 0.0 { 1.0 } else { -1.0 };
            if (v - w * sign).amax() > TOL_SPEC {
                strongly = false;
            } else if sign > 0.0 {
                phi_plus.push(r);
            } else {
                phi_minus.push(r);
            }
        }
        let strongly_cospectral = strongly && parallel && cospectral;
        if !strongly_cospectral {
            phi_plus.clear();
            phi_minus.clear();
        }
        let profile = PairProfile {
            a,
            b,
            support,
            parallel,
            cospectral,
            strongly_cospectral,
            phi_plus,
            phi_minus,
            perron_anchor_valid: self.perron_anchor_valid(),
        };
        if profile.strongly_cospectral
            && profile.perron_anchor_valid
            && !profile.phi_plus.contains(&0)
        {
            log::warn!("θ_0 missing from Φ⁺ for ({a}, {b}) on a non-negative connected graph");
        }
        Ok(profile)
    }
}

fn connected(a: &DMatrix<f64>) -> bool {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if !seen[u] && a[(v, u)] != 0.0 {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Spectral relations between two vertices. `phi_plus`/`phi_minus` hold
/// eigenvalue indices and are empty unless the pair is strongly cospectral.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairProfile {
    pub a: Vertex,
    pub b: Vertex,
    /// `Φ_a` as eigenvalue indices.
    pub support: Vec<usize>,
    pub parallel: bool,
    pub cospectral: bool,
    pub strongly_cospectral: bool,
    pub phi_plus: Vec<usize>,
    pub phi_minus: Vec<usize>,
    pub perron_anchor_valid: bool,
}

impl PairProfile {
    pub fn phi_plus_values(&self, dec: &SpectralDecomposition) -> Vec<f64> {
        self.phi_plus.iter().map(|&r| dec.eigenvalues()[r]).collect()
    }

    pub fn phi_minus_values(&self, dec: &SpectralDecomposition) -> Vec<f64> {
        self.phi_minus.iter().map(|&r| dec.eigenvalues()[r]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, path, star, weighted_path};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn dec(g: &WeightedGraph) -> SpectralDecomposition {
        SpectralDecomposition::of_graph(g).unwrap()
    }

    #[test]
    fn weighted_p3_top_projector() {
        for w in [0.5, 1.0, 2.0, 2f64.sqrt() - 1.0] {
            let d = dec(&weighted_path(&[w, 1.0]).unwrap());
            let s = 1.0 / (1.0 + w * w);
            let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -w, 0.0, 0.0, 0.0, -w, 0.0, w * w]) * s;
            // the zero eigenvalue sits in the middle of the three
            assert_eq!(d.eigenvalues().len(), 3);
            assert_abs_diff_eq!(d.eigenvalues()[1], 0.0, epsilon = 1e-12);
            assert!((&d.projectors()[1] - want).amax() < 1e-12);
        }
    }

    #[test]
    fn path_projectors_match_closed_form() {
        for n in 2..=9 {
            let d = dec(&path(n).unwrap());
            assert!(d.residuals().max() < 1e-12);
            let m = (n + 1) as f64;
            for (r, e) in d.projectors().iter().enumerate() {
                let rr = (r + 1) as f64;
                assert_abs_diff_eq!(d.eigenvalues()[r], 2.0 * (rr * PI / m).cos(), epsilon = 1e-12);
                for j in 0..n {
                    for a in 0..n {
                        let want = 2.0 / m
                            * ((j + 1) as f64 * rr * PI / m).sin()
                            * ((a + 1) as f64 * rr * PI / m).sin();
                        assert!((e[(j, a)] - want).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn path_support_rule() {
        for n in 2..=11 {
            let d = dec(&path(n).unwrap());
            for a in 1..=n {
                let want: Vec<usize> = (1..=n).filter(|r| (a * r) % (n + 1) != 0).map(|r| r - 1).collect();
                assert_eq!(d.support(a - 1).unwrap(), want, "P{n} vertex {a}");
            }
        }
    }

    #[test]
    fn identity_has_one_group() {
        let d = SpectralDecomposition::new(&DMatrix::identity(4, 4), None).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0]);
        assert_eq!(d.multiplicities(), &[4]);
        assert_eq!(d.projectors()[0], DMatrix::identity(4, 4));
    }

    #[test]
    fn cycle_eigenvalues() {
        for n in 3..=16 {
            let d = dec(&cycle(n).unwrap());
            let mut want: Vec<f64> = (0..=n / 2).map(|r| 2.0 * (2.0 * PI * r as f64 / n as f64).cos()).collect();
            want.sort_by(|a, b| b.total_cmp(a));
            assert_eq!(d.eigenvalues().len(), want.len());
            for (x, y) in d.eigenvalues().iter().zip(&want) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn star_centre_support() {
        let d = dec(&star(16).unwrap());
        let vals: Vec<f64> = d.support(0).unwrap().iter().map(|&r| d.eigenvalues()[r]).collect();
        assert_eq!(vals.len(), 2);
        assert_abs_diff_eq!(vals[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], -4.0, epsilon = 1e-12);
    }

    #[test]
    fn c6_antipodes_are_strongly_cospectral() {
        let d = dec(&cycle(6).unwrap());
        let p = d.pair_profile(0, 3).unwrap();
        assert!(p.strongly_cospectral && p.parallel && p.cospectral);
        let plus = p.phi_plus_values(&d);
        let minus = p.phi_minus_values(&d);
        assert_eq!(plus.len(), 2);
        assert_abs_diff_eq!(plus[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(plus[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(minus[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(minus[1], -2.0, epsilon = 1e-12);
        assert!(p.phi_plus.contains(&0));
        // neighbours are not
        assert!(!d.pair_profile(0, 1).unwrap().strongly_cospectral);
    }

    #[test]
    fn weighted_p3_endpoints_parallel_not_cospectral() {
        let d = dec(&weighted_path(&[0.5, 1.0]).unwrap());
        let p = d.pair_profile(0, 2).unwrap();
        assert!(p.parallel);
        assert!(!p.cospectral);
        assert!(!p.strongly_cospectral);
        assert!(p.phi_plus.is_empty());
        let d1 = dec(&path(3).unwrap());
        assert!(d1.pair_profile(0, 2).unwrap().strongly_cospectral);
    }

    #[test]
    fn p4_sign_partition() {
        let d = dec(&path(4).unwrap());
        let p = d.pair_profile(0, 3).unwrap();
        assert!(p.strongly_cospectral);
        let r5 = 5f64.sqrt();
        let plus = p.phi_plus_values(&d);
        let minus = p.phi_minus_values(&d);
        assert_abs_diff_eq!(plus[0], (1.0 + r5) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(plus[1], (1.0 - r5) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(minus[0], (r5 - 1.0) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(minus[1], (-1.0 - r5) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn profile_is_symmetric_in_the_pair() {
        let d = dec(&path(6).unwrap());
        for (a, b) in [(0, 5), (1, 4), (0, 2)] {
            let (p, q) = (d.pair_profile(a, b).unwrap(), d.pair_profile(b, a).unwrap());
            assert_eq!(p.strongly_cospectral, q.strongly_cospectral);
            assert_eq!(p.parallel, q.parallel);
            assert_eq!(p.cospectral, q.cospectral);
            assert_eq!(p.phi_plus, q.phi_plus);
            assert_eq!(p.phi_minus, q.phi_minus);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(SpectralDecomposition::new(&m, None), Err(SpectralError::Asymmetric { .. })));
        let d = dec(&path(3).unwrap());
        assert!(matches!(d.pair_profile(1, 1), Err(SpectralError::SameVertex(1))));
        assert!(d.support(3).is_err());
    }
}
