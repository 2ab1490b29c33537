//! Weighted graphs: the standard families, the product/union/join
//! combinators, and equitable partitions with their quotients.
//!
//! A [`WeightedGraph`] is a symmetric real weight matrix plus unique vertex
//! labels. Weights are non-negative except for graphs built through
//! [`x_theta`], which are flagged as signed. Vertex indices are 0-based
//! everywhere; products use row-major pair ordering, so vertex `(x, y)` of
//! `X □ Y` has index `x * |Y| + y`.

mod equitable;
mod io;
mod spec;

pub use equitable::{
    coarsest_equitable_refinement, orbit_signature, quotient, EquitablePartition, TOL_EQ,
};
pub use io::{read_graph, write_graph};
pub use spec::{parse_graph_spec, ParseError};

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use thiserror::Error;

/// Vertex index into a graph's weight matrix.
pub type Vertex = usize;

/// Relative tolerance used when accepting caller-supplied matrices as symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("invalid order {0}: {1}")]
    InvalidOrder(usize, &'static str),
    #[error("weight matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("weight matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("negative weight {weight} at ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },
    #[error("non-finite weight at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("vertex sets differ")]
    VertexMismatch,
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("not an involutive automorphism: {0}")]
    NotAutomorphism(String),
    #[error("partition is not equitable: vertex {vertex} deviates by {deviation:e} in cell {cell}")]
    NotEquitable {
        cell: usize,
        vertex: Vertex,
        deviation: f64,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: DMatrix<f64>,
    labels: Vec<String>,
    signed: bool,
}

impl WeightedGraph {
    /// Builds a graph from a symmetric non-negative weight matrix. Labels
    /// default to `"0"`, `"1"`, ...
    pub fn from_matrix(
        weights: DMatrix<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        Self::build(weights, labels, false)
    }

    /// Like [`WeightedGraph::from_matrix`] but accepts negative weights.
    /// The result reports [`is_signed`](Self::is_signed) when any weight is negative.
    pub fn from_signed_matrix(
        weights: DMatrix<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        Self::build(weights, labels, true)
    }

    /// Builds a graph from an edge list; `(i, i, w)` sets a diagonal entry.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidOrder(0, "graphs need at least one vertex"));
        }
        let mut w = DMatrix::zeros(n, n);
        for &(i, j, x) in edges {
            if i >= n || j >= n {
                return Err(GraphError::UnknownVertex(format!("{}", i.max(j))));
            }
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
        Self::from_signed_matrix(w, None)
    }

    fn build(
        mut weights: DMatrix<f64>,
        labels: Option<Vec<String>>,
        allow_negative: bool,
    ) -> Result<Self, GraphError> {
        let (rows, cols) = weights.shape();
        if rows != cols {
            return Err(GraphError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(GraphError::InvalidOrder(0, "graphs need at least one vertex"));
        }
        let n = rows;
        let mut signed = false;
        for i in 0..n {
            for j in i..n {
                let (x, y) = (weights[(i, j)], weights[(j, i)]);
                if !x.is_finite() || !y.is_finite() {
                    return Err(GraphError::NonFinite { i, j });
                }
                if (x - y).abs() > SYMMETRY_TOL * x.abs().max(y.abs()).max(1.0) {
                    return Err(GraphError::Asymmetric { i, j });
                }
                let m = 0.5 * (x + y);
                weights[(i, j)] = m;
                weights[(j, i)] = m;
                if m < 0.0 {
                    if !allow_negative {
                        return Err(GraphError::NegativeWeight { i, j, weight: m });
                    }
                    signed = true;
                }
            }
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(GraphError::LabelCount {
                        expected: n,
                        got: l.len(),
                    });
                }
                let mut seen = HashSet::new();
                for s in &l {
                    if !seen.insert(s.as_str()) {
                        return Err(GraphError::DuplicateLabel(s.clone()));
                    }
                }
                l
            }
            None => index_labels(n),
        };
        Ok(Self {
            weights,
            labels,
            signed,
        })
    }

    pub fn order(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, i: Vertex, j: Vertex) -> f64 {
        self.weights[(i, j)]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> &str {
        &self.labels[v]
    }

    /// True when some weight is negative (only [`x_theta`] and signed inputs).
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// All weights in {0, 1} with an empty diagonal.
    pub fn is_simple_unweighted(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| {
            self.weights[(i, i)] == 0.0
                && (0..n).all(|j| {
                    let w = self.weights[(i, j)];
                    w == 0.0 || w == 1.0
                })
        })
    }

    /// Resolves a vertex by label first, then by decimal index.
    pub fn vertex(&self, name: &str) -> Result<Vertex, GraphError> {
        if let Some(v) = self.labels.iter().position(|l| l == name) {
            return Ok(v);
        }
        match name.parse::<usize>() {
            Ok(v) if v < self.order() => Ok(v),
            _ => Err(GraphError::UnknownVertex(name.to_string())),
        }
    }

    /// Off-diagonal neighbours of `v` with their weights.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        (0..self.order()).filter_map(move |u| {
            let w = self.weights[(v, u)];
            (u != v && w != 0.0).then_some((u, w))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for (u, _) in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }

    /// Two-colouring (`false`/`true` per vertex) if the graph is bipartite.
    /// Diagonal entries count as odd cycles.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let n = self.order();
        if (0..n).any(|i| self.weights[(i, i)] != 0.0) {
            return None;
        }
        let mut colour: Vec<Option<bool>> = vec![None; n];
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                let c = colour[v].unwrap();
                for (u, _) in self.neighbors(v) {
                    match colour[u] {
                        None => {
                            colour[u] = Some(!c);
                            queue.push_back(u);
                        }
                        Some(cu) if cu == c => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(colour.into_iter().map(Option::unwrap).collect())
    }

    pub fn with_labels(self, labels: Vec<String>) -> Result<Self, GraphError> {
        Self::build(self.weights, Some(labels), true)
    }

    /// Multiplies every weight by `factor` (which must be positive).
    pub fn scaled(&self, factor: f64) -> Result<Self, GraphError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(GraphError::Unsupported(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Self {
            weights: &self.weights * factor,
            labels: self.labels.clone(),
            signed: self.signed,
        })
    }

    /// Reorders vertices: vertex `i` of the result is vertex `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[Vertex]) -> Result<Self, GraphError> {
        check_permutation(perm, self.order())?;
        let n = self.order();
        let w = DMatrix::from_fn(n, n, |i, j| self.weights[(perm[i], perm[j])]);
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        Ok(Self {
            weights: w,
            labels,
            signed: self.signed,
        })
    }
}

fn index_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn check_permutation(perm: &[Vertex], n: usize) -> Result<(), GraphError> {
    if perm.len() != n {
        return Err(GraphError::NotAutomorphism(format!(
            "permutation has length {}, graph has order {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(GraphError::NotAutomorphism(
                "not a permutation of the vertex set".into(),
            ));
        }
    }
    Ok(())
}

fn unweighted(n: usize, labels: Vec<String>, edges: impl Iterator<Item = (usize, usize)>) -> WeightedGraph {
    let mut w = DMatrix::zeros(n, n);
    for (i, j) in edges {
        w[(i, j)] = 1.0;
        w[(j, i)] = 1.0;
    }
    WeightedGraph {
        weights: w,
        labels,
        signed: false,
    }
}

/// The path `P_n` on vertices `0..n`.
pub fn path(n: usize) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidOrder(n, "path needs n >= 1"));
    }
    Ok(unweighted(n, index_labels(n), (1..n).map(|i| (i - 1, i))))
}

/// A path whose consecutive edges carry the given weights (`weights.len() + 1` vertices).
pub fn weighted_path(weights: &[f64]) -> Result<WeightedGraph, GraphError> {
    let n = weights.len() + 1;
    let mut w = DMatrix::zeros(n, n);
    for (i, &x) in weights.iter().enumerate() {
        w[(i, i + 1)] = x;
        w[(i + 1, i)] = x;
    }
    WeightedGraph::from_matrix(w, None)
}

/// The cycle `C_n` on `Z/nZ`.
pub fn cycle(n: usize) -> Result<WeightedGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidOrder(n, "cycle needs n >= 3"));
    }
    Ok(unweighted(n, index_labels(n), (0..n).map(|i| (i, (i + 1) % n))))
}

pub fn complete(n: usize) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidOrder(n, "complete graph needs n >= 1"));
    }
    Ok(unweighted(
        n,
        index_labels(n),
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))),
    ))
}

pub fn empty(n: usize) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidOrder(n, "empty graph needs n >= 1"));
    }
    Ok(unweighted(n, index_labels(n), std::iter::empty()))
}

/// The star `K_{1,n}`: centre `0`, leaves `1..=n`.
pub fn star(n: usize) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidOrder(n, "star needs n >= 1 leaves"));
    }
    Ok(unweighted(n + 1, index_labels(n + 1), (1..=n).map(|i| (0, i))))
}

/// The `d`-cube `Q_d`. Vertices are labelled by their bit strings, most
/// significant bit first, which agrees with `K_2 □ Q_{d-1}` row-major order.
pub fn hypercube(d: usize) -> Result<WeightedGraph, GraphError> {
    if d == 0 || d > 20 {
        return Err(GraphError::InvalidOrder(d, "hypercube needs 1 <= d <= 20"));
    }
    let n = 1usize << d;
    let labels = (0..n).map(|i| format!("{i:0d$b}")).collect();
    Ok(unweighted(
        n,
        labels,
        (0..n).flat_map(move |i| (0..d).map(move |k| (i, i ^ (1 << k))).filter(|&(i, j)| i < j)),
    ))
}

/// The antipodal perfect matching on the vertex set of `Q_d`, labelled like [`hypercube`].
pub fn antipodal_matching(d: usize) -> Result<WeightedGraph, GraphError> {
    if d == 0 || d > 20 {
        return Err(GraphError::InvalidOrder(d, "matching needs 1 <= d <= 20"));
    }
    let n = 1usize << d;
    let labels = (0..n).map(|i| format!("{i:0d$b}")).collect();
    Ok(unweighted(
        n,
        labels,
        (0..n).map(move |i| (i, i ^ (n - 1))).filter(|&(i, j)| i < j),
    ))
}

/// The cocktail party graph: complement of `n` disjoint edges on `2n`
/// vertices. Vertex `2i` and `2i + 1` form the `i`-th non-adjacent pair.
pub fn cocktail_party(n: usize) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidOrder(n, "cocktail party needs n >= 1"));
    }
    let m = 2 * n;
    Ok(unweighted(
        m,
        index_labels(m),
        (0..m).flat_map(move |i| (i + 1..m).map(move |j| (i, j))).filter(|&(i, j)| i / 2 != j / 2),
    ))
}

/// A connected graph on `n` vertices: a random spanning tree plus each
/// remaining edge with probability `density`, weights uniform in `[0.1, 2)`.
pub fn random_connected<R: rand::Rng + ?Sized>(
    n: usize,
    density: f64,
    rng: &mut R,
) -> Result<WeightedGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidOrder(n, "graphs need at least one vertex"));
    }
    let mut edges = Vec::new();
    let mut present = HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.1..2.0)));
        present.insert((u, v));
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present.contains(&(i, j)) && rng.gen_bool(density.clamp(0.0, 1.0)) {
                edges.push((i, j, rng.gen_range(0.1..2.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges)
}

/// `X □ Y` with adjacency `A(X) ⊗ I + I ⊗ A(Y)`; vertex `(x, y)` is `x * |Y| + y`.
pub fn cartesian_product(x: &WeightedGraph, y: &WeightedGraph) -> WeightedGraph {
    let (nx, ny) = (x.order(), y.order());
    let n = nx * ny;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..nx {
        for j in 0..nx {
            let xij = x.weights[(i, j)];
            if xij != 0.0 {
                for k in 0..ny {
                    w[(i * ny + k, j * ny + k)] += xij;
                }
            }
        }
        for k in 0..ny {
            for l in 0..ny {
                w[(i * ny + k, i * ny + l)] += y.weights[(k, l)];
            }
        }
    }
    let labels = x
        .labels
        .iter()
        .flat_map(|a| y.labels.iter().map(move |b| format!("({a},{b})")))
        .collect();
    WeightedGraph {
        weights: w,
        labels,
        signed: x.signed || y.signed,
    }
}

/// Overlays two graphs on the same labelled vertex set: `A(X) + A(Y)`.
pub fn union_overlay(x: &WeightedGraph, y: &WeightedGraph) -> Result<WeightedGraph, GraphError> {
    if x.order() != y.order() || x.labels != y.labels {
        return Err(GraphError::VertexMismatch);
    }
    WeightedGraph::build(&x.weights + &y.weights, Some(x.labels.clone()), true)
}

/// Complement of a simple unweighted graph.
pub fn complement(x: &WeightedGraph) -> Result<WeightedGraph, GraphError> {
    if !x.is_simple_unweighted() {
        return Err(GraphError::Unsupported(
            "complement needs a simple graph with 0/1 weights".into(),
        ));
    }
    let n = x.order();
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i != j && x.weights[(i, j)] == 0.0 {
            1.0
        } else {
            0.0
        }
    });
    Ok(WeightedGraph {
        weights: w,
        labels: x.labels.clone(),
        signed: false,
    })
}

/// Concatenates label lists, prefixing both sides when they collide.
fn disjoint_labels(left: &[String], right: &[String], tags: (&str, &str)) -> Vec<String> {
    let l: HashSet<&str> = left.iter().map(String::as_str).collect();
    if right.iter().any(|r| l.contains(r.as_str())) {
        left.iter()
            .map(|s| format!("{}{s}", tags.0))
            .chain(right.iter().map(|s| format!("{}{s}", tags.1)))
            .collect()
    } else {
        left.iter().chain(right).cloned().collect()
    }
}

/// The join `X + Y`: disjoint union plus every cross edge with weight 1.
pub fn join(x: &WeightedGraph, y: &WeightedGraph) -> WeightedGraph {
    let (nx, ny) = (x.order(), y.order());
    let n = nx + ny;
    let w = DMatrix::from_fn(n, n, |i, j| match (i < nx, j < nx) {
        (true, true) => x.weights[(i, j)],
        (false, false) => y.weights[(i - nx, j - nx)],
        _ => 1.0,
    });
    WeightedGraph {
        weights: w,
        labels: disjoint_labels(&x.labels, &y.labels, ("x:", "y:")),
        signed: x.signed || y.signed,
    }
}

/// The double cone `K̄_2 + X`. The two apexes are labelled `a` and `b`;
/// `a` is vertex 0, the vertices of `X` follow in order, and `b` comes last.
pub fn double_cone(x: &WeightedGraph) -> WeightedGraph {
    let nx = x.order();
    let n = nx + 2;
    let apex = |i: usize| i == 0 || i == n - 1;
    let w = DMatrix::from_fn(n, n, |i, j| match (apex(i), apex(j)) {
        (true, true) => 0.0,
        (false, false) => x.weights[(i - 1, j - 1)],
        _ => 1.0,
    });
    let inner = &x.labels;
    let inner: Vec<String> = if inner.iter().any(|l| l == "a" || l == "b") {
        inner.iter().map(|l| format!("y:{l}")).collect()
    } else {
        inner.clone()
    };
    let labels = std::iter::once("a".to_string())
        .chain(inner)
        .chain(std::iter::once("b".to_string()))
        .collect();
    WeightedGraph {
        weights: w,
        labels,
        signed: x.signed,
    }
}

/// The two-layer graph with adjacency
/// `I ⊗ A(Y) + cos(2θ) (σ_X ⊗ I) + sin(2θ) (σ_Z ⊗ T)`.
///
/// `t` must be an involutive automorphism of `y`. Vertex `(s, v)` has index
/// `s * |Y| + v`. The result carries negative weights whenever
/// `sin(2θ) != 0` (the `σ_Z` block) or `cos(2θ) < 0`, and is then flagged signed.
pub fn x_theta(y: &WeightedGraph, t: &[Vertex], theta: f64) -> Result<WeightedGraph, GraphError> {
    let n = y.order();
    check_permutation(t, n)?;
    if let Some(v) = (0..n).find(|&v| t[t[v]] != v) {
        return Err(GraphError::NotAutomorphism(format!(
            "T(T({v})) = {} != {v}",
            t[t[v]]
        )));
    }
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (y.weights[(i, j)], y.weights[(t[i], t[j])]);
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                return Err(GraphError::NotAutomorphism(format!(
                    "T does not preserve the weight between {i} and {j}"
                )));
            }
        }
    }
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let mut w = DMatrix::zeros(2 * n, 2 * n);
    for layer in 0..2 {
        let off = layer * n;
        let sign = if layer == 0 { 1.0 } else { -1.0 };
        for i in 0..n {
            for j in 0..n {
                w[(off + i, off + j)] = y.weights[(i, j)];
            }
            w[(off + i, off + t[i])] += sign * s;
        }
    }
    for i in 0..n {
        w[(i, n + i)] += c;
        w[(n + i, i)] += c;
    }
    let labels = (0..2)
        .flat_map(|s| y.labels.iter().map(move |l| format!("({s},{l})")))
        .collect();
    WeightedGraph::build(w, Some(labels), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn sorted_eigs(g: &WeightedGraph) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(g.weights().clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(|a, b| b.partial_cmp(a).unwrap());
        e
    }

    fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a.kronecker(b)
    }

    #[test]
    fn path_basics() {
        let p2 = path(2).unwrap();
        assert_eq!(p2.weights(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(matches!(path(0), Err(GraphError::InvalidOrder(0, _))));
        let e = sorted_eigs(&path(3).unwrap());
        let r2 = 2f64.sqrt();
        for (x, y) in e.iter().zip([r2, 0.0, -r2]) {
            assert!((x - y).abs() < 1e-12);
        }
        let e = sorted_eigs(&path(4).unwrap());
        let s5 = 5f64.sqrt();
        let want = [(1.0 + s5) / 2.0, (-1.0 + s5) / 2.0, (1.0 - s5) / 2.0, (-1.0 - s5) / 2.0];
        for (x, y) in e.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn family_spectra() {
        let e = sorted_eigs(&cycle(6).unwrap());
        for (x, y) in e.iter().zip([2.0, 1.0, 1.0, -1.0, -1.0, -2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        let cp = cocktail_party(3).unwrap();
        for v in 0..6 {
            assert_eq!(cp.neighbors(v).count(), 4);
        }
        assert_eq!(cp.weight(0, 1), 0.0);
        assert_eq!(star(16).unwrap().order(), 17);
    }

    #[test]
    fn product_matches_kronecker_sum() {
        let x = star(3).unwrap();
        let y = weighted_path(&[0.5, 2.0]).unwrap();
        let p = cartesian_product(&x, &y);
        let want = kron(x.weights(), &DMatrix::identity(3, 3)) + kron(&DMatrix::identity(4, 4), y.weights());
        assert_eq!(p.weights(), &want);
        assert_eq!(p.label(4), "(1,1)");
        // Q_2 = C_4 up to relabelling: 0-1-3-2-0
        let q2 = cartesian_product(&path(2).unwrap(), &path(2).unwrap());
        let c4 = cycle(4).unwrap().permuted(&[0, 1, 3, 2]).unwrap();
        assert_eq!(q2.weights(), c4.weights());
        assert_eq!(hypercube(2).unwrap().weights(), q2.weights());
        let q3 = cartesian_product(&path(2).unwrap(), &hypercube(2).unwrap());
        assert_eq!(hypercube(3).unwrap().weights(), q3.weights());
        assert_eq!(cartesian_product(&star(6).unwrap(), &path(2).unwrap()).order(), 14);
    }

    #[test]
    fn product_spectrum_is_pairwise_sums() {
        let x = cycle(5).unwrap();
        let y = weighted_path(&[1.0, 0.3]).unwrap();
        let mut sums: Vec<f64> = sorted_eigs(&x)
            .iter()
            .flat_map(|a| sorted_eigs(&y).into_iter().map(move |b| a + b))
            .collect();
        sums.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let direct = sorted_eigs(&cartesian_product(&x, &y));
        for (a, b) in sums.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn overlay_and_complement() {
        let c = cycle(5).unwrap();
        assert_eq!(union_overlay(&c, &empty(5).unwrap()).unwrap(), c);
        assert_eq!(union_overlay(&c, &empty(4).unwrap()), Err(GraphError::VertexMismatch));
        assert_eq!(complement(&complete(4).unwrap()).unwrap(), empty(4).unwrap());
        assert_eq!(complement(&complement(&c).unwrap()).unwrap(), c);
        let w = weighted_path(&[2.0]).unwrap();
        assert!(matches!(complement(&w), Err(GraphError::Unsupported(_))));
    }

    #[test]
    fn overlay_commutation_for_cube_and_matching() {
        let x = hypercube(3).unwrap().scaled(2.0).unwrap();
        let y = antipodal_matching(3).unwrap();
        let (a, b) = (x.weights(), y.weights());
        assert!((a * b - b * a).abs().max() < 1e-12);
        let o = union_overlay(&x, &y).unwrap();
        assert_eq!(o.weight(0, 7), 1.0);
    }

    #[test]
    fn cocktail_party_is_double_cone_up_to_relabelling() {
        for n in 2..6 {
            let cp = cocktail_party(n).unwrap();
            let cone = double_cone(&cocktail_party(n - 1).unwrap());
            // cone order: a, inner 0..2n-2, b; the apex pair maps to cocktail pair (0, 1)
            let m = 2 * n;
            let mut perm = vec![0, m - 1];
            perm.extend(1..m - 1);
            let relabelled = cone.permuted(&perm).unwrap();
            assert_eq!(relabelled.weights(), cp.weights());
        }
    }

    #[test]
    fn double_cone_layout() {
        let d = double_cone(&cycle(4).unwrap());
        assert_eq!(d.order(), 6);
        assert_eq!(d.label(0), "a");
        assert_eq!(d.label(5), "b");
        assert_eq!(d.weight(0, 5), 0.0);
        assert!((1..5).all(|v| d.weight(0, v) == 1.0 && d.weight(5, v) == 1.0));
        let j = join(&empty(2).unwrap(), &cycle(4).unwrap());
        assert_eq!(j.label(0), "x:0");
        assert_eq!(j.weights().sum(), d.weights().sum());
    }

    #[test]
    fn x_theta_constructor() {
        let y = cycle(4).unwrap();
        let t = [2, 1, 0, 3];
        let x0 = x_theta(&y, &t, 0.0).unwrap();
        assert_eq!(x0.weights(), cartesian_product(&path(2).unwrap(), &y).weights());
        assert!(!x0.is_signed());
        let xq = x_theta(&y, &t, std::f64::consts::FRAC_PI_4).unwrap();
        assert!(xq.is_signed());
        assert!((0..4).all(|i| xq.weight(i, 4 + i).abs() < 1e-15));
        assert!(matches!(
            x_theta(&y, &[1, 2, 3, 0], 0.1),
            Err(GraphError::NotAutomorphism(_))
        ));
        assert!(matches!(
            x_theta(&y, &[1, 0, 2, 3], 0.1),
            Err(GraphError::NotAutomorphism(_))
        ));
    }

    #[test]
    fn x_theta_spectrum_is_symmetric_shift_of_y() {
        // M = cos σX⊗I + sin σZ⊗T squares to I and commutes with I⊗A(Y),
        // so spec(X_θ) = {μ ± 1 : μ ∈ spec(Y)}.
        let y = cycle(4).unwrap();
        let x = x_theta(&y, &[2, 1, 0, 3], 0.3).unwrap();
        let mut want: Vec<f64> = sorted_eigs(&y).iter().flat_map(|m| [m + 1.0, m - 1.0]).collect();
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in sorted_eigs(&x).iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn validation_errors() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(WeightedGraph::from_matrix(m, None), Err(GraphError::Asymmetric { .. })));
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(matches!(WeightedGraph::from_matrix(m.clone(), None), Err(GraphError::NegativeWeight { .. })));
        assert!(WeightedGraph::from_signed_matrix(m, None).unwrap().is_signed());
        let m = DMatrix::zeros(2, 2);
        assert!(matches!(
            WeightedGraph::from_matrix(m, Some(vec!["x".into(), "x".into()])),
            Err(GraphError::DuplicateLabel(_))
        ));
    }

    #[test]
    fn bipartition_and_connectivity() {
        assert!(cycle(6).unwrap().bipartition().is_some());
        assert!(cycle(5).unwrap().bipartition().is_none());
        let p = path(4).unwrap().bipartition().unwrap();
        assert_ne!(p[0], p[3]);
        assert!(!empty(3).unwrap().is_connected());
        assert!(star(4).unwrap().is_connected());
    }

    #[test]
    fn random_graphs_are_connected() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..20 {
            let g = random_connected(n, 0.2, &mut rng).unwrap();
            assert!(g.is_connected());
            assert!(g.weights().iter().all(|&w| w == 0.0 || (0.1..2.0).contains(&w)));
        }
    }
}
