use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{GraphError, Vertex, WeightedGraph};

/// Absolute tolerance on row sums into cells.
pub const TOL_EQ: f64 = 1e-9;

/// Weight sums are rounded to this many decimal digits before comparison
/// during refinement.
const SIGNATURE_DIGITS: f64 = 1e12;

/// A vertex partition in which every vertex of cell `i` sends the same total
/// weight `d[i][j]` into cell `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquitablePartition {
    cells: Vec<Vec<Vertex>>,
    #[serde(skip)]
    cell_degrees: DMatrix<f64>,
}

impl EquitablePartition {
    /// Validates that `cells` partition the vertex set and are equitable for `graph`.
    pub fn new(graph: &WeightedGraph, cells: Vec<Vec<Vertex>>) -> Result<Self, GraphError> {
        let cell_of = cell_index(graph.order(), &cells)?;
        let cell_degrees = degrees_checked(graph, &cells, &cell_of)?;
        Ok(Self {
            cells,
            cell_degrees,
        })
    }

    pub fn cells(&self) -> &[Vec<Vertex>] {
        &self.cells
    }

    /// `d[i][j]`: total weight from any vertex of cell `i` into cell `j`.
    pub fn cell_degrees(&self) -> &DMatrix<f64> {
        &self.cell_degrees
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_of(&self, v: Vertex) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(&v))
    }

    pub fn is_singleton(&self, v: Vertex) -> bool {
        self.cell_of(v).is_some_and(|c| self.cells[c].len() == 1)
    }

    /// Cell sizes in descending order.
    pub fn shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.cells.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

fn cell_index(n: usize, cells: &[Vec<Vertex>]) -> Result<Vec<usize>, GraphError> {
    let mut cell_of = vec![usize::MAX; n];
    for (c, cell) in cells.iter().enumerate() {
        if cell.is_empty() {
            return Err(GraphError::InvalidPartition(format!("cell {c} is empty")));
        }
        for &v in cell {
            if v >= n {
                return Err(GraphError::InvalidPartition(format!("vertex {v} out of range")));
            }
            if cell_of[v] != usize::MAX {
                return Err(GraphError::InvalidPartition(format!("vertex {v} appears twice")));
            }
            cell_of[v] = c;
        }
    }
    if let Some(v) = cell_of.iter().position(|&c| c == usize::MAX) {
        return Err(GraphError::InvalidPartition(format!("vertex {v} is not covered")));
    }
    Ok(cell_of)
}

fn row_sums(graph: &WeightedGraph, v: Vertex, cell_of: &[usize], k: usize) -> Vec<f64> {
    let mut sums = vec![0.0; k];
    for u in 0..graph.order() {
        sums[cell_of[u]] += graph.weight(v, u);
    }
    sums
}

fn degrees_checked(
    graph: &WeightedGraph,
    cells: &[Vec<Vertex>],
    cell_of: &[usize],
) -> Result<DMatrix<f64>, GraphError> {
    let k = cells.len();
    let mut d = DMatrix::zeros(k, k);
    for (i, cell) in cells.iter().enumerate() {
        let reference = row_sums(graph, cell[0], cell_of, k);
        for &v in &cell[1..] {
            let sums = row_sums(graph, v, cell_of, k);
            let deviation = sums
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if deviation > TOL_EQ {
                return Err(GraphError::NotEquitable {
                    cell: i,
                    vertex: v,
                    deviation,
                });
            }
        }
        for (j, s) in reference.into_iter().enumerate() {
            d[(i, j)] = s;
        }
    }
    Ok(d)
}

/// Coarsest equitable partition refining `seed`, by repeated splitting on
/// `(own cell, weight into each cell)` signatures until the cell count stops
/// growing. Cells are ordered by their smallest vertex.
pub fn coarsest_equitable_refinement(
    graph: &WeightedGraph,
    seed: &[Vec<Vertex>],
) -> Result<EquitablePartition, GraphError> {
    let n = graph.order();
    let mut cell_of = cell_index(n, seed)?;
    let mut count = renumber(&mut cell_of);
    loop {
        let signatures: Vec<(usize, Vec<(usize, i64)>)> = (0..n)
            .map(|v| {
                let mut sig: Vec<(usize, i64)> = row_sums(graph, v, &cell_of, count)
                    .into_iter()
                    .enumerate()
                    .map(|(c, s)| (c, (s * SIGNATURE_DIGITS).round() as i64))
                    .filter(|&(_, s)| s != 0)
                    .collect();
                sig.sort_unstable();
                (cell_of[v], sig)
            })
            .collect();
        let mut ids: HashMap<&(usize, Vec<(usize, i64)>), usize> = HashMap::new();
        let next: Vec<usize> = signatures
            .iter()
            .map(|s| {
                let len = ids.len();
                *ids.entry(s).or_insert(len)
            })
            .collect();
        let next_count = ids.len();
        cell_of = next;
        if next_count == count {
            break;
        }
        count = next_count;
    }
    let mut cells = vec![Vec::new(); count];
    for (v, &c) in cell_of.iter().enumerate() {
        cells[c].push(v);
    }
    EquitablePartition::new(graph, cells)
}

/// Renumbers cell ids by first occurrence in vertex order; returns the cell count.
fn renumber(cell_of: &mut [usize]) -> usize {
    let mut map = HashMap::new();
    for c in cell_of.iter_mut() {
        let len = map.len();
        *c = *map.entry(*c).or_insert(len);
    }
    map.len()
}

/// `Δ_a`: the coarsest equitable refinement of `{{a}, V \ {a}}`. Fractional
/// revival between `a` and `b` requires `Δ_a == Δ_b`.
pub fn orbit_signature(graph: &WeightedGraph, a: Vertex) -> Result<EquitablePartition, GraphError> {
    let n = graph.order();
    if a >= n {
        return Err(GraphError::UnknownVertex(a.to_string()));
    }
    let rest: Vec<Vertex> = (0..n).filter(|&v| v != a).collect();
    let seed = if rest.is_empty() {
        vec![vec![a]]
    } else {
        vec![vec![a], rest]
    };
    coarsest_equitable_refinement(graph, &seed)
}

/// Quotient graph on the cells of an equitable partition: off-diagonal
/// weight `sqrt(d_ij d_ji)`, diagonal `d_ii`. Cells are labelled `{u,v,...}`.
pub fn quotient(graph: &WeightedGraph, p: &EquitablePartition) -> Result<WeightedGraph, GraphError> {
    if graph.is_signed() {
        return Err(GraphError::Unsupported(
            "quotients of signed graphs are not defined".into(),
        ));
    }
    let cell_of = cell_index(graph.order(), &p.cells)?;
    let d = degrees_checked(graph, &p.cells, &cell_of)?;
    let k = p.len();
    let w = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            d[(i, i)]
        } else {
            (d[(i, j)] * d[(j, i)]).sqrt()
        }
    });
    let labels = p
        .cells
        .iter()
        .map(|c| {
            let inner: Vec<&str> = c.iter().map(|&v| graph.label(v)).collect();
            format!("{{{}}}", inner.join(","))
        })
        .collect();
    WeightedGraph::from_matrix(w, Some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, double_cone, path, star, weighted_path};

    #[test]
    fn star_refines_to_centre_and_leaves() {
        let g = star(6).unwrap();
        let p = coarsest_equitable_refinement(&g, &[vec![0], (1..7).collect()]).unwrap();
        assert_eq!(p.cells(), &[vec![0], (1..7).collect::<Vec<_>>()]);
        assert_eq!(p.cell_degrees()[(0, 1)], 6.0);
        assert_eq!(p.cell_degrees()[(1, 0)], 1.0);
    }

    #[test]
    fn double_cone_seed_is_already_equitable() {
        let g = double_cone(&cycle(5).unwrap());
        let seed = vec![vec![0], (1..6).collect(), vec![6]];
        let p = coarsest_equitable_refinement(&g, &seed).unwrap();
        assert_eq!(p.cells(), seed.as_slice());
        let q = quotient(&g, &p).unwrap();
        let r5 = 5f64.sqrt();
        let want = DMatrix::from_row_slice(3, 3, &[0.0, r5, 0.0, r5, 2.0, r5, 0.0, r5, 0.0]);
        assert!((q.weights() - want).abs().max() < 1e-15);
        // the apex-only seed reaches the same partition
        assert_eq!(orbit_signature(&g, 0).unwrap().cells(), seed.as_slice());
    }

    #[test]
    fn path_endpoint_refinement_is_discrete() {
        let g = path(4).unwrap();
        let p = coarsest_equitable_refinement(&g, &[vec![0], vec![1, 2, 3]]).unwrap();
        assert_eq!(p.len(), 4);
        // Δ_1 = Δ_4 in the paper's 1-based labelling
        assert_eq!(orbit_signature(&g, 0).unwrap(), orbit_signature(&g, 3).unwrap());
    }

    #[test]
    fn odd_path_middle_vertex_has_distinct_signature() {
        let g = path(5).unwrap();
        let mid = orbit_signature(&g, 2).unwrap();
        assert_eq!(mid.cells(), &[vec![0, 4], vec![1, 3], vec![2]]);
        for v in [0, 1, 3, 4] {
            assert_ne!(orbit_signature(&g, v).unwrap(), mid);
        }
    }

    #[test]
    fn cycle_signatures_share_shape() {
        let g = cycle(6).unwrap();
        let shapes: Vec<_> = (0..6).map(|a| orbit_signature(&g, a).unwrap().shape()).collect();
        assert!(shapes.iter().all(|s| s == &vec![2, 2, 1, 1]));
        assert_eq!(orbit_signature(&g, 0).unwrap(), orbit_signature(&g, 3).unwrap());
    }

    #[test]
    fn quotient_of_star_and_discrete_partition() {
        let g = star(4).unwrap();
        let p = EquitablePartition::new(&g, vec![vec![0], vec![1, 2, 3, 4]]).unwrap();
        let q = quotient(&g, &p).unwrap();
        assert_eq!(q.weight(0, 1), 2.0);
        let w = weighted_path(&[0.5, 1.5]).unwrap();
        let discrete = EquitablePartition::new(&w, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(quotient(&w, &discrete).unwrap().weights(), w.weights());
    }

    #[test]
    fn non_equitable_partition_is_rejected() {
        let g = path(4).unwrap();
        assert!(matches!(
            EquitablePartition::new(&g, vec![vec![0, 1], vec![2, 3]]),
            Err(GraphError::NotEquitable { .. })
        ));
        assert!(matches!(
            EquitablePartition::new(&g, vec![vec![0, 1], vec![1, 2, 3]]),
            Err(GraphError::InvalidPartition(_))
        ));
    }

    #[test]
    fn refinement_is_idempotent() {
        let g = complete(5).unwrap();
        let p = orbit_signature(&g, 2).unwrap();
        let again = coarsest_equitable_refinement(&g, p.cells()).unwrap();
        assert_eq!(p.cells(), again.cells());
    }
}
