//! Adjacency and weight-matrix foundations: the binary [`DirectedGraph`],
//! the real-valued [`WeightMatrix`], cycle detection, thresholding, the
//! matrix exponential and the trace-exponential acyclicity function.

mod acyclicity;
mod expm;

pub use acyclicity::{acyclicity_gradient, acyclicity_value, acyclicity_value_and_gradient};
pub use expm::matrix_exponential;

use std::collections::HashSet;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{from_rows, to_rows};
use crate::scalar::Scalar;

/// Binary adjacency over named variables. `adj[i][j]` is the edge
/// `names[i] -> names[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct DirectedGraph {
    names: Vec<String>,
    adj: Array2<bool>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    names: Vec<String>,
    adj: Vec<Vec<u8>>,
}

impl TryFrom<GraphRepr> for DirectedGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        DirectedGraph::from_rows(r.names, &r.adj)
    }
}

impl From<DirectedGraph> for GraphRepr {
    fn from(g: DirectedGraph) -> Self {
        GraphRepr {
            adj: g.adjacency_rows(),
            names: g.names,
        }
    }
}

pub(crate) fn validate_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for n in names {
        if n.is_empty() {
            return Err(Error::InvalidGraph("empty variable name".into()));
        }
        if !seen.insert(n.as_str()) {
            return Err(Error::InvalidGraph(format!(
                "duplicate variable name `{n}`"
            )));
        }
    }
    Ok(())
}

impl DirectedGraph {
    /// Graph with no edges over `names`.
    pub fn empty<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        validate_names(&names)?;
        let d = names.len();
        Ok(Self {
            names,
            adj: Array2::from_elem((d, d), false),
        })
    }

    /// Builds a graph from 0/1 rows, validating every invariant.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<u8>]) -> Result<Self> {
        validate_names(&names)?;
        let m = from_rows(rows, "adjacency")?;
        let d = names.len();
        if m.dim() != (d, d) && !(d == 0 && rows.is_empty()) {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}x{} but there are {d} names",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut adj = Array2::from_elem((d, d), false);
        for ((i, j), &v) in m.indexed_iter() {
            match v {
                0 => {}
                1 if i == j => {
                    return Err(Error::InvalidGraph(format!("self-loop on `{}`", names[i])))
                }
                1 => adj[(i, j)] = true,
                other => {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency entry ({i}, {j}) is {other}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(Self { names, adj })
    }

    /// Builds a graph from named edges.
    pub fn from_edges<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        edges: &[(&str, &str)],
    ) -> Result<Self> {
        let mut g = Self::empty(names)?;
        for (a, b) in edges {
            let i = g.index_of(a)?;
            let j = g.index_of(b)?;
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[(i, j)]
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::InvalidGraph(format!(
                "self-loop on `{}`",
                self.names[i]
            )));
        }
        self.adj[(i, j)] = true;
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        self.adj[(i, j)] = false;
    }

    /// Edges `(from, to)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .indexed_iter()
            .filter_map(|(ij, &e)| if e { Some(ij) } else { None })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    pub fn parents(&self, j: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.adj[(i, j)]).collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.adj[(i, j)]).collect()
    }

    pub fn adjacency(&self) -> &Array2<bool> {
        &self.adj
    }

    pub fn adjacency_rows(&self) -> Vec<Vec<u8>> {
        to_rows(&self.adj.mapv(u8::from).view())
    }

    /// Every edge reversed.
    pub fn transpose(&self) -> Self {
        Self {
            names: self.names.clone(),
            adj: self.adj.t().to_owned(),
        }
    }

    /// Same edge set, 0/1 entries as reals.
    pub fn to_weights<T: Scalar>(&self) -> WeightMatrix<T> {
        WeightMatrix {
            w: self.adj.mapv(|e| if e { T::one() } else { T::zero() }),
        }
    }

    /// Drops the node at `idx` together with all incident edges.
    pub(crate) fn without_node(&self, idx: usize) -> Self {
        let keep: Vec<usize> = (0..self.dim()).filter(|&k| k != idx).collect();
        let names = keep.iter().map(|&k| self.names[k].clone()).collect();
        let adj = Array2::from_shape_fn((keep.len(), keep.len()), |(a, b)| {
            self.adj[(keep[a], keep[b])]
        });
        Self { names, adj }
    }

    /// True iff there is no directed cycle. Decided by depth-first search,
    /// independently of the trace-exponential characterization.
    pub fn is_acyclic(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let d = self.dim();
        let mut mark = vec![Mark::New; d];
        for root in 0..d {
            if mark[root] != Mark::New {
                continue;
            }
            // (node, next child to inspect)
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Active;
            while let Some(top) = stack.last_mut() {
                let node = top.0;
                if top.1 == d {
                    mark[node] = Mark::Done;
                    stack.pop();
                    continue;
                }
                let child = top.1;
                top.1 += 1;
                if !self.adj[(node, child)] {
                    continue;
                }
                match mark[child] {
                    Mark::Active => return false,
                    Mark::New => {
                        mark[child] = Mark::Active;
                        stack.push((child, 0));
                    }
                    Mark::Done => {}
                }
            }
        }
        true
    }

    /// Kahn's algorithm, lowest index first among ready nodes. `None` if the
    /// graph is cyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let d = self.dim();
        let mut indegree: Vec<usize> = (0..d).map(|j| self.parents(j).len()).collect();
        let mut placed = vec![false; d];
        let mut order = Vec::with_capacity(d);
        while order.len() < d {
            let next = (0..d).find(|&j| !placed[j] && indegree[j] == 0)?;
            placed[next] = true;
            order.push(next);
            for c in self.children(next) {
                indegree[c] -= 1;
            }
        }
        Some(order)
    }
}

/// Real-valued `d x d` structural coefficient matrix. `w[i][j]` weights the
/// edge `i -> j`. The diagonal is always exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr<T>", into = "WeightsRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct WeightMatrix<T: Scalar> {
    w: Array2<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct WeightsRepr<T: Scalar> {
    w: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<WeightsRepr<T>> for WeightMatrix<T> {
    type Error = Error;

    fn try_from(r: WeightsRepr<T>) -> Result<Self> {
        WeightMatrix::new(from_rows(&r.w, "weights")?)
    }
}

impl<T: Scalar> From<WeightMatrix<T>> for WeightsRepr<T> {
    fn from(m: WeightMatrix<T>) -> Self {
        WeightsRepr {
            w: to_rows(&m.w.view()),
        }
    }
}

impl<T: Scalar> WeightMatrix<T> {
    /// Wraps a square, finite matrix. The diagonal is clamped to zero.
    pub fn new(mut w: Array2<T>) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix is {}x{}, expected square",
                w.nrows(),
                w.ncols()
            )));
        }
        if let Some(((i, j), _)) = w.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!("weight ({i}, {j})")));
        }
        w.diag_mut().fill(T::zero());
        Ok(Self { w })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        Self::new(from_rows(rows, "weights")?)
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            w: Array2::zeros((d, d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn as_array(&self) -> &Array2<T> {
        &self.w
    }

    pub fn into_array(self) -> Array2<T> {
        self.w
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        to_rows(&self.w.view())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.w[(i, j)]
    }

    /// Sets an off-diagonal entry; writes to the diagonal are ignored.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        if i != j {
            self.w[(i, j)] = v;
        }
    }

    pub fn l1_norm(&self) -> T {
        self.w.iter().fold(T::zero(), |acc, &x| acc + x.abs())
    }

    /// Binarizes by magnitude: edge `i -> j` iff `|w[i][j]| > tau`.
    pub fn threshold(&self, tau: T, names: &[String]) -> Result<DirectedGraph> {
        threshold(self, tau, names)
    }
}

/// Binarizes `w` by magnitude: edge `i -> j` iff `|w[i][j]| > tau`
/// (strictly above, so exact zeros never survive `tau = 0`).
pub fn threshold<T: Scalar>(
    w: &WeightMatrix<T>,
    tau: T,
    names: &[String],
) -> Result<DirectedGraph> {
    if tau.is_nan() || tau < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "threshold must be >= 0, got {tau}"
        )));
    }
    if names.len() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for a {}x{} weight matrix",
            names.len(),
            w.dim(),
            w.dim()
        )));
    }
    validate_names(names)?;
    let mut adj = w.w.mapv(|x| x.abs() > tau);
    adj.diag_mut().fill(false);
    Ok(DirectedGraph {
        names: names.to_vec(),
        adj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn single_edge_is_acyclic_two_cycle_is_not() {
        let g = DirectedGraph::from_edges(["a", "b"], &[("a", "b")]).unwrap();
        assert!(g.is_acyclic());
        let g = DirectedGraph::from_edges(["a", "b"], &[("a", "b"), ("b", "a")]).unwrap();
        assert!(!g.is_acyclic());
        assert!(g.topological_order().is_none());
    }

    #[test]
    fn long_cycle_detected() {
        let g = DirectedGraph::from_edges(
            ["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "b")],
        )
        .unwrap();
        assert!(!g.is_acyclic());
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = DirectedGraph::from_edges(["c", "b", "a"], &[("a", "b"), ("b", "c"), ("a", "c")])
            .unwrap();
        assert_eq!(g.topological_order().unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn invariants_rejected() {
        assert!(DirectedGraph::from_rows(names(2), &[vec![1, 0], vec![0, 0]]).is_err());
        assert!(DirectedGraph::from_rows(names(2), &[vec![0, 2], vec![0, 0]]).is_err());
        assert!(DirectedGraph::from_rows(names(2), &[vec![0, 1]]).is_err());
        assert!(DirectedGraph::empty(["a", "a"]).is_err());
        assert!(DirectedGraph::empty(["a", ""]).is_err());
        assert!(DirectedGraph::from_edges(["a"], &[("a", "z")]).is_err());
    }

    #[test]
    fn json_shape() {
        let g = DirectedGraph::from_edges(["a", "b"], &[("a", "b")]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"names":["a","b"],"adj":[[0,1],[0,0]]}"#);
        let back: DirectedGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<DirectedGraph>(r#"{"names":["a"],"adj":[[1]]}"#).is_err());
    }

    #[test]
    fn weights_clamp_diagonal_and_reject_nan() {
        let w = WeightMatrix::from_rows(&[vec![3.0, 1.0], vec![0.5, -2.0]]).unwrap();
        assert_eq!(w.get(0, 0), 0.0);
        assert_eq!(w.get(1, 1), 0.0);
        assert!(WeightMatrix::from_rows(&[vec![0.0, f64::NAN], vec![0.0, 0.0]]).is_err());
        assert!(WeightMatrix::<f64>::from_rows(&[vec![0.0, 1.0]]).is_err());
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"w":[[0.0,1.0],[0.5,0.0]]}"#);
    }

    #[test]
    fn threshold_keeps_strictly_larger_magnitudes() {
        let w = WeightMatrix::from_rows(&[
            vec![0.0, 0.05, 0.2],
            vec![-0.3, 0.0, 0.1],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let g = threshold(&w, 0.1, &names(3)).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 2), (1, 0)]);
    }

    #[test]
    fn threshold_zero_gives_exact_support() {
        let w = WeightMatrix::from_rows(&[vec![0.0, 1e-300], vec![0.0, 0.0]]).unwrap();
        let g = threshold(&w, 0.0, &names(2)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(threshold(&w, -1.0, &names(2)).is_err());
        assert!(threshold(&w, 0.1, &names(3)).is_err());
    }

    #[test]
    fn arctic_style_threshold_binarizes() {
        // tau = 0.1, the NOTEARS-with-prior threshold used for the Arctic preset
        let w = WeightMatrix::from_rows(&[
            vec![0.0, 0.42, 0.09],
            vec![0.0, 0.0, -0.11],
            vec![0.1, 0.0, 0.0],
        ])
        .unwrap();
        let g = w.threshold(0.1, &names(3)).unwrap();
        assert_eq!(
            g.adjacency_rows(),
            vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]
        );
    }
}
