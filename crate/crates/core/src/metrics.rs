//! Comparison of a predicted graph with a ground-truth graph.
//!
//! Confusion counts are cell-wise over ordered off-diagonal pairs, so a
//! reversed edge shows up as one false positive and one false negative. SHD
//! counts it once. Rates with a zero denominator are `None` and render as
//! `-`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// Pairs where truth has only `i -> j` and the prediction only `j -> i`.
    pub reversed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub fdr: Option<f64>,
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nhd: f64,
    pub nhd_ratio: f64,
    pub shd: usize,
    pub edge_count_pred: usize,
    pub edge_count_true: usize,
    pub fdr: Option<f64>,
    pub fpr: Option<f64>,
    pub tpr: Option<f64>,
}

fn check_names(pred: &DirectedGraph, truth: &DirectedGraph) -> Result<()> {
    if pred.names() != truth.names() {
        return Err(Error::NameMismatch);
    }
    Ok(())
}

pub fn confusion(pred: &DirectedGraph, truth: &DirectedGraph) -> Result<ConfusionCounts> {
    check_names(pred, truth)?;
    let d = truth.dim();
    let mut c = ConfusionCounts::default();
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            match (pred.has_edge(i, j), truth.has_edge(i, j)) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
            let truth_only_ij = truth.has_edge(i, j) && !truth.has_edge(j, i);
            let pred_only_ji = pred.has_edge(j, i) && !pred.has_edge(i, j);
            if truth_only_ij && pred_only_ji {
                c.reversed += 1;
            }
        }
    }
    Ok(c)
}

/// Missing + extra + reversed edges, each reversal counted once.
pub fn shd(pred: &DirectedGraph, truth: &DirectedGraph) -> Result<usize> {
    let c = confusion(pred, truth)?;
    Ok(c.fn_ + c.fp - c.reversed)
}

fn hamming(pred: &DirectedGraph, truth: &DirectedGraph) -> usize {
    pred.adjacency()
        .iter()
        .zip(truth.adjacency().iter())
        .filter(|(a, b)| a != b)
        .count()
}

/// Hamming distance over `d^2`.
pub fn nhd(pred: &DirectedGraph, truth: &DirectedGraph) -> Result<f64> {
    check_names(pred, truth)?;
    let d = truth.dim();
    if d == 0 {
        return Ok(0.0);
    }
    Ok(hamming(pred, truth) as f64 / (d * d) as f64)
}

/// NHD divided by the worst NHD reachable with the same two edge counts.
/// An empty prediction uses denominator 1.
pub fn nhd_ratio(pred: &DirectedGraph, truth: &DirectedGraph) -> Result<f64> {
    let num = nhd(pred, truth)?;
    let e_pred = pred.edge_count();
    if e_pred == 0 {
        return Ok(num);
    }
    let d = truth.dim();
    let cells = d * (d - 1);
    let total = e_pred + truth.edge_count();
    // disjoint if possible, otherwise the forced overlap cancels out twice
    let worst = if total <= cells {
        total
    } else {
        2 * cells - total
    };
    if worst == 0 {
        return Ok(0.0);
    }
    Ok(num / (worst as f64 / (d * d) as f64))
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn rates(c: &ConfusionCounts) -> Rates {
    Rates {
        fdr: ratio(c.fp, c.fp + c.tp),
        fpr: ratio(c.fp, c.fp + c.tn),
        tpr: ratio(c.tp, c.tp + c.fn_),
    }
}

pub fn evaluate(pred: &DirectedGraph, truth: &DirectedGraph) -> Result<MetricsReport> {
    let c = confusion(pred, truth)?;
    let r = rates(&c);
    Ok(MetricsReport {
        nhd: nhd(pred, truth)?,
        nhd_ratio: nhd_ratio(pred, truth)?,
        shd: c.fn_ + c.fp - c.reversed,
        edge_count_pred: pred.edge_count(),
        edge_count_true: truth.edge_count(),
        fdr: r.fdr,
        fpr: r.fpr,
        tpr: r.tpr,
    })
}

pub(crate) fn fmt_rate(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

impl MetricsReport {
    pub const HEADER: [&'static str; 7] =
        ["NHD", "NHD Ratio", "SHD", "No. Edge", "FDR", "FPR", "TPR"];

    /// Values in table column order.
    pub fn row(&self) -> [String; 7] {
        [
            format!("{:.2}", self.nhd),
            format!("{:.2}", self.nhd_ratio),
            self.shd.to_string(),
            self.edge_count_pred.to_string(),
            fmt_rate(self.fdr),
            fmt_rate(self.fpr),
            fmt_rate(self.tpr),
        ]
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", Self::HEADER.join("\t"))?;
        write!(f, "{}", self.row().join("\t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::build_physics_graph;

    fn g(names: &[&str], edges: &[(&str, &str)]) -> DirectedGraph {
        DirectedGraph::from_edges(names.iter().copied(), edges).unwrap()
    }

    #[test]
    fn identical_graphs() {
        let t = build_physics_graph(7).unwrap();
        let c = confusion(&t, &t).unwrap();
        assert_eq!((c.fp, c.fn_, c.tp), (0, 0, 10));
        let r = evaluate(&t, &t).unwrap();
        assert_eq!(r.shd, 0);
        assert_eq!(r.nhd, 0.0);
        assert_eq!(r.nhd_ratio, 0.0);
        assert_eq!((r.fdr, r.fpr, r.tpr), (Some(0.0), Some(0.0), Some(1.0)));
    }

    #[test]
    fn empty_prediction() {
        let t = build_physics_graph(7).unwrap();
        let e = DirectedGraph::empty(t.names().iter().cloned()).unwrap();
        let c = confusion(&e, &t).unwrap();
        assert_eq!((c.fn_, c.tp, c.tn), (10, 0, 42 - 10));
        assert_eq!(shd(&e, &t).unwrap(), 10);
        let r = rates(&c);
        assert_eq!((r.fdr, r.fpr, r.tpr), (None, Some(0.0), Some(0.0)));
    }

    #[test]
    fn single_reversal() {
        let t = g(&["A", "B"], &[("A", "B")]);
        let p = g(&["A", "B"], &[("B", "A")]);
        let c = confusion(&p, &t).unwrap();
        assert_eq!((c.fp, c.fn_, c.reversed), (1, 1, 1));
        assert_eq!(shd(&p, &t).unwrap(), 1);
    }

    #[test]
    fn bidirected_prediction_is_not_a_reversal() {
        let t = g(&["A", "B"], &[("A", "B")]);
        let p = g(&["A", "B"], &[("A", "B"), ("B", "A")]);
        let c = confusion(&p, &t).unwrap();
        assert_eq!((c.tp, c.fp, c.reversed), (1, 1, 0));
        assert_eq!(shd(&p, &t).unwrap(), 1);
    }

    #[test]
    fn maximal_disagreement_d3() {
        let names = ["a", "b", "c"];
        let full = g(
            &names,
            &[
                ("a", "b"),
                ("a", "c"),
                ("b", "a"),
                ("b", "c"),
                ("c", "a"),
                ("c", "b"),
            ],
        );
        let empty = g(&names, &[]);
        assert_eq!(nhd(&full, &empty).unwrap(), 6.0 / 9.0);
    }

    #[test]
    fn disjoint_edge_sets_hit_worst_case() {
        let names = ["a", "b", "c", "d"];
        let t = g(&names, &[("a", "b"), ("c", "d")]);
        let p = g(&names, &[("b", "c"), ("d", "a"), ("a", "c")]);
        assert_eq!(nhd(&p, &t).unwrap() * 16.0, 5.0);
        assert!((nhd_ratio(&p, &t).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn overfull_worst_case() {
        // 3 nodes, 6 cells; 5 + 4 edges must overlap in at least 3 cells
        let names = ["a", "b", "c"];
        let t = g(&names, &[("a", "b"), ("a", "c"), ("b", "c"), ("c", "a")]);
        let p = g(
            &names,
            &[("a", "b"), ("a", "c"), ("b", "a"), ("b", "c"), ("c", "b")],
        );
        // worst Hamming = 2*6 - 9 = 3
        let h = nhd(&p, &t).unwrap() * 9.0;
        assert!((nhd_ratio(&p, &t).unwrap() - h / 3.0).abs() < 1e-12);
    }

    #[test]
    fn arctic_empty_row() {
        // 12 variables, 48 true edges, nothing predicted
        let names: Vec<String> = (0..12).map(|i| format!("v{i}")).collect();
        let mut truth = DirectedGraph::empty(names.clone()).unwrap();
        let mut added = 0;
        'outer: for i in 0..12 {
            for j in (i + 1)..12 {
                truth.add_edge(i, j).unwrap();
                added += 1;
                if added == 48 {
                    break 'outer;
                }
            }
        }
        assert_eq!(truth.edge_count(), 48);
        let pred = DirectedGraph::empty(names).unwrap();
        let r = evaluate(&pred, &truth).unwrap();
        assert_eq!(format!("{:.2}", r.nhd), "0.33");
        assert_eq!(r.nhd, 48.0 / 144.0);
        assert_eq!(r.nhd_ratio, r.nhd);
        assert_eq!(r.shd, 48);
        assert_eq!((r.fdr, r.fpr, r.tpr), (None, Some(0.0), Some(0.0)));
        assert_eq!(r.row()[4..], ["-", "0.00", "0.00"]);
    }

    #[test]
    fn rates_arithmetic() {
        let c = ConfusionCounts {
            tp: 5,
            fp: 5,
            tn: 10,
            fn_: 5,
            reversed: 0,
        };
        let r = rates(&c);
        assert_eq!(r.fdr, Some(0.5));
        assert_eq!(r.fpr, Some(1.0 / 3.0));
        assert_eq!(r.tpr, Some(0.5));
    }

    #[test]
    fn transposed_prediction() {
        let t = g(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        let r = evaluate(&t.transpose(), &t).unwrap();
        assert_eq!(r.shd, 3);
        assert_eq!(r.tpr, Some(0.0));
    }

    #[test]
    fn name_mismatch() {
        let a = g(&["a", "b"], &[]);
        let b = g(&["b", "a"], &[]);
        assert!(matches!(evaluate(&a, &b), Err(Error::NameMismatch)));
    }

    #[test]
    fn json_uses_null_for_undefined() {
        let t = g(&["a", "b"], &[("a", "b")]);
        let e = g(&["a", "b"], &[]);
        let s = serde_json::to_string(&evaluate(&e, &t).unwrap()).unwrap();
        assert!(s.contains(r#""fdr":null"#));
    }
}
