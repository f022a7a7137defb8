use ndarray::Array2;
use proptest::prelude::*;

use priorcd::graph::{acyclicity_value, threshold, DirectedGraph, WeightMatrix};
use priorcd::metrics::evaluate;
use priorcd::prior::{aggregate_mean, assemble_prior, certainty, Answer, PairVerdict, PriorMatrix};
use priorcd::solver::{sim_loss, PriorTarget, SolverConfig};
use priorcd::synthetic::subgraph_reduce;

fn names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("n{i}")).collect()
}

fn weights(d: usize) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(-3.0..3.0f64, d * d).prop_map(move |v| {
        let mut w = Array2::from_shape_vec((d, d), v).unwrap();
        w.diag_mut().fill(0.0);
        w
    })
}

fn graph(d: usize) -> impl Strategy<Value = DirectedGraph> {
    prop::collection::vec(any::<bool>(), d * d).prop_map(move |bits| {
        let mut g = DirectedGraph::empty(names(d)).unwrap();
        for i in 0..d {
            for j in 0..d {
                if i != j && bits[i * d + j] {
                    g.add_edge(i, j).unwrap();
                }
            }
        }
        g
    })
}

/// Random DAG: only edges from a lower to a higher position of a shuffled order.
fn dag(d: usize) -> impl Strategy<Value = DirectedGraph> {
    (
        Just((0..d).collect::<Vec<_>>()).prop_shuffle(),
        prop::collection::vec(any::<bool>(), d * d),
    )
        .prop_map(move |(order, bits)| {
            let mut g = DirectedGraph::empty(names(d)).unwrap();
            for a in 0..d {
                for b in a + 1..d {
                    if bits[a * d + b] {
                        g.add_edge(order[a], order[b]).unwrap();
                    }
                }
            }
            g
        })
}

fn reachable(g: &DirectedGraph, from: usize, to: usize) -> bool {
    let mut seen = vec![false; g.dim()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for c in g.children(v) {
            if c == to {
                return true;
            }
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    false
}

proptest! {
    #[test]
    fn raising_the_threshold_only_removes_edges(w in weights(5), lo in 0.0..1.5f64, extra in 0.0..1.5f64) {
        let w = WeightMatrix::new(w).unwrap();
        let low = threshold(&w, lo, &names(5)).unwrap();
        let high = threshold(&w, lo + extra, &names(5)).unwrap();
        for (i, j) in high.edges() {
            prop_assert!(low.has_edge(i, j));
        }
    }

    #[test]
    fn acyclicity_ignores_signs(w in weights(4), flips in prop::collection::vec(any::<bool>(), 16)) {
        let flipped = Array2::from_shape_fn((4, 4), |(i, j)| if flips[i * 4 + j] { -w[(i, j)] } else { w[(i, j)] });
        let a = acyclicity_value(&WeightMatrix::new(w).unwrap()).unwrap();
        let b = acyclicity_value(&WeightMatrix::new(flipped).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn acyclicity_vanishes_exactly_on_dags(g in graph(4), scale in 0.5..2.0f64) {
        let w = WeightMatrix::new(g.to_weights::<f64>().into_array() * scale).unwrap();
        let h = acyclicity_value(&w).unwrap();
        prop_assert_eq!(h <= 1e-10, g.is_acyclic());
    }

    #[test]
    fn reduction_preserves_reachability(g in dag(6), drop in 0usize..6) {
        let name = format!("n{drop}");
        let r = subgraph_reduce(&g, &name).unwrap();
        prop_assert!(r.is_acyclic());
        let kept: Vec<usize> = (0..6).filter(|&v| v != drop).collect();
        for (a, &u) in kept.iter().enumerate() {
            for (b, &v) in kept.iter().enumerate() {
                if u != v {
                    prop_assert_eq!(reachable(&r, a, b), reachable(&g, u, v));
                }
            }
        }
    }

    #[test]
    fn metrics_are_consistent_under_swap(p in graph(5), t in graph(5)) {
        let pt = evaluate(&p, &t).unwrap();
        let tp = evaluate(&t, &p).unwrap();
        prop_assert_eq!(pt.nhd, tp.nhd);
        prop_assert_eq!(pt.shd, tp.shd);
        prop_assert_eq!(pt.edge_count_pred, tp.edge_count_true);
        // one side's precision is the other side's recall
        match (pt.fdr, tp.tpr) {
            (Some(f), Some(r)) => prop_assert!((f + r - 1.0).abs() < 1e-12),
            (f, r) => prop_assert!(f.is_none() && r.is_none()),
        }
        let same = evaluate(&p, &p).unwrap();
        prop_assert_eq!((same.shd, same.nhd), (0, 0.0));
        prop_assert!(pt.nhd_ratio >= 0.0 && pt.nhd_ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn similarity_term_is_nonnegative(w in weights(4), k in prop::collection::vec(0.0..=1.0f64, 16), lambda in 0.0..3.0f64) {
        let mut k = Array2::from_shape_vec((4, 4), k).unwrap();
        k.diag_mut().fill(0.0);
        let prior = PriorTarget::new(names(4), k).unwrap();
        let cfg = SolverConfig { lambda_sim: lambda, ..SolverConfig::default() };
        let s = sim_loss(&WeightMatrix::new(w).unwrap(), &prior, &cfg).unwrap();
        prop_assert!(s >= 0.0);
    }

    #[test]
    fn certainty_lies_in_unit_interval(gs in prop::collection::vec(graph(4), 1..6), eps in 1e-3..2.0f64) {
        let priors: Vec<PriorMatrix> = gs.into_iter().map(PriorMatrix::from_graph).collect();
        let c = certainty(&priors, eps).unwrap();
        prop_assert!(c.values().iter().all(|&v| v > 0.0 && v <= 1.0));
        let mean = aggregate_mean(&priors).unwrap();
        prop_assert!(mean.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn assembly_ignores_verdict_order(
        letters in prop::collection::vec(0usize..4, 10),
        swap in prop::collection::vec(any::<bool>(), 10),
        order in Just((0..10).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let n = names(5);
        let pairs: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        let verdicts: Vec<PairVerdict> = pairs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| PairVerdict::new(&n[a], &n[b], Answer::ALL[letters[k]]).unwrap())
            .collect();
        // the same facts phrased from the other side of each pair
        let rephrased: Vec<PairVerdict> = order
            .iter()
            .map(|&k| {
                let (a, b) = pairs[k];
                let answer = Answer::ALL[letters[k]];
                if swap[k] {
                    let mirrored = match answer {
                        Answer::A => Answer::B,
                        Answer::B => Answer::A,
                        other => other,
                    };
                    PairVerdict::new(&n[b], &n[a], mirrored).unwrap()
                } else {
                    PairVerdict::new(&n[a], &n[b], answer).unwrap()
                }
            })
            .collect();
        prop_assert_eq!(assemble_prior(&verdicts, &n).unwrap(), assemble_prior(&rephrased, &n).unwrap());
    }
}
