//! Hard-coded physical-commonsense benchmark graphs around water evaporation.

use super::subgraph_reduce;
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

/// Node order of the 7-variable graph.
pub const PHYSICS_NODES: [&str; 7] = ["TSI", "RNFL", "Wgt", "SAT", "ER", "WS", "MC"];

/// Rainfall, total solar irradiance, surface air temperature, wind speed,
/// evaporation rate, moisture content and weight of an object.
pub const PHYSICS_EDGES: [(&str, &str); 10] = [
    ("TSI", "SAT"),
    ("TSI", "ER"),
    ("TSI", "WS"),
    ("SAT", "ER"),
    ("WS", "SAT"),
    ("WS", "ER"),
    ("ER", "RNFL"),
    ("ER", "MC"),
    ("RNFL", "MC"),
    ("MC", "Wgt"),
];

/// Long-form names used when prompting, keyed by abbreviation.
pub const PHYSICS_LONG_NAMES: [(&str, &str); 7] = [
    ("TSI", "Total Solar Irradiance"),
    ("RNFL", "Rainfall"),
    ("Wgt", "Weight of object"),
    ("SAT", "Surface Air Temperature"),
    ("ER", "Evaporation Rate"),
    ("WS", "Wind Speed"),
    ("MC", "Moisture Content of object"),
];

/// The 3-, 5- or 7-node physics graph. Smaller sizes are obtained from the
/// 7-node graph by [`subgraph_reduce`]: size 5 drops WS and Wgt, size 3
/// additionally drops RNFL and TSI.
pub fn build_physics_graph(size: usize) -> Result<DirectedGraph> {
    let full = DirectedGraph::from_edges(PHYSICS_NODES, &PHYSICS_EDGES)?;
    let removals: &[&str] = match size {
        7 => &[],
        5 => &["WS", "Wgt"],
        3 => &["WS", "Wgt", "RNFL", "TSI"],
        other => return Err(Error::UnsupportedSize(other)),
    };
    removals
        .iter()
        .try_fold(full, |g, node| subgraph_reduce(&g, node))
}
