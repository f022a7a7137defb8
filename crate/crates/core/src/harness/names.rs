//! Expanded variable names for prompting.

use std::collections::BTreeMap;

/// Full protein names for the usual column spellings of the Sachs
/// flow-cytometry data. Keys are lowercase.
pub const SACHS_PROMPT_NAMES: [(&str, &str); 22] = [
    ("raf", "Raf kinase"),
    ("praf", "Raf kinase"),
    ("mek", "MEK kinase (MAPK/ERK kinase)"),
    ("pmek", "MEK kinase (MAPK/ERK kinase)"),
    ("plcg", "Phospholipase C gamma"),
    ("plcgamma", "Phospholipase C gamma"),
    ("pip2", "Phosphatidylinositol 4,5-bisphosphate"),
    ("pip3", "Phosphatidylinositol 3,4,5-trisphosphate"),
    ("erk", "Extracellular signal-regulated kinase"),
    ("p44/42", "Extracellular signal-regulated kinase"),
    ("akt", "Protein kinase B (Akt)"),
    ("pakts473", "Protein kinase B (Akt)"),
    ("pka", "Protein kinase A"),
    ("pkc", "Protein kinase C"),
    ("p38", "p38 mitogen-activated protein kinase"),
    ("jnk", "c-Jun N-terminal kinase"),
    ("pjnk", "c-Jun N-terminal kinase"),
    ("plc", "Phospholipase C gamma"),
    ("erk1/2", "Extracellular signal-regulated kinase"),
    ("mek1/2", "MEK kinase (MAPK/ERK kinase)"),
    ("pip", "Phosphatidylinositol 4,5-bisphosphate"),
    ("raf1", "Raf kinase"),
];

/// Replaces each name found in `table` (case-insensitively); names without
/// an entry are kept as they are.
pub fn expand_names<'a>(
    names: &[String],
    table: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Vec<String> {
    let map: BTreeMap<String, &str> = table
        .into_iter()
        .map(|(k, v)| (k.to_lowercase(), v))
        .collect();
    names
        .iter()
        .map(|n| {
            map.get(&n.to_lowercase())
                .map_or_else(|| n.clone(), |v| v.to_string())
        })
        .collect()
}
