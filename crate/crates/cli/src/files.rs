//! Reading and writing graphs on disk. `.json` files use the JSON format,
//! anything else the edge-list text format.

use anyhow::{Context, Result};
use graph_frechet::graph::io;
use graph_frechet::Graph;
use std::path::Path;

pub fn parse_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let graph = if is_json(path) {
        io::parse_json(&text)
    } else {
        io::parse_edge_list(&text)
    };
    graph.with_context(|| format!("cannot parse {}", path.display()))
}

pub fn write_graph(g: &Graph, path: &Path) -> Result<()> {
    let text = if is_json(path) {
        io::write_json(g)
    } else {
        io::write_edge_list(g)
    };
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}
