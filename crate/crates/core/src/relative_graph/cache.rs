//! Plain-text cache of ball graphs.
//!
//! ```text
//! sepcoset-ball-cache 1
//! model <description>
//! budget <R> <L>
//! vertices <n>
//! <word>\t<label>:<target>,<label>:<target>,...
//! ```

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::{Alphabet, Edge, ExplorationBudget, LocalGraph};
use crate::error::{LabError, Result};
use crate::group_model::GroupModel;

pub const BALL_CACHE_VERSION: u32 = 1;

pub fn write_ball_cache(
    out: &mut impl Write,
    model: &GroupModel,
    budget: &ExplorationBudget,
    graph: &LocalGraph,
) -> Result<()> {
    let io = |e: std::io::Error| LabError::Load(e.to_string());
    writeln!(out, "sepcoset-ball-cache {BALL_CACHE_VERSION}").map_err(io)?;
    writeln!(out, "model {}", model.describe()).map_err(io)?;
    writeln!(out, "budget {} {}", budget.x_radius, budget.h_budget).map_err(io)?;
    writeln!(out, "vertices {}", graph.len()).map_err(io)?;
    for v in 0..graph.len() as u32 {
        let edges: Vec<String> = graph
            .out(v)
            .iter()
            .map(|e| format!("{}:{}", e.label, e.to))
            .collect();
        writeln!(out, "{}\t{}", model.format_element(graph.vertex(v)), edges.join(",")).map_err(io)?;
    }
    Ok(())
}

/// Reads a cache written for the same model and budget.
pub fn read_ball_cache(
    input: impl BufRead,
    model: &GroupModel,
    budget: &ExplorationBudget,
) -> Result<LocalGraph> {
    let mut lines = input.lines();
    let mut next = |what: &str| -> Result<String> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(LabError::Load(e.to_string())),
            None => Err(LabError::Load(format!("cache truncated before {what}"))),
        }
    };
    let header = next("header")?;
    if header != format!("sepcoset-ball-cache {BALL_CACHE_VERSION}") {
        return Err(LabError::Load(format!("unsupported cache header {header:?}")));
    }
    let m = next("model")?;
    if m != format!("model {}", model.describe()) {
        return Err(LabError::Load(format!("cache is for another model: {m:?}")));
    }
    let b = next("budget")?;
    if b != format!("budget {} {}", budget.x_radius, budget.h_budget) {
        return Err(LabError::Load(format!("cache is for another budget: {b:?}")));
    }
    let n: usize = next("vertex count")?
        .strip_prefix("vertices ")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| LabError::Load("bad vertex count".into()))?;
    let mut vertices = Vec::with_capacity(n);
    let mut adj = Vec::with_capacity(n);
    for i in 0..n {
        let line = next("vertex line")?;
        let (word, edges) = line
            .split_once('\t')
            .ok_or_else(|| LabError::Load(format!("line {}: missing tab", i + 5)))?;
        vertices.push(model.parse_element(word).map_err(|e| LabError::Load(e.to_string()))?);
        let mut out = Vec::new();
        for item in edges.split(',').filter(|s| !s.is_empty()) {
            let parsed = item
                .split_once(':')
                .and_then(|(l, t)| Some((l.parse().ok()?, t.parse().ok()?)));
            let Some((label, to)) = parsed else {
                return Err(LabError::Load(format!("line {}: bad edge {item:?}", i + 5)));
            };
            out.push(Edge { to, label });
        }
        adj.push(out);
    }
    let alphabet = Arc::new(Alphabet::new(model, budget.h_budget));
    LocalGraph::from_parts(
        alphabet,
        vertices,
        adj,
        format!("ball radius {}", budget.x_radius),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_model::{builtin_free_cyclic, builtin_free_product};
    use crate::relative_graph::Explorer;

    #[test]
    fn round_trip() {
        let model = Arc::new(builtin_free_cyclic());
        let budget = ExplorationBudget::ball(4, 4);
        let e = Explorer::new(model.clone(), budget);
        let g = e.ball_graph();
        let mut buf = Vec::new();
        write_ball_cache(&mut buf, &model, &budget, &g).unwrap();
        let back = read_ball_cache(buf.as_slice(), &model, &budget).unwrap();
        assert_eq!(back.len(), g.len());
        assert_eq!(back.edge_count(), g.edge_count());
        for v in 0..g.len() as u32 {
            assert_eq!(back.vertex(v), g.vertex(v));
            assert_eq!(back.out(v), g.out(v));
        }
    }

    #[test]
    fn mismatches_are_load_errors() {
        let model = builtin_free_cyclic();
        let budget = ExplorationBudget::ball(3, 3);
        let e = Explorer::new(Arc::new(model.clone()), budget);
        let mut buf = Vec::new();
        write_ball_cache(&mut buf, &model, &budget, &e.ball_graph()).unwrap();
        let other = builtin_free_product();
        assert!(matches!(
            read_ball_cache(buf.as_slice(), &other, &budget),
            Err(LabError::Load(_))
        ));
        assert!(read_ball_cache(buf.as_slice(), &model, &ExplorationBudget::ball(4, 3)).is_err());
        let text = String::from_utf8(buf).unwrap().replace(":1,", ":x,");
        assert!(read_ball_cache(text.as_bytes(), &model, &budget).is_err());
        assert!(read_ball_cache("garbage\n".as_bytes(), &model, &budget).is_err());
    }
}
