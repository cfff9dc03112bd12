//! The Y-set, Y-distances and the quasi-isometry inequality.

use std::sync::Arc;

use sepcoset_lab::group_model::{builtin_free_cyclic, GroupElement};
use sepcoset_lab::relative_graph::{ExplorationBudget, Explorer};
use sepcoset_lab::y_graph::YGraph;

fn main() -> sepcoset_lab::Result<()> {
    let fc = Arc::new(builtin_free_cyclic());
    let e = Arc::new(Explorer::new(fc.clone(), ExplorationBudget::ball(6, 6)));
    let y = YGraph::new(e, 3)?;
    let members = y.members()?;
    println!("|Y ∩ ball(6)| = {} at D=3", members.len());

    let one = GroupElement::identity();
    for w in ["(ab)^2", "(ab)^2a", "b(ab)^2b", "a^2b^2"] {
        let g = fc.parse_element(w)?;
        let q = y.qi_gap(&one, &g)?;
        println!(
            "{w:>14}: in Y {:5}  |S| = {}  d_Y = {}  bounds hold {}",
            y.y_member(&g)?,
            q.sep_count,
            q.d_y,
            q.lower_ok && q.upper_ok
        );
    }

    let pairs: Vec<_> = ["(ab)^2a", "b(ab)^2b"]
        .iter()
        .map(|w| Ok((one.clone(), fc.parse_element(w)?)))
        .collect::<sepcoset_lab::Result<_>>()?;
    let probe = y.acylindricity_probe(1, 2, 1, &pairs)?;
    println!(
        "acylindricity probe over {} pairs: at most {} elements move both points by <= 1",
        probe.pairs_used, probe.max_count
    );
    Ok(())
}
