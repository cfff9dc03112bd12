//! Estimates of C, the four-point delta and the pigeonhole constant K.

use std::sync::Arc;

use sepcoset_lab::group_model::{builtin_free_cyclic, builtin_free_product, GroupModel};
use sepcoset_lab::rays::pigeonhole_k;
use sepcoset_lab::relative_graph::{
    delta_estimate, estimate_c, sample_points, ConstantsReport, ExplorationBudget, Explorer, NgonSpec,
};

fn report(name: &str, model: GroupModel) -> sepcoset_lab::Result<()> {
    let e = Explorer::new(Arc::new(model), ExplorationBudget::ball(6, 6));
    let spec = NgonSpec {
        sizes: vec![2, 3, 4, 5],
        count: 2000,
        vertex_radius: 3,
        seed: 7,
    };
    let est = estimate_c(&e, &spec)?;
    let pts = sample_points(e.model(), 3, 16, 7);
    let delta = delta_estimate(&e, &pts)?;
    let k = pigeonhole_k(&e, 4)?;
    println!(
        "{name}: C = {} over {} polygons, default D = {}, delta <= {} on {} points, K(4) = {}",
        est.c_hat,
        est.samples,
        ConstantsReport::auto_d(est.c_hat),
        delta.delta,
        delta.points,
        k.k
    );
    Ok(())
}

fn main() -> sepcoset_lab::Result<()> {
    report("free_cyclic", builtin_free_cyclic())?;
    report("free_product", builtin_free_product())
}
