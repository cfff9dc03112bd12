//! Windows between two ray directions, the penetration dichotomy and the
//! three-way split for a triple of directions.

use std::sync::Arc;

use sepcoset_lab::boundary_pairs::{central_window, dichotomy_check, f4_split};
use sepcoset_lab::group_model::builtin_free_product;
use sepcoset_lab::rays::RayScheme;
use sepcoset_lab::relative_graph::{ExplorationBudget, Explorer, Fraction};

fn main() -> sepcoset_lab::Result<()> {
    let fp = Arc::new(builtin_free_product());
    let e = Explorer::new(fp.clone(), ExplorationBudget::tube(3, 3));
    let xi = RayScheme::parse(&fp, "period=[a, b]")?;
    let eta = RayScheme::parse(&fp, "period=[b, a]")?;
    let zeta = RayScheme::parse(&fp, "period=[a^2, b^3]")?;

    let w = central_window(&e, &xi, &eta, 4, 1)?;
    println!("window of length {} has {} separating cosets", w.path.len(), w.records.len());
    for r in &w.records {
        println!("  {}H (family {})", fp.format_element(&r.coset.rep), r.coset.family);
    }

    let c = Some(Fraction::ZERO);
    let b = w.records[1].coset.clone();
    let side = dichotomy_check(&e, &xi, &eta, &zeta, &b, 4, 1, c)?;
    println!("every geodesic on side {side:?} passes through {}H", fp.format_element(&b.rep));

    let split = f4_split(&e, &xi, &eta, &zeta, 6, 1, c)?;
    println!(
        "S(xi, eta) = {} + {} + {} (the last part is at most 4)",
        split.first.len(),
        split.second.len(),
        split.rest.len()
    );
    Ok(())
}
