//! Relative distances and geodesic enumeration in both built-in models.

use std::sync::Arc;

use sepcoset_lab::group_model::{builtin_free_cyclic, builtin_free_product, GroupElement};
use sepcoset_lab::relative_graph::{ExplorationBudget, Explorer};

fn main() -> sepcoset_lab::Result<()> {
    let fc = Arc::new(builtin_free_cyclic());
    let e = Explorer::new(fc.clone(), ExplorationBudget::ball(8, 8));
    let one = GroupElement::identity();
    for w in ["a", "ab", "(ab)^3a", "a^2b^-1", "ba"] {
        let g = fc.parse_element(w)?;
        let d = e.rel_distance(&one, &g)?;
        println!("free_cyclic  d(1, {w}) = {} (x-length {}, stable {})", d.value, fc.x_length(&g), d.stable);
    }

    let g = fc.parse_element("abab")?;
    let list = e.all_geodesics(&one, &g)?;
    println!("geodesics 1 -> abab: {} of length {}", list.paths.len(), list.length);
    for p in &list.paths {
        println!("  {}", fc.format_labels(&p.labels).join(" "));
    }

    // In Z/3 * Z/5 every syllable is one letter.
    let fp = Arc::new(builtin_free_product());
    let e = Explorer::new(fp.clone(), ExplorationBudget::ball(6, 6));
    let g = fp.parse_element("ab^2a^2b")?;
    println!("free_product d(1, ab^2a^2b) = {}", e.dist(&one, &g)?);
    Ok(())
}
