//! Separating cosets of a pair, their order, and the three-way split.

use std::sync::Arc;

use sepcoset_lab::group_model::{builtin_free_cyclic, builtin_free_product, GroupElement};
use sepcoset_lab::relative_graph::{ExplorationBudget, Explorer, Fraction};
use sepcoset_lab::separating_cosets::{sep_cosets, triple_split};

fn main() -> sepcoset_lab::Result<()> {
    let fc = Arc::new(builtin_free_cyclic());
    let tube = Explorer::new(fc.clone(), ExplorationBudget::tube(3, 8));
    let one = GroupElement::identity();
    let g = fc.parse_element("(ab)^3a(ab)^3b")?;
    println!("S(1, {}; 5) on free_cyclic:", fc.format_element(&g));
    for r in sep_cosets(&tube, &one, &g, 5)? {
        let v = r.view(&fc);
        println!("  #{} coset {}H  entrance {}  exit {}  gap {}  distance {}", v.position, v.coset, v.entrance, v.exit, v.gap, v.distance);
    }
    // Raising D past the gap empties the set.
    println!("S(1, g; 6) has {} cosets", sep_cosets(&tube, &one, &g, 6)?.len());

    let fp = Arc::new(builtin_free_product());
    let ball = Explorer::new(fp.clone(), ExplorationBudget::ball(7, 7));
    let f = fp.parse_element("ab^2a")?;
    let g = fp.parse_element("ab^2a^2b^3")?;
    let z = fp.parse_element("b")?;
    let split = triple_split(&ball, &f, &g, &z, 1, Some(Fraction::ZERO))?;
    println!(
        "split of S(f, g) by z: {} toward f, {} toward g, {} left over",
        split.first.len(),
        split.second.len(),
        split.rest.len()
    );
    Ok(())
}
