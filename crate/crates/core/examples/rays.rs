//! Ray schemes: separating cosets along a ray, lex-min prefixes and
//! alignment of two schemes with the same limit.

use std::sync::Arc;

use sepcoset_lab::group_model::builtin_free_cyclic;
use sepcoset_lab::rays::{align_same_limit, concat_point, phi_prefix_scheme, ray_sep_cosets, RayScheme};
use sepcoset_lab::relative_graph::{ExplorationBudget, Explorer};

fn main() -> sepcoset_lab::Result<()> {
    let fc = Arc::new(builtin_free_cyclic());
    let e = Explorer::new(fc.clone(), ExplorationBudget::tube(3, 8));
    let s = RayScheme::parse(&fc, "period=[h:ab^3, x:a]")?;
    for n in [2, 4, 8, 12] {
        println!("depth {n:>2}: {} separating cosets", ray_sep_cosets(&e, &s, n, 5)?.len());
    }

    let phi = phi_prefix_scheme(&e, &s, 12, 5)?;
    println!("lex-min toward {}: {}", phi.target, fc.format_labels(phi.certified()).join(" "));

    let x = fc.parse_element("b^2a")?;
    let cp = concat_point(&e, &x, &s)?;
    println!("geodesics from {} join the ray at depth {}", fc.format_element(&x), cp.k);

    let t = RayScheme::parse(&fc, "base=a^-1 prefix=[x:a] period=[h:ab^3, x:a]")?;
    for a in align_same_limit(&e, &s, &t, 5, 12)? {
        println!("coset {}H: entrance gap {}, exit gap {}", a.coset_rep, a.entrance_gap, a.exit_gap);
    }
    Ok(())
}
