//! Loading a model file with a Cayley table kept in a CSV.

use std::path::Path;
use std::sync::Arc;

use sepcoset_lab::group_model::{load_model_spec, GroupElement};
use sepcoset_lab::relative_graph::{ExplorationBudget, Explorer};
use sepcoset_lab::separating_cosets::sep_cosets;

fn main() -> sepcoset_lab::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
    let text = std::fs::read_to_string(dir.join("z2_s3.model")).expect("model file");
    let model = Arc::new(load_model_spec(&text, Some(&dir))?);
    println!("{}", model.describe());
    let e = Explorer::new(model.clone(), ExplorationBudget::ball(5, 5));
    let g = model.parse_element("ab[1]cb[4]")?;
    let one = GroupElement::identity();
    println!("d(1, {}) = {}", model.format_element(&g), e.dist(&one, &g)?);
    for r in sep_cosets(&e, &one, &g, 1)? {
        println!("  {}H", r.view(&model).coset);
    }

    let bad = std::fs::read_to_string(dir.join("corrupted.model")).expect("model file");
    match load_model_spec(&bad, Some(&dir)) {
        Ok(_) => println!("corrupted table loaded?"),
        Err(err) => println!("corrupted table rejected (exit code {}): {err}", err.exit_code()),
    }
    Ok(())
}
