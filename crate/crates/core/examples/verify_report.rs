//! Running property suites from code and reading the report.

use std::sync::Arc;

use sepcoset_lab::cli::verify::{run_verify, Ctx, SCHEMA};
use sepcoset_lab::cli::verify_config;
use sepcoset_lab::group_model::builtin_free_product;

fn main() -> sepcoset_lab::Result<()> {
    let model = Arc::new(builtin_free_product());
    let cfg = verify_config(model, "free_product", 1, 5, 7, 40, 300, None);
    let ctx = Ctx::new(cfg);
    let report = run_verify(&ctx, &["group_model".into(), "cber".into()])?;
    println!("{SCHEMA}: {} passed, {} failed", report.passed, report.failed);
    for p in &report.properties {
        println!("  {:<28} {:?} on {} instances", p.name, p.status, p.instances);
    }
    std::process::exit(report.exit_code());
}
