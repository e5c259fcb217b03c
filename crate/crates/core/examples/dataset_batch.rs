//! A small rpm × bistatic-angle dataset, written with a manifest and then
//! checked against the file hashes.

use std::path::Path;

use udar::runner::{batch_generate, verify_manifest, BatchOptions, SweepAxis};

fn main() -> udar::Result<()> {
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/minimal.toml");
    let out = std::env::temp_dir().join("udar-examples/dataset");
    let opts = BatchOptions {
        workers: Some(4),
        output_dir: Some(out.clone()),
        sweeps: vec![SweepAxis::parse_arg("rpm=1000:2000:500")?, SweepAxis::parse_arg("beta_deg=20,60")?],
    };
    let manifest = batch_generate(&scenario, &opts)?;
    for item in &manifest.items {
        println!("{:3} seed {:20} {:?} ok={}", item.index, item.seed, item.overrides, item.ok);
    }
    let problems = verify_manifest(out.join("manifest.json"))?;
    println!("{} items in {}, {} verification problems", manifest.items.len(), out.display(), problems.len());
    Ok(())
}
