//! Running a bundled scenario end to end and writing its artifacts.
//!
//! `cargo run --example run_scenario -- sq_two_axis`

use hamrec::scenario::{bundled, bundled_names, run_scenario, write_outputs};

fn main() -> hamrec::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sq_pi_flat_top".into());
    let s = bundled(&name)?;
    for w in s.validate()? {
        eprintln!("warning: {w}");
    }
    print!("{}", s.describe());
    let out = run_scenario(&s)?;
    let root = std::env::temp_dir().join("hamrec-example");
    let dir = write_outputs(&root, &s, &out)?;
    println!("mean fidelity {:.5}", out.primary().fidelity.mean);
    println!("artifacts in {}", dir.display());
    println!("other scenarios: {}", bundled_names().collect::<Vec<_>>().join(", "));
    Ok(())
}
