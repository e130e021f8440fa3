//! Recovering an unobservable `ZI`/`IZ` detuning by optimizing constant
//! preconditioning amplitudes against final-state tomography.

use hamrec::scenario::{bundled, run_single};

fn main() -> hamrec::Result<()> {
    let s = bundled("tq_xy_0_pi_detuned")?.into_noiseless();
    for t in &s.truth.terms {
        println!("injected {}: {:?}", t.label, t.waveform.shape);
    }
    let run = run_single(&s)?;
    let p = run.preconditioning.as_ref().expect("scenario optimizes preconditioning");
    for (l, a) in p.labels.iter().zip(&p.amplitudes) {
        println!("optimized {l}: {:.1} kHz", a / (2.0 * std::f64::consts::PI * 1e3));
    }
    println!(
        "mean fidelity {:.5} without, {:.5} with ({} Nelder-Mead iterations)",
        p.baseline_fidelity, p.fidelity, p.iterations
    );
    Ok(())
}
