//! Dispersive readout of a Rabi oscillation: resonator field, noisy
//! ensemble-averaged record, calibration and conditioning back to `<Z>`.

use std::f64::consts::PI;

use hamrec::dynamics::lindblad_evolve;
use hamrec::pauli::cardinal_state;
use hamrec::readout::{calibrate, calibration_traces, resonator_response_ode, synthesize_shots, ReadoutParams};
use hamrec::signal::{condition_with, Conditioning, DelayShift, FilterSpec};
use hamrec::{DissipationRates, PauliHamiltonian};

fn main() -> hamrec::Result<()> {
    let mhz = 2.0 * PI * 1e6;
    let fs = 1e9;
    let p = ReadoutParams::new(11.78 * mhz, 0.64 * mhz, 0.94, 0.41, fs, 0.07);
    p.validate()?;

    // qubit trajectory sampled at the readout rate, with a tail for the delay
    let len = 600;
    let h = PauliHamiltonian::zeros(1, 1.0 / fs, len).with("X", vec![2.0 * mhz; len]);
    let (traj, _) = lindblad_evolve(&cardinal_state("+Z")?, &h, &[DissipationRates::default()])?;
    let z = traj.z(0);

    let field = resonator_response_ode(&z, &p);
    let record = synthesize_shots(&field, &p, 5000, 7);
    let (plus, minus) = calibration_traces(&p, 1e-6, 5000, 8);
    let cal = calibrate(&plus, &minus);
    let opts = Conditioning {
        filter: Some(FilterSpec::new(3, 50e6)),
        target_dt: 4e-9,
        tau: p.delay(),
        shift: DelayShift::RawSamples,
    };
    // the resonator itself low-passes z, so the 2 MHz swing comes back a few percent short
    let conditioned = condition_with(&record, &opts, &cal)?;
    println!("delay 2/kappa = {:.1} ns", p.delay() * 1e9);
    for j in (0..conditioned.values.len().min(125)).step_by(10) {
        let t = conditioned.t0 + j as f64 * conditioned.dt;
        let truth = z[((t * fs).round() as usize).min(len)];
        println!("t = {:5.0} ns  true {:+.3}  recovered {:+.3}", t * 1e9, truth, conditioned.values[j]);
    }
    Ok(())
}
