//! A constant `Z` detuning is invisible to first order but recovered by the
//! second-order update while a transverse drive is on.

use std::f64::consts::PI;

use hamrec::dynamics::lindblad_evolve;
use hamrec::engine::{reconstruct, EngineOptions, Mode, ReconstructionInput};
use hamrec::pauli::cardinal_state;
use hamrec::{DissipationRates, PauliHamiltonian};

fn main() -> hamrec::Result<()> {
    let mhz = 2.0 * PI * 1e6;
    let (dt, steps, refine) = (2e-9, 150, 16);
    let fine = steps * refine;
    let truth = PauliHamiltonian::zeros(1, dt / refine as f64, fine)
        .with("X", vec![2.0 * mhz; fine])
        .with("Z", vec![1.0 * mhz; fine]);
    let rates = [DissipationRates::default()];
    let mut states = Vec::new();
    let mut z = Vec::new();
    for l in ["+X", "+Y", "+Z", "-Z"] {
        let rho = cardinal_state(l)?;
        let (traj, _) = lindblad_evolve(&rho, &truth, &rates)?;
        z.push(vec![traj.z(0).into_iter().step_by(refine).collect()]);
        states.push(rho);
    }
    let input = ReconstructionInput::new(1, dt, states, z, rates.to_vec());
    let first = reconstruct(&input, &Mode::FirstOrder, &EngineOptions::default())?;
    let second = reconstruct(&input, &Mode::SecondOrder, &EngineOptions::default())?;
    let z_label = "Z".parse()?;
    println!("first order solves for {:?}", first.amplitudes.labels().map(|l| l.to_string()).collect::<Vec<_>>());
    let omega_z = second.amplitudes.series_or_zero(&z_label);
    for n in (10..steps - 10).step_by(20) {
        println!("t = {:4.0} ns  Omega_Z/2pi = {:.4} MHz", n as f64 * dt * 1e9, omega_z[n] / mhz);
    }
    Ok(())
}
