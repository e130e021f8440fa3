//! Damped Rabi oscillation of one qubit.

use std::f64::consts::PI;

use hamrec::dynamics::lindblad_evolve;
use hamrec::pauli::cardinal_state;
use hamrec::{DissipationRates, PauliHamiltonian};

fn main() -> hamrec::Result<()> {
    let dt = 1e-9;
    let len = 2000;
    let omega = 2.0 * PI * 2e6;
    let h = PauliHamiltonian::zeros(1, dt, len).with("X", vec![omega; len]);
    let rates = DissipationRates {
        gamma_down: 1.0 / 20e-6,
        gamma_phi: 1.0 / 40e-6,
        ..Default::default()
    };
    let (traj, rho) = lindblad_evolve(&cardinal_state("+Z")?, &h, &[rates])?;
    let z = traj.z(0);
    for n in (0..=len).step_by(125) {
        println!("t = {:6.0} ns  <Z> = {:+.4}", n as f64 * dt * 1e9, z[n]);
    }
    println!("final purity {:.6}", (&rho * &rho).trace().re);
    Ok(())
}
