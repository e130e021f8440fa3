//! First-order reconstruction of a Hann-shaped pi pulse from noiseless `<Z>`
//! traces of four initial states.

use std::f64::consts::PI;

use hamrec::dynamics::lindblad_evolve;
use hamrec::engine::{reconstruct, EngineOptions, Mode, ReconstructionInput};
use hamrec::metrics::mean_fidelity;
use hamrec::pauli::cardinal_state;
use hamrec::{DissipationRates, PauliHamiltonian};

fn main() -> hamrec::Result<()> {
    let (dt, steps, refine) = (2e-9, 100, 16);
    let fine = steps * refine;
    let t_p = dt * steps as f64;
    // area pi: the Hann window averages to one half
    let hann: Vec<f64> = (0..fine)
        .map(|k| {
            let t = (k as f64 + 0.5) * t_p / fine as f64;
            2.0 * PI / t_p * (PI * t / t_p).sin().powi(2)
        })
        .collect();
    let truth = PauliHamiltonian::zeros(1, t_p / fine as f64, fine).with("X", hann);
    let rates = [DissipationRates {
        gamma_down: 1.0 / 60e-6,
        gamma_d: 2e5,
        ..Default::default()
    }];

    let labels = ["+X", "+Y", "+Z", "-Z"];
    let mut states = Vec::new();
    let mut z = Vec::new();
    let mut finals = Vec::new();
    for l in labels {
        let rho = cardinal_state(l)?;
        let (traj, last) = lindblad_evolve(&rho, &truth, &rates)?;
        z.push(vec![traj.z(0).into_iter().step_by(refine).collect()]);
        states.push(rho);
        finals.push(last);
    }
    let input = ReconstructionInput::new(1, dt, states, z, rates.to_vec());
    let result = reconstruct(&input, &Mode::FirstOrder, &EngineOptions::default())?;

    let x = result.amplitudes.series_or_zero(&"X".parse()?);
    let area: f64 = x.iter().sum::<f64>() * dt;
    println!("recovered pulse area {area:.5} rad (pi = {PI:.5})");
    for n in (0..steps).step_by(10) {
        println!("t = {:4.0} ns  Omega_X/2pi = {:.3} MHz", n as f64 * dt * 1e9, x[n] / (2.0 * PI * 1e6));
    }
    let smallest = result.diagnostics.iter().map(|d| d.min_singular).fold(f64::INFINITY, f64::min);
    println!("smallest singular value {smallest:.3}");
    println!("mean final-state fidelity {:.6}", mean_fidelity(&result.final_states, &finals)?.mean);
    Ok(())
}
