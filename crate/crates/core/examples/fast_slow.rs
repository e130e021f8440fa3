//! Fast/slow split: a nominal pulse is supplied as the guess and only the
//! slow correction is solved for.

use std::f64::consts::PI;

use hamrec::dynamics::lindblad_evolve;
use hamrec::engine::{reconstruct, EngineOptions, Mode, ReconstructionInput};
use hamrec::pauli::cardinal_state;
use hamrec::{DissipationRates, PauliHamiltonian};

fn main() -> hamrec::Result<()> {
    let mhz = 2.0 * PI * 1e6;
    let (dt, steps, refine) = (2e-9, 125, 16);
    let fine = steps * refine;
    let nominal = |_t: f64| 2.0 * mhz;
    let drift = |t: f64| 0.3 * mhz * (2.0 * PI * t / (dt * steps as f64)).sin();
    let fine_dt = dt / refine as f64;
    let x: Vec<f64> = (0..fine).map(|k| (k as f64 + 0.5) * fine_dt).map(|t| nominal(t) + drift(t)).collect();
    let truth = PauliHamiltonian::zeros(1, fine_dt, fine).with("X", x);
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
    let guess_series: Vec<f64> = (0..steps).map(|n| nominal((n as f64 + 0.5) * dt)).collect();
    let guess = PauliHamiltonian::zeros(1, dt, steps).with("X", guess_series);
    let result = reconstruct(&input, &Mode::FastSlow(guess), &EngineOptions::default())?;
    let rec = result.amplitudes.series_or_zero(&"X".parse()?);
    for n in (0..steps).step_by(15) {
        let t = (n as f64 + 0.5) * dt;
        println!(
            "t = {:4.0} ns  correction {:+.4} MHz  (true {:+.4})",
            t * 1e9,
            (rec[n] - nominal(t)) / mhz,
            drift(t) / mhz
        );
    }
    Ok(())
}
