//! Haar-averaged gate fidelity: closed form against Monte Carlo, and the
//! fidelity trace between two Hamiltonians over time.

use std::f64::consts::PI;

use hamrec::metrics::{dynamical_coherent_fidelity, haar_average_fidelity, haar_average_fidelity_monte_carlo, haar_random_unitary};
use hamrec::PauliHamiltonian;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hamrec::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in [2, 4] {
        let u = haar_random_unitary(d, &mut rng);
        let exact = haar_average_fidelity(&u);
        let sampled = haar_average_fidelity_monte_carlo(&u, 200_000, &mut rng);
        println!("d = {d}: closed form {exact:.5}, Monte Carlo {sampled:.5}");
    }

    // a pi pulse against the same pulse with a 5% over-rotation
    let (dt, len) = (2e-9, 125);
    let rate = PI / (dt * len as f64);
    let target = PauliHamiltonian::zeros(1, dt, len).with("X", vec![rate; len]);
    let actual = PauliHamiltonian::zeros(1, dt, len).with("X", vec![1.05 * rate; len]);
    let trace = dynamical_coherent_fidelity(&actual, &target)?;
    println!("final gate fidelity {:.5}", trace.last().unwrap_or(f64::NAN));
    Ok(())
}
