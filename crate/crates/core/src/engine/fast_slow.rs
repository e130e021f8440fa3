//! Fast/slow split: a user-supplied guess carries the large fast part of the
//! Hamiltonian exactly, and the engine solves only for the slow correction.
//!
//! The guess is propagated with its exact step unitary `U_g`, so the predicted
//! increment is free of the Euler error that a large amplitude would
//! otherwise cause. Dissipation enters the prediction by the trapezoid rule in
//! the frame of `U_g`. The correction enters through the exact derivative of
//! the step propagator with respect to each Pauli amplitude, so the linear
//! model stays accurate however far `U_g` rotates the state within one step.
//! With `U_g = 1` this is exactly the first-order update.

use nalgebra::{DMatrix, DVector};

use super::{finish, integrate_states, solve_least_squares, EngineOptions, ReconstructionInput, ReconstructionResult};
use crate::dynamics::{Lindbladian, PauliHamiltonian};
use crate::error::{Error, Result};
use crate::pauli::{expectations, matrix_exp, trace, CMatrix, Pauli, PauliBasis, PauliLabel, C64};

/// Frechet derivative of `exp` at `a` along `e`, read off the block
/// exponential `exp([[a, e], [0, a]]) = [[exp(a), L(a, e)], [0, exp(a)]]`.
fn exp_frechet(a: &CMatrix, e: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let mut block = CMatrix::zeros(2 * d, 2 * d);
    block.view_mut((0, 0), (d, d)).copy_from(a);
    block.view_mut((d, d), (d, d)).copy_from(a);
    block.view_mut((0, d), (d, d)).copy_from(e);
    let x = matrix_exp(&block);
    x.view((0, d), (d, d)).into_owned()
}

/// Reconstructs `guess + correction`.
///
/// The correction is solved for the same labels as first-order mode. Guess
/// labels outside that set (for instance `Z`-type ones) pass through
/// unchanged.
pub fn reconstruct_fast_slow(
    input: &ReconstructionInput,
    guess: &PauliHamiltonian,
    opts: &EngineOptions,
) -> Result<ReconstructionResult> {
    input.validate(ReconstructionInput::min_states_first_order(input.qubits))?;
    let n_steps = input.steps();
    if guess.qubits() != input.qubits || guess.len() != n_steps || (guess.dt() - input.dt).abs() > 1e-15 * input.dt {
        return Err(Error::GridMismatch("the fast guess must share the reconstruction grid".into()));
    }
    let q = input.qubits;
    let labels = input.linear_labels()?;
    let norm = input.normalization();
    let basis = PauliBasis::get(q);
    let lindblad = Lindbladian::new(q, &input.rates)?;
    let guess = guess.clone().with_normalization(norm);

    let mut out_labels = labels.clone();
    for l in guess.labels() {
        if !out_labels.contains(l) {
            out_labels.push(l.clone());
        }
    }
    let mut series = vec![Vec::with_capacity(n_steps); out_labels.len()];
    let mut states = input.initial_states.clone();
    let mut rows: Vec<Vec<Vec<f64>>> = states.iter().map(|r| vec![expectations(r, q)]).collect();
    let mut diagnostics = Vec::with_capacity(n_steps);

    let z_ops: Vec<CMatrix> = (0..q)
        .map(|k| basis.operator(&PauliLabel::single(q, k, Pauli::Z)).clone())
        .collect();
    let minus_i_dt = C64::new(0.0, -input.dt);
    let ops: Vec<CMatrix> = labels.iter().map(|l| basis.operator(l) * (minus_i_dt * norm)).collect();

    for n in 0..n_steps {
        let h_fast = guess.matrix_at(n) + input.preconditioned_matrix(n);
        let a = &h_fast * minus_i_dt;
        let u = matrix_exp(&a);
        let du: Vec<CMatrix> = ops.iter().map(|e| exp_frechet(&a, e)).collect();
        let ud = u.adjoint();
        let mut m = DMatrix::zeros(states.len() * q, labels.len());
        let mut y = DVector::zeros(states.len() * q);
        let half_dt = C64::new(0.5 * input.dt, 0.0);
        for (s, rho) in states.iter().enumerate() {
            let rotated = &u * rho * &ud;
            let kicked = rho + lindblad.dissipate(rho) * half_dt;
            let predicted = &u * kicked * &ud + lindblad.dissipate(&rotated) * half_dt;
            let measured = input.z_at(s, n + 1);
            // d(U rho U^dag) for a unit amplitude on each label
            let responses: Vec<CMatrix> = du
                .iter()
                .map(|d| {
                    let left = d * rho * &ud;
                    &left + left.adjoint()
                })
                .collect();
            for k in 0..q {
                let row = s * q + k;
                y[row] = (measured[k] - trace(&(&predicted * &z_ops[k])).re) / input.dt;
                for (c, r) in responses.iter().enumerate() {
                    m[(row, c)] = trace(&(r * &z_ops[k])).re / input.dt;
                }
            }
        }
        let (delta, diag) = solve_least_squares(&m, &y, n, opts.rank_tol)?;
        let mut h = h_fast;
        for (label, d) in labels.iter().zip(delta.iter()) {
            h += basis.operator(label) * C64::new(d * norm, 0.0);
        }
        for (label, out) in out_labels.iter().zip(series.iter_mut()) {
            let d = labels.iter().position(|l| l == label).map_or(0.0, |k| delta[k]);
            out.push(guess.amplitude(label, n) + d);
        }
        diagnostics.push(diag);
        integrate_states(&lindblad, &h, &mut states, &mut rows, input.dt, opts.substeps, n)?;
    }
    finish(input, &out_labels, series, states, rows, diagnostics, opts)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::reconstruct_first_order;
    use super::*;
    use crate::dynamics::DissipationRates;

    fn rates() -> Vec<DissipationRates> {
        vec![DissipationRates {
            gamma_down: 1.0 / 61e-6,
            gamma_d: 2e5,
            ..Default::default()
        }]
    }

    #[test]
    fn zero_guess_matches_first_order() {
        let refine = 4;
        let n = 60;
        let len = n * refine;
        let truth = PauliHamiltonian::zeros(1, 2e-9 / refine as f64, len)
            .with("X", (0..len).map(|k| 3.0 * MHZ * (k as f64 * 0.01).sin()).collect());
        let input = synthetic_input(&truth, refine, &rates(), &cardinal_labels(1));
        let opts = EngineOptions::default();
        let first = reconstruct_first_order(&input, &opts).unwrap();
        let fs = reconstruct_fast_slow(&input, &PauliHamiltonian::zeros(1, 2e-9, n), &opts).unwrap();
        assert_eq!(fs.amplitudes.labels().count(), 2);
        for (label, a) in first.amplitudes.iter() {
            let b = fs.amplitudes.series(label).unwrap();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-10 * x.abs().max(MHZ), "{label}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn slow_sinusoid_under_fast_carrier() {
        // 60 MHz carrier: about 0.75 rad per 2 ns step, far outside the Euler regime
        let refine = 16;
        let n = 500;
        let len = n * refine;
        let dt = 2e-9;
        let fine = dt / refine as f64;
        let fast = 60.0 * MHZ;
        let slow = |k: usize| 1.0 * MHZ * (2.0 * std::f64::consts::PI * 500e3 * (k as f64 + 0.5) * fine).sin();
        let truth = PauliHamiltonian::zeros(1, fine, len)
            .with("X", vec![fast; len])
            .with("Y", (0..len).map(slow).collect());
        let input = synthetic_input(&truth, refine, &rates(), &cardinal_labels(1));
        let guess = PauliHamiltonian::zeros(1, dt, n).with("X", vec![fast; n]);
        let opts = EngineOptions::default();
        let fs = reconstruct_fast_slow(&input, &guess, &opts).unwrap();
        let fo = reconstruct_first_order(&input, &opts).unwrap();
        let y: PauliLabel = "Y".parse().unwrap();
        let rms = |r: &ReconstructionResult| {
            let s = r.amplitudes.series(&y).unwrap();
            let sq: f64 = (0..n)
                .map(|k| {
                    let avg = (0..refine).map(|j| slow(k * refine + j)).sum::<f64>() / refine as f64;
                    (s[k] - avg).powi(2)
                })
                .sum();
            (sq / n as f64).sqrt()
        };
        assert!(rms(&fs) <= 0.5 * rms(&fo), "fast/slow {} vs first order {}", rms(&fs) / MHZ, rms(&fo) / MHZ);
        assert!(rms(&fs) < 0.05 * MHZ, "fast/slow rms {}", rms(&fs) / MHZ);
    }

    #[test]
    fn exact_guess_leaves_no_correction() {
        let refine = 8;
        let n = 100;
        let len = n * refine;
        let truth = PauliHamiltonian::zeros(1, 2e-9 / refine as f64, len).with("X", vec![5.0 * MHZ; len]);
        let input = synthetic_input(&truth, refine, &rates(), &cardinal_labels(1));
        let guess = PauliHamiltonian::zeros(1, 2e-9, n).with("X", vec![5.0 * MHZ; n]);
        let res = reconstruct_fast_slow(&input, &guess, &EngineOptions::default()).unwrap();
        let x = res.amplitudes.series(&"X".parse().unwrap()).unwrap();
        let y = res.amplitudes.series(&"Y".parse().unwrap()).unwrap();
        for k in 0..n {
            assert!((x[k] - 5.0 * MHZ).abs() < 1e-4 * MHZ && y[k].abs() < 1e-4 * MHZ, "{} {}", x[k], y[k]);
        }
    }

    #[test]
    fn frechet_matches_central_difference() {
        let basis = PauliBasis::get(2);
        let h = basis.operator(&"XX".parse().unwrap()) * C64::new(0.7, 0.0)
            + basis.operator(&"ZI".parse().unwrap()) * C64::new(-0.4, 0.0);
        let a = h * C64::new(0.0, -1.0);
        let e = basis.operator(&"YZ".parse().unwrap()) * C64::new(0.0, -1.0);
        let eps = 1e-5;
        let fd = (matrix_exp(&(&a + &e * C64::new(eps, 0.0))) - matrix_exp(&(&a - &e * C64::new(eps, 0.0))))
            / C64::new(2.0 * eps, 0.0);
        let diff = (exp_frechet(&a, &e) - fd).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn guess_on_wrong_grid_is_rejected() {
        let truth = PauliHamiltonian::zeros(1, 2e-9, 10);
        let input = synthetic_input(&truth, 1, &rates(), &cardinal_labels(1));
        let guess = PauliHamiltonian::zeros(1, 2e-9, 9);
        assert!(matches!(
            reconstruct_fast_slow(&input, &guess, &EngineOptions::default()),
            Err(Error::GridMismatch(_))
        ));
    }
}
