use nalgebra::DVector;

use super::{
    finish, integrate_states, known_drift, solve_least_squares, DesignTable, EngineOptions, ReconstructionInput,
    ReconstructionResult, StepDiagnostics,
};
use crate::dynamics::Lindbladian;
use crate::error::Result;
use crate::pauli::{expectations, CMatrix, PauliLabel, C64};

/// Amplitudes solved at one grid point.
#[derive(Clone, Debug)]
pub struct FirstOrderStep {
    pub amplitudes: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

/// Least-squares amplitudes at `t_n` from the engine states at `t_n` and the
/// measured `z` one step later.
///
/// `z_now` and `z_next` are stacked state-major (`s * Q + q`). The known
/// drift (dissipation and `h_known`) is removed from the increments before
/// the solve.
#[allow(clippy::too_many_arguments)]
pub fn solve_amplitudes_first_order(
    labels: &[PauliLabel],
    states: &[CMatrix],
    z_now: &[f64],
    z_next: &[f64],
    lindblad: &Lindbladian,
    h_known: &CMatrix,
    dt: f64,
    step: usize,
    rank_tol: f64,
) -> Result<FirstOrderStep> {
    let qubits = lindblad.qubits();
    let norm = 1.0 / (1u64 << qubits) as f64;
    let table = DesignTable::new(qubits, labels, norm);
    let blochs: Vec<Vec<f64>> = states.iter().map(|r| expectations(r, qubits)).collect();
    let m = table.matrix(&blochs);
    let mut y = DVector::zeros(states.len() * qubits);
    for (s, rho) in states.iter().enumerate() {
        let drift = known_drift(lindblad, h_known, rho);
        for q in 0..qubits {
            let k = s * qubits + q;
            y[k] = (z_next[k] - z_now[k]) / dt - drift[q];
        }
    }
    let (x, diagnostics) = solve_least_squares(&m, &y, step, rank_tol)?;
    Ok(FirstOrderStep {
        amplitudes: x.iter().copied().collect(),
        diagnostics,
    })
}

/// Solve, integrate, repeat.
pub fn reconstruct_first_order(input: &ReconstructionInput, opts: &EngineOptions) -> Result<ReconstructionResult> {
    input.validate(ReconstructionInput::min_states_first_order(input.qubits))?;
    let labels = input.linear_labels()?;
    let q = input.qubits;
    let n_steps = input.steps();
    let norm = input.normalization();
    let lindblad = Lindbladian::new(q, &input.rates)?;
    let basis = crate::pauli::PauliBasis::get(q);

    let mut states = input.initial_states.clone();
    let mut rows: Vec<Vec<Vec<f64>>> = states.iter().map(|r| vec![expectations(r, q)]).collect();
    let mut series = vec![Vec::with_capacity(n_steps); labels.len()];
    let mut diagnostics = Vec::with_capacity(n_steps);

    for n in 0..n_steps {
        let h_pre = input.preconditioned_matrix(n);
        let z_now: Vec<f64> = states
            .iter()
            .flat_map(|r| {
                let b = expectations(r, q);
                (0..q).map(move |k| b[super::z_index(q, k)])
            })
            .collect();
        let z_next: Vec<f64> = (0..states.len()).flat_map(|s| input.z_at(s, n + 1)).collect();
        let solved = solve_amplitudes_first_order(
            &labels,
            &states,
            &z_now,
            &z_next,
            &lindblad,
            &h_pre,
            input.dt,
            n,
            opts.rank_tol,
        )?;
        let mut h = h_pre;
        for ((label, amp), out) in labels.iter().zip(&solved.amplitudes).zip(series.iter_mut()) {
            h += basis.operator(label) * C64::new(amp * norm, 0.0);
            out.push(*amp);
        }
        diagnostics.push(solved.diagnostics);
        integrate_states(&lindblad, &h, &mut states, &mut rows, input.dt, opts.substeps, n)?;
    }
    finish(input, &labels, series, states, rows, diagnostics, opts)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::dynamics::{heisenberg_step_predict, DissipationRates, PauliHamiltonian};
    use crate::error::Error;
    use crate::pauli::cardinal_state;

    fn rates() -> Vec<DissipationRates> {
        vec![DissipationRates {
            gamma_down: 1.0 / 61e-6,
            gamma_phi: 8.2e3,
            gamma_d: 2e5,
            ..Default::default()
        }]
    }

    #[test]
    fn exact_inverse_of_euler_forward_model() {
        let labels = PauliLabel::recoverable(2);
        let rates = vec![DissipationRates { gamma_down: 2e4, gamma_d: 2e5, ..Default::default() }; 2];
        let lindblad = Lindbladian::new(2, &rates).unwrap();
        let amps: Vec<f64> = (0..labels.len()).map(|k| MHZ * (0.7 * k as f64 - 3.1).sin()).collect();
        let mut truth = PauliHamiltonian::zeros(2, 4e-9, 1);
        for (l, a) in labels.iter().zip(&amps) {
            truth.set(l.clone(), vec![*a]).unwrap();
        }
        let states: Vec<CMatrix> = cardinal_labels(2).iter().map(|l| cardinal_state(l).unwrap()).collect();
        let mut z_now = Vec::new();
        let mut z_next = Vec::new();
        for rho in &states {
            let b = expectations(rho, 2);
            let next = heisenberg_step_predict(&b, &truth, 0, &rates).unwrap();
            for q in 0..2 {
                z_now.push(b[super::super::z_index(2, q)]);
                z_next.push(next[super::super::z_index(2, q)]);
            }
        }
        let zero = CMatrix::zeros(4, 4);
        let solved =
            solve_amplitudes_first_order(&labels, &states, &z_now, &z_next, &lindblad, &zero, 4e-9, 0, 1e-6).unwrap();
        for (a, b) in solved.amplitudes.iter().zip(&amps) {
            assert!((a - b).abs() < 1e-9 * MHZ, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_x_drive_round_trip() {
        let refine = 8;
        let n = 125;
        let w = 2.0 * MHZ;
        let truth = PauliHamiltonian::zeros(1, 2e-9 / refine as f64, n * refine).with("X", vec![w; n * refine]);
        let input = synthetic_input(&truth, refine, &rates(), &cardinal_labels(1));
        let result = reconstruct_first_order(&input, &EngineOptions::default()).unwrap();
        let ox = result.amplitudes.series(&"X".parse().unwrap()).unwrap();
        let oy = result.amplitudes.series(&"Y".parse().unwrap()).unwrap();
        for k in 1..n - 1 {
            assert!((ox[k] - w).abs() < 0.005 * w, "step {k}: {}", ox[k] / w);
            assert!(oy[k].abs() < 0.005 * w, "step {k}: {}", oy[k] / w);
        }
    }

    #[test]
    fn pole_states_are_singular() {
        let truth = PauliHamiltonian::zeros(1, 2e-9, 10);
        let input = synthetic_input(&truth, 1, &rates(), &["+Z".into(), "-Z".into()]);
        match reconstruct_first_order(&input, &EngineOptions::default()) {
            Err(Error::SingularSystem { step, singular_values }) => {
                assert_eq!(step, 0);
                assert!(singular_values.iter().all(|&s| s == 0.0));
            }
            other => panic!("expected singular system, got {other:?}"),
        }
    }

    #[test]
    fn single_state_is_rejected() {
        let truth = PauliHamiltonian::zeros(1, 2e-9, 10);
        let input = synthetic_input(&truth, 1, &rates(), &["+X".into()]);
        assert!(matches!(
            reconstruct_first_order(&input, &EngineOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn preconditioning_removes_z_bias() {
        let refine = 8;
        let n = 125;
        let w = 2.0 * MHZ;
        let wz = 1.0 * MHZ;
        let len = n * refine;
        let truth = PauliHamiltonian::zeros(1, 2e-9 / refine as f64, len)
            .with("X", vec![w; len])
            .with("Z", vec![wz; len]);
        let input = synthetic_input(&truth, refine, &rates(), &cardinal_labels(1));
        let err = |res: &ReconstructionResult| {
            let ox = res.amplitudes.series(&"X".parse().unwrap()).unwrap();
            let oy = res.amplitudes.series(&"Y".parse().unwrap()).unwrap();
            (1..n - 1)
                .map(|k| ((ox[k] - w).powi(2) + oy[k].powi(2)).sqrt() / w)
                .fold(0.0, f64::max)
        };
        let plain = reconstruct_first_order(&input, &EngineOptions::default()).unwrap();
        let pre = PauliHamiltonian::zeros(1, 2e-9, n).with("Z", vec![wz; n]);
        let known = reconstruct_first_order(&input.clone().with_preconditioned(pre), &EngineOptions::default()).unwrap();
        assert!(err(&known) < 0.01, "preconditioned error {}", err(&known));
        assert!(err(&plain) > 3.0 * err(&known), "plain {} vs {}", err(&plain), err(&known));
    }

    #[test]
    fn z_type_labels_cannot_be_requested() {
        let truth = PauliHamiltonian::zeros(1, 2e-9, 4);
        let input = synthetic_input(&truth, 1, &rates(), &cardinal_labels(1)).with_labels(vec!["Z".parse().unwrap()]);
        assert!(matches!(
            reconstruct_first_order(&input, &EngineOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
