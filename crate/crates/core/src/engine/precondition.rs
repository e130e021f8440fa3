//! Choosing constant values for labels the first-order solve cannot see.
//!
//! A wrong `Z`-type amplitude shows up only through the engine's integrated
//! states, so the search scores each candidate by how well the engine's final
//! states match independent final-state tomography.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use super::{reconstruct_first_order, EngineOptions, ReconstructionInput};
use crate::dynamics::PauliHamiltonian;
use crate::error::{Error, Result};
use crate::metrics::mean_fidelity;
use crate::pauli::{CMatrix, PauliLabel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreconditionOptions {
    /// Search coordinates are amplitudes divided by this (rad/s).
    pub scale: f64,
    /// Initial simplex edge, in units of `scale`.
    pub initial_step: f64,
    pub max_iterations: u64,
    /// Stop when the standard deviation of simplex infidelities drops below this.
    pub tolerance: f64,
    pub engine: EngineOptions,
}

impl Default for PreconditionOptions {
    fn default() -> Self {
        Self {
            scale: 2.0 * std::f64::consts::PI * 1e6,
            initial_step: 0.5,
            max_iterations: 400,
            tolerance: 1e-12,
            engine: EngineOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreconditionResult {
    pub labels: Vec<PauliLabel>,
    /// Constant amplitudes (rad/s), one per label.
    pub amplitudes: Vec<f64>,
    /// Mean reconstruction fidelity at the optimum.
    pub fidelity: f64,
    /// Mean reconstruction fidelity with the labels left at zero.
    pub baseline_fidelity: f64,
    pub gain: f64,
    pub iterations: u64,
}

impl PreconditionResult {
    /// The optimum as a preconditioning series on `grid`'s time axis.
    pub fn hamiltonian(&self, qubits: usize, dt: f64, len: usize) -> PauliHamiltonian {
        let mut h = PauliHamiltonian::zeros(qubits, dt, len);
        for (l, a) in self.labels.iter().zip(&self.amplitudes) {
            h.set(l.clone(), vec![*a; len]).expect("label matches qubit count");
        }
        h
    }
}

struct Objective<'a> {
    input: &'a ReconstructionInput,
    labels: &'a [PauliLabel],
    tomography: &'a [CMatrix],
    opts: &'a PreconditionOptions,
}

impl Objective<'_> {
    fn fidelity(&self, x: &[f64]) -> f64 {
        let n = self.input.steps();
        let mut pre = self
            .input
            .preconditioned
            .clone()
            .unwrap_or_else(|| PauliHamiltonian::zeros(self.input.qubits, self.input.dt, n));
        for (l, v) in self.labels.iter().zip(x) {
            if pre.set(l.clone(), vec![v * self.opts.scale; n]).is_err() {
                return 0.0;
            }
        }
        let input = self.input.clone().with_preconditioned(pre);
        reconstruct_first_order(&input, &self.opts.engine)
            .and_then(|r| mean_fidelity(&r.final_states, self.tomography))
            .map_or(0.0, |f| f.mean)
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(1.0 - self.fidelity(x))
    }
}

/// Nelder-Mead search over constant amplitudes for `candidates`, maximizing
/// the mean fidelity of the engine's final states against `tomography`.
///
/// Returns zeros with zero gain when nothing beats leaving the labels out.
pub fn optimize_preconditioning(
    input: &ReconstructionInput,
    candidates: &[PauliLabel],
    tomography: &[CMatrix],
    opts: &PreconditionOptions,
) -> Result<PreconditionResult> {
    for l in candidates {
        if l.qubits() != input.qubits || l.is_identity() {
            return Err(Error::InvalidLabel(l.to_string()));
        }
        if !l.is_z_type() {
            return Err(Error::InvalidInput(format!(
                "{l} is recoverable at first order; only Z-type labels can be preconditioned"
            )));
        }
    }
    if tomography.len() != input.initial_states.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} tomography states for {} initial states",
            tomography.len(),
            input.initial_states.len()
        )));
    }
    let objective = Objective {
        input,
        labels: candidates,
        tomography,
        opts,
    };
    let zero = vec![0.0; candidates.len()];
    let baseline = objective.fidelity(&zero);
    if candidates.is_empty() {
        return Ok(PreconditionResult {
            labels: Vec::new(),
            amplitudes: Vec::new(),
            fidelity: baseline,
            baseline_fidelity: baseline,
            gain: 0.0,
            iterations: 0,
        });
    }

    let mut simplex = vec![zero.clone()];
    for k in 0..candidates.len() {
        let mut v = zero.clone();
        v[k] = opts.initial_step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(opts.tolerance)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let run = Executor::new(objective, solver)
        .configure(|s| s.max_iters(opts.max_iterations))
        .run()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let state = run.state();
    let iterations = state.get_iter();
    let (best, cost) = match state.get_best_param() {
        Some(p) => (p.clone(), state.get_best_cost()),
        None => (zero.clone(), 1.0 - baseline),
    };
    let fidelity = 1.0 - cost;
    let (amplitudes, fidelity) = if fidelity > baseline {
        (best.iter().map(|v| v * opts.scale).collect(), fidelity)
    } else {
        (vec![0.0; candidates.len()], baseline)
    };
    Ok(PreconditionResult {
        labels: candidates.to_vec(),
        amplitudes,
        fidelity,
        baseline_fidelity: baseline,
        gain: fidelity - baseline,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::dynamics::{lindblad_evolve_with, DissipationRates};
    use crate::pauli::cardinal_state;

    fn rates() -> Vec<DissipationRates> {
        vec![DissipationRates {
            gamma_down: 1.0 / 61e-6,
            gamma_d: 2e5,
            ..Default::default()
        }]
    }

    fn scenario(wz: f64) -> (ReconstructionInput, Vec<CMatrix>) {
        let refine = 8;
        let n = 125;
        let len = n * refine;
        let fine_dt = 2e-9 / refine as f64;
        let x: Vec<f64> = (0..len)
            .map(|k| 2.0 * MHZ * (std::f64::consts::PI * k as f64 / len as f64).sin())
            .collect();
        let truth = PauliHamiltonian::zeros(1, fine_dt, len).with("X", x).with("Z", vec![wz; len]);
        let labels = cardinal_labels(1);
        let input = synthetic_input(&truth, refine, &rates(), &labels);
        let tomo = labels
            .iter()
            .map(|l| lindblad_evolve_with(&cardinal_state(l).unwrap(), &truth, &rates(), 4).unwrap().1)
            .collect();
        (input, tomo)
    }

    #[test]
    fn finds_injected_z() {
        let wz = 0.6 * MHZ;
        let (input, tomo) = scenario(wz);
        let res = optimize_preconditioning(&input, &["Z".parse().unwrap()], &tomo, &Default::default()).unwrap();
        assert!((res.amplitudes[0] - wz).abs() < 0.05 * wz, "{}", res.amplitudes[0] / MHZ);
        assert!(res.gain > 0.0 && res.fidelity > 0.999, "{res:?}");
    }

    #[test]
    fn nothing_to_find_means_no_gain() {
        let (input, tomo) = scenario(0.0);
        let res = optimize_preconditioning(&input, &["Z".parse().unwrap()], &tomo, &Default::default()).unwrap();
        assert!(res.gain < 1e-3, "{res:?}");
        assert!(res.amplitudes[0].abs() < 0.02 * MHZ, "{}", res.amplitudes[0] / MHZ);
    }

    #[test]
    fn recoverable_candidates_are_rejected() {
        let (input, tomo) = scenario(0.0);
        assert!(matches!(
            optimize_preconditioning(&input, &["X".parse().unwrap()], &tomo, &Default::default()),
            Err(Error::InvalidInput(_))
        ));
    }
}
