//! Second-order update: `Z`-type amplitudes become visible through the
//! curvature of `<Z_q>`.
//!
//! At step `n` every amplitude (linear and `Z`-type) is held constant over
//! the two-step window `[t_n, t_{n+2}]`. The engine states at `t_n` are
//! propagated exactly across the window and the predicted `<Z_q>` at
//! `t_{n+1}` and `t_{n+2}` are fitted to the measured values by damped
//! Gauss-Newton. A `Z`-type amplitude moves `<Z_q>` only through the
//! transverse drive, so its Jacobian column is `O(dt)` smaller than the linear
//! ones and vanishes when no transverse drive is present.
//!
//! The final grid point has no second increment; its `Z`-type amplitudes
//! repeat the previous step and its linear amplitudes come from a first-order
//! solve.

use nalgebra::{DMatrix, DVector};

use super::{
    finish, integrate_states, solve_amplitudes_first_order, substeps_for, z_index, EngineOptions, ReconstructionInput,
    ReconstructionResult, StepDiagnostics,
};
use crate::dynamics::Lindbladian;
use crate::error::{Error, Result};
use crate::pauli::{expectations, CMatrix, PauliBasis, PauliLabel, C64};

const MAX_ITERATIONS: usize = 50;
/// On raw `<Z>` residuals.
const RESIDUAL_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-12;
/// Central-difference step in radians per `dt`.
const FD_STEP: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct SecondOrderStep {
    /// Linear amplitudes at `t_n`.
    pub amplitudes: Vec<f64>,
    /// `Z`-type amplitudes at `t_n`.
    pub z_amplitudes: Vec<f64>,
    pub diagnostics: StepDiagnostics,
}

struct Window<'a> {
    states: &'a [CMatrix],
    lindblad: &'a Lindbladian,
    pre: [&'a CMatrix; 2],
    /// `norm * P` for every unknown, linear labels first.
    ops: Vec<CMatrix>,
    measured: Vec<f64>,
    dt: f64,
    substeps: usize,
}

impl Window<'_> {
    /// `x` is in radians per step (`Omega * dt`).
    fn residual(&self, x: &[f64]) -> DVector<f64> {
        let q = self.lindblad.qubits();
        let mut h = CMatrix::zeros(1 << q, 1 << q);
        for (op, v) in self.ops.iter().zip(x) {
            h += op * C64::new(v / self.dt, 0.0);
        }
        let h0 = &h + self.pre[0];
        let h1 = &h + self.pre[1];
        let mut r = DVector::zeros(self.measured.len());
        let n0 = substeps_for(&h0, self.dt, self.substeps);
        let n1 = substeps_for(&h1, self.dt, self.substeps);
        for (s, rho) in self.states.iter().enumerate() {
            let r1 = self.lindblad.step(&h0, rho, self.dt, n0);
            let r2 = self.lindblad.step(&h1, &r1, self.dt, n1);
            for (k, next) in [r1, r2].iter().enumerate() {
                let b = expectations(next, q);
                for qq in 0..q {
                    let i = (2 * s + k) * q + qq;
                    r[i] = b[z_index(q, qq)] - self.measured[i];
                }
            }
        }
        r
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.measured.len(), x.len());
        let mut probe = x.to_vec();
        for k in 0..x.len() {
            probe[k] = x[k] + FD_STEP;
            let up = self.residual(&probe);
            probe[k] = x[k] - FD_STEP;
            let down = self.residual(&probe);
            probe[k] = x[k];
            j.set_column(k, &((up - down) / (2.0 * FD_STEP)));
        }
        j
    }
}

fn singular_range(m: &DMatrix<f64>) -> (f64, f64) {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = if sv.len() < m.ncols() {
        0.0
    } else {
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    };
    (min, max)
}

/// Fits constant amplitudes over `[t_n, t_{n+2}]`.
///
/// `z_next` and `z_next2` are the measured stacked `z` (`s * Q + q`) at
/// `t_{n+1}` and `t_{n+2}`; `pre` the preconditioned operators at `t_n` and
/// `t_{n+1}`; `initial` the starting iterate in rad/s, linear labels first.
#[allow(clippy::too_many_arguments)]
pub fn solve_amplitudes_second_order(
    linear_labels: &[PauliLabel],
    z_labels: &[PauliLabel],
    states: &[CMatrix],
    z_next: &[f64],
    z_next2: &[f64],
    lindblad: &Lindbladian,
    pre: [&CMatrix; 2],
    initial: &[f64],
    dt: f64,
    substeps: usize,
    step: usize,
    rank_tol: f64,
) -> Result<SecondOrderStep> {
    let q = lindblad.qubits();
    let norm = 1.0 / (1u64 << q) as f64;
    let basis = PauliBasis::get(q);
    let n_lin = linear_labels.len();
    let mut measured = Vec::with_capacity(2 * z_next.len());
    for s in 0..states.len() {
        measured.extend_from_slice(&z_next[s * q..(s + 1) * q]);
        measured.extend_from_slice(&z_next2[s * q..(s + 1) * q]);
    }
    let window = Window {
        states,
        lindblad,
        pre,
        ops: linear_labels
            .iter()
            .chain(z_labels)
            .map(|l| basis.operator(l) * C64::new(norm, 0.0))
            .collect(),
        measured,
        dt,
        substeps: substeps.max(1),
    };

    let mut x: Vec<f64> = initial.iter().map(|w| w * dt).collect();
    let mut r = window.residual(&x);
    let mut diagnostics = StepDiagnostics {
        step,
        rank: x.len(),
        min_singular: 0.0,
        max_singular: 0.0,
        residual: r.norm(),
        iterations: 0,
    };
    for it in 1..=MAX_ITERATIONS {
        let j = window.jacobian(&x);
        let svd = j.clone().svd(true, true);
        let (min, max) = singular_range(&j);
        if !(max > 0.0) || min < rank_tol * max {
            let (lmin, lmax) = singular_range(&j.columns(0, n_lin).into_owned());
            if n_lin > 0 && (!(lmax > 0.0) || lmin < rank_tol * lmax) {
                return Err(Error::SingularSystem {
                    step,
                    singular_values: svd.singular_values.iter().copied().collect(),
                });
            }
            return Err(Error::UnobservableZ { step });
        }
        let delta = svd
            .solve(&(-&r), rank_tol * max)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        diagnostics.min_singular = min;
        diagnostics.max_singular = max;
        diagnostics.iterations = it;

        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
            let rt = window.residual(&trial);
            if rt.norm() <= r.norm() {
                accepted = Some((trial, rt));
                break;
            }
            t *= 0.5;
        }
        // no descent left along the Gauss-Newton direction: at the minimum
        let Some((trial, rt)) = accepted else { break };
        let moved = t * delta.norm();
        let size = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = trial;
        r = rt;
        diagnostics.residual = r.norm();
        if r.norm() < RESIDUAL_TOL || moved <= STEP_TOL * size.max(f64::MIN_POSITIVE) {
            break;
        }
        if it == MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                step,
                residual: r.norm(),
            });
        }
    }
    let omega: Vec<f64> = x.iter().map(|v| v / dt).collect();
    let (lin, z) = omega.split_at(n_lin);
    Ok(SecondOrderStep {
        amplitudes: lin.to_vec(),
        z_amplitudes: z.to_vec(),
        diagnostics,
    })
}

pub fn reconstruct_second_order(input: &ReconstructionInput, opts: &EngineOptions) -> Result<ReconstructionResult> {
    let q = input.qubits;
    let linear = input.linear_labels()?;
    let z_labels = input.z_labels();
    let unknowns = linear.len() + z_labels.len();
    input.validate(unknowns.div_ceil(q).max(ReconstructionInput::min_states_first_order(q)))?;
    let n_steps = input.steps();
    if n_steps < 2 {
        return Err(Error::InvalidInput("second-order mode needs at least three z samples".into()));
    }
    let norm = input.normalization();
    let basis = PauliBasis::get(q);
    let lindblad = Lindbladian::new(q, &input.rates)?;
    let s_count = input.initial_states.len();
    let stacked = |n: usize| -> Vec<f64> { (0..s_count).flat_map(|s| input.z_at(s, n)).collect() };

    let mut states = input.initial_states.clone();
    let mut rows: Vec<Vec<Vec<f64>>> = states.iter().map(|r| vec![expectations(r, q)]).collect();
    let mut series = vec![Vec::with_capacity(n_steps); unknowns];
    let mut diagnostics = Vec::with_capacity(n_steps);
    let mut z_prev = vec![0.0; z_labels.len()];

    for n in 0..n_steps {
        let pre_now = input.preconditioned_matrix(n);
        let mut h_z = pre_now.clone();
        for (label, w) in z_labels.iter().zip(&z_prev) {
            h_z += basis.operator(label) * C64::new(w * norm, 0.0);
        }
        let z_now: Vec<f64> = states
            .iter()
            .flat_map(|r| {
                let b = expectations(r, q);
                (0..q).map(move |k| b[z_index(q, k)])
            })
            .collect();
        let first = solve_amplitudes_first_order(
            &linear,
            &states,
            &z_now,
            &stacked(n + 1),
            &lindblad,
            &h_z,
            input.dt,
            n,
            opts.rank_tol,
        )?;
        let (lin, zs, diag) = if n + 2 <= n_steps {
            let pre_next = input.preconditioned_matrix(n + 1);
            let initial: Vec<f64> = first.amplitudes.iter().chain(&z_prev).copied().collect();
            let solved = solve_amplitudes_second_order(
                &linear,
                &z_labels,
                &states,
                &stacked(n + 1),
                &stacked(n + 2),
                &lindblad,
                [&pre_now, &pre_next],
                &initial,
                input.dt,
                opts.substeps,
                n,
                opts.rank_tol,
            )?;
            (solved.amplitudes, solved.z_amplitudes, solved.diagnostics)
        } else {
            (first.amplitudes, z_prev.clone(), first.diagnostics)
        };
        let mut h = pre_now;
        for ((label, w), out) in linear.iter().chain(&z_labels).zip(lin.iter().chain(&zs)).zip(series.iter_mut()) {
            h += basis.operator(label) * C64::new(w * norm, 0.0);
            out.push(*w);
        }
        diagnostics.push(diag);
        z_prev = zs;
        integrate_states(&lindblad, &h, &mut states, &mut rows, input.dt, opts.substeps, n)?;
    }
    let mut labels = linear;
    labels.extend(z_labels);
    finish(input, &labels, series, states, rows, diagnostics, opts)
}
