//! Hamiltonian reconstruction from measured `<Z_q>` traces.
//!
//! Every mode alternates a least-squares solve for the amplitudes at `t_n`
//! with an RK4 step of the master equation, so the engine carries its own
//! density matrix for each initial state. Only the single-qubit `<Z>` of each
//! qubit is measured; every other expectation needed by the solve comes from
//! those integrated states.

mod fast_slow;
mod first_order;
mod precondition;
mod second_order;

pub use fast_slow::reconstruct_fast_slow;
pub use first_order::{reconstruct_first_order, solve_amplitudes_first_order, FirstOrderStep};
pub use precondition::{optimize_preconditioning, PreconditionOptions, PreconditionResult};
pub use second_order::{reconstruct_second_order, solve_amplitudes_second_order, SecondOrderStep};

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{BlochTrajectory, DissipationRates, Lindbladian, PauliHamiltonian, DEFAULT_SUBSTEPS};
use crate::error::{Error, Result};
use crate::pauli::{expectations, trace, CMatrix, Pauli, PauliLabel, C64};
use crate::signal::{butterworth_coefficients, filter_apply, FilterSpec};

/// Measured data and prior knowledge for one reconstruction.
#[derive(Clone, Debug)]
pub struct ReconstructionInput {
    pub qubits: usize,
    pub dt: f64,
    /// Tomography of each initial state.
    pub initial_states: Vec<CMatrix>,
    /// `z[s][q][n]` for `n = 0..=N`.
    pub z: Vec<Vec<Vec<f64>>>,
    pub rates: Vec<DissipationRates>,
    /// Known amplitudes, `N` samples; their labels are never solved for.
    pub preconditioned: Option<PauliHamiltonian>,
    /// Labels to solve for; `None` means every label the mode can see.
    pub recover_labels: Option<Vec<PauliLabel>>,
}

impl ReconstructionInput {
    pub fn new(
        qubits: usize,
        dt: f64,
        initial_states: Vec<CMatrix>,
        z: Vec<Vec<Vec<f64>>>,
        rates: Vec<DissipationRates>,
    ) -> Self {
        Self {
            qubits,
            dt,
            initial_states,
            z,
            rates,
            preconditioned: None,
            recover_labels: None,
        }
    }

    pub fn with_preconditioned(mut self, h: PauliHamiltonian) -> Self {
        self.preconditioned = Some(h);
        self
    }

    pub fn with_labels(mut self, labels: Vec<PauliLabel>) -> Self {
        self.recover_labels = Some(labels);
        self
    }

    /// Number of amplitude samples `N`.
    pub fn steps(&self) -> usize {
        self.z
            .first()
            .and_then(|s| s.first())
            .map_or(0, |v| v.len().saturating_sub(1))
    }

    pub fn normalization(&self) -> f64 {
        1.0 / (1u64 << self.qubits) as f64
    }

    fn is_preconditioned(&self, label: &PauliLabel) -> bool {
        self.preconditioned
            .as_ref()
            .is_some_and(|h| h.labels().any(|l| l == label))
    }

    /// Non-`Z`-type labels to solve for, with preconditioned labels removed.
    pub fn linear_labels(&self) -> Result<Vec<PauliLabel>> {
        let labels = match &self.recover_labels {
            Some(l) => l.clone(),
            None => PauliLabel::recoverable(self.qubits),
        };
        for l in &labels {
            if l.qubits() != self.qubits || l.is_identity() {
                return Err(Error::InvalidLabel(l.to_string()));
            }
            if l.is_z_type() {
                return Err(Error::InvalidInput(format!(
                    "{l} commutes with every measured Z and cannot be solved at first order; precondition it instead"
                )));
            }
        }
        Ok(labels.into_iter().filter(|l| !self.is_preconditioned(l)).collect())
    }

    /// `Z`-type labels left unknown for the second-order solve.
    pub fn z_labels(&self) -> Vec<PauliLabel> {
        PauliLabel::all(self.qubits)
            .into_iter()
            .filter(|l| l.is_z_type() && !self.is_preconditioned(l))
            .collect()
    }

    /// Minimum initial-state count for first-order mode.
    pub fn min_states_first_order(qubits: usize) -> usize {
        let d = 1usize << qubits;
        (d * (d - 1)).div_ceil(qubits)
    }

    pub fn validate(&self, min_states: usize) -> Result<()> {
        if self.qubits == 0 || !(self.dt > 0.0) {
            return Err(Error::InvalidInput("need at least one qubit and dt > 0".into()));
        }
        let s = self.initial_states.len();
        if s < min_states {
            return Err(Error::InvalidInput(format!(
                "{s} initial state(s) given; this mode needs S >= {min_states} for {} qubit(s)",
                self.qubits
            )));
        }
        if self.z.len() != s {
            return Err(Error::InvalidInput(format!("{} z records for {s} initial states", self.z.len())));
        }
        let d = 1usize << self.qubits;
        let n = self.steps();
        if n == 0 {
            return Err(Error::InvalidInput("z records need at least two samples".into()));
        }
        for (k, (rho, zs)) in self.initial_states.iter().zip(&self.z).enumerate() {
            if rho.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("initial state {k} is {:?}", rho.shape())));
            }
            let tr = trace(rho).re;
            if (tr - 1.0).abs() > 1e-9 {
                return Err(Error::NonUnitTrace { trace: tr });
            }
            if zs.len() != self.qubits || zs.iter().any(|z| z.len() != n + 1) {
                return Err(Error::GridMismatch(format!(
                    "state {k}: every qubit needs {} z samples",
                    n + 1
                )));
            }
        }
        if self.rates.len() != self.qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} rate sets for {} qubits",
                self.rates.len(),
                self.qubits
            )));
        }
        if let Some(h) = &self.preconditioned {
            if h.qubits() != self.qubits || h.len() != n || (h.dt() - self.dt).abs() > 1e-15 * self.dt {
                return Err(Error::GridMismatch(
                    "preconditioned amplitudes must share the reconstruction grid".into(),
                ));
            }
        }
        Ok(())
    }

    fn z_at(&self, s: usize, step: usize) -> Vec<f64> {
        self.z[s].iter().map(|zq| zq[step]).collect()
    }

    fn preconditioned_matrix(&self, step: usize) -> CMatrix {
        let d = 1usize << self.qubits;
        match &self.preconditioned {
            Some(h) => h.matrix_at(step),
            None => CMatrix::zeros(d, d),
        }
    }
}

/// Per-step health of the least-squares solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub rank: usize,
    pub min_singular: f64,
    pub max_singular: f64,
    /// Norm of the unexplained part of the increment vector.
    pub residual: f64,
    /// Nonlinear iterations (1 for linear solves).
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    /// Solved amplitudes (after the output filter, if any).
    pub amplitudes: PauliHamiltonian,
    /// Solved amplitudes before output filtering.
    pub raw_amplitudes: PauliHamiltonian,
    pub preconditioned: Option<PauliHamiltonian>,
    /// Engine trajectories, `N + 1` rows each.
    pub trajectories: Vec<BlochTrajectory>,
    pub final_states: Vec<CMatrix>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl ReconstructionResult {
    /// Solved plus preconditioned amplitudes.
    pub fn hamiltonian(&self) -> PauliHamiltonian {
        match &self.preconditioned {
            Some(p) => self.amplitudes.plus(p).expect("same grid"),
            None => self.amplitudes.clone(),
        }
    }

    /// `time_s` followed by one column per solved label.
    pub fn amplitudes_csv(&self) -> String {
        self.hamiltonian().to_csv()
    }

    /// `time_s,rank,min_singular_value,max_singular_value,residual,iterations`.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("time_s,rank,min_singular_value,max_singular_value,residual,iterations\n");
        for d in &self.diagnostics {
            out.push_str(&format!(
                "{:.14e},{},{:.14e},{:.14e},{:.14e},{}\n",
                d.step as f64 * self.amplitudes.dt(),
                d.rank,
                d.min_singular,
                d.max_singular,
                d.residual,
                d.iterations
            ));
        }
        out
    }
}

/// Engine tuning shared by all modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineOptions {
    pub substeps: usize,
    /// Relative singular-value cutoff; anything below it is an error.
    pub rank_tol: f64,
    /// Applied to the solved amplitudes after the run.
    pub output_filter: Option<FilterSpec>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            substeps: DEFAULT_SUBSTEPS,
            rank_tol: 1e-6,
            output_filter: None,
        }
    }
}

/// Reconstruction mode.
#[derive(Clone, Debug)]
pub enum Mode {
    FirstOrder,
    SecondOrder,
    FastSlow(PauliHamiltonian),
}

pub fn reconstruct(input: &ReconstructionInput, mode: &Mode, opts: &EngineOptions) -> Result<ReconstructionResult> {
    match mode {
        Mode::FirstOrder => reconstruct_first_order(input, opts),
        Mode::SecondOrder => reconstruct_second_order(input, opts),
        Mode::FastSlow(guess) => reconstruct_fast_slow(input, guess, opts),
    }
}

/// Coefficient of `Omega_P` in `d<Z_q>/dt`: `norm * Tr(rho i[P, Z_q])`,
/// stored as a sign times a single partner expectation.
#[derive(Clone, Debug)]
pub(crate) struct DesignTable {
    qubits: usize,
    /// `[q][column]` -> `(coefficient, partner index into the Bloch vector)`.
    entries: Vec<Vec<Option<(f64, usize)>>>,
}

impl DesignTable {
    pub(crate) fn new(qubits: usize, labels: &[PauliLabel], normalization: f64) -> Self {
        let entries = (0..qubits)
            .map(|q| {
                let zq = PauliLabel::single(qubits, q, Pauli::Z);
                labels
                    .iter()
                    .map(|p| match p.letters()[q] {
                        Pauli::X | Pauli::Y => {
                            let (phase, partner) = p.product(&zq);
                            // P anticommutes with Z_q: i[P, Z_q] = 2 i P Z_q
                            let c = (C64::new(0.0, 2.0) * phase).re * normalization;
                            Some((c, partner.index() - 1))
                        }
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        Self { qubits, entries }
    }

    pub(crate) fn columns(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// Row of coefficients for qubit `q` given Bloch vector `b`.
    pub(crate) fn row(&self, q: usize, b: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let b = b.to_vec();
        self.entries[q]
            .iter()
            .map(move |e| e.map_or(0.0, |(c, k)| c * b[k]))
    }

    /// Stacked `(S * Q) x L` matrix, rows ordered state-major.
    pub(crate) fn matrix(&self, blochs: &[Vec<f64>]) -> DMatrix<f64> {
        let rows = blochs.len() * self.qubits;
        let mut m = DMatrix::zeros(rows, self.columns());
        for (s, b) in blochs.iter().enumerate() {
            for q in 0..self.qubits {
                for (c, v) in self.row(q, b).enumerate() {
                    m[(s * self.qubits + q, c)] = v;
                }
            }
        }
        m
    }
}

/// Design matrix for the first-order update from per-state Pauli
/// expectations at `t_n`.
pub fn build_design_matrix(
    states: &[Vec<f64>],
    recover_labels: &[PauliLabel],
    qubits: usize,
    normalization: f64,
) -> DMatrix<f64> {
    DesignTable::new(qubits, recover_labels, normalization).matrix(states)
}

/// Index of `Z_q` in the Bloch vector.
pub(crate) fn z_index(qubits: usize, q: usize) -> usize {
    PauliLabel::single(qubits, q, Pauli::Z).index() - 1
}

/// `d<Z_q>/dt` from everything already known (dissipation plus `h_known`).
pub(crate) fn known_drift(lindblad: &Lindbladian, h_known: &CMatrix, rho: &CMatrix) -> Vec<f64> {
    let q = lindblad.qubits();
    let full = expectations(&lindblad.rhs(h_known, rho), q);
    (0..q).map(|k| full[z_index(q, k)]).collect()
}

/// SVD least squares that refuses to truncate.
pub(crate) fn solve_least_squares(
    m: &DMatrix<f64>,
    y: &DVector<f64>,
    step: usize,
    rank_tol: f64,
) -> Result<(DVector<f64>, StepDiagnostics)> {
    let cols = m.ncols();
    let svd = m.clone().svd(true, true);
    let sv = &svd.singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = if sv.len() < cols {
        0.0
    } else {
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    };
    if !(max > 0.0) || min < rank_tol * max {
        return Err(Error::SingularSystem {
            step,
            singular_values: sv.iter().copied().collect(),
        });
    }
    let x = svd
        .solve(y, rank_tol * max)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let residual = (m * &x - y).norm();
    Ok((
        x,
        StepDiagnostics {
            step,
            rank: cols,
            min_singular: min,
            max_singular: max,
            residual,
            iterations: 1,
        },
    ))
}

/// Largest phase (`|H|_F dt` per substep) the engine integrates in one RK4 stage.
const MAX_SUBSTEP_PHASE: f64 = 0.05;

/// At least `min`, and enough that no substep rotates by more than
/// `MAX_SUBSTEP_PHASE`.
pub(crate) fn substeps_for(h: &CMatrix, dt: f64, min: usize) -> usize {
    let needed = (h.norm() * dt / MAX_SUBSTEP_PHASE).ceil() as usize;
    needed.max(min).max(1)
}

/// Advances every engine state one `dt` under `h` and records the Bloch rows.
pub(crate) fn integrate_states(
    lindblad: &Lindbladian,
    h: &CMatrix,
    states: &mut [CMatrix],
    rows: &mut [Vec<Vec<f64>>],
    dt: f64,
    substeps: usize,
    step: usize,
) -> Result<()> {
    let q = lindblad.qubits();
    let substeps = substeps_for(h, dt, substeps);
    for (rho, traj) in states.iter_mut().zip(rows.iter_mut()) {
        *rho = lindblad.step(h, rho, dt, substeps);
        let drift = (trace(rho).re - 1.0).abs();
        if drift > 1e-6 || !drift.is_finite() {
            return Err(Error::IntegrationFailure { step, drift });
        }
        traj.push(expectations(rho, q));
    }
    Ok(())
}

/// Builds the amplitude container and applies the optional output filter.
pub(crate) fn finish(
    input: &ReconstructionInput,
    labels: &[PauliLabel],
    series: Vec<Vec<f64>>,
    states: Vec<CMatrix>,
    rows: Vec<Vec<Vec<f64>>>,
    diagnostics: Vec<StepDiagnostics>,
    opts: &EngineOptions,
) -> Result<ReconstructionResult> {
    let n = input.steps();
    let mut raw = PauliHamiltonian::zeros(input.qubits, input.dt, n);
    for (label, s) in labels.iter().zip(series) {
        raw.set(label.clone(), s)?;
    }
    let amplitudes = match &opts.output_filter {
        Some(spec) => {
            let fs = 1.0 / input.dt;
            let c = butterworth_coefficients(spec, fs)?;
            let mut out = PauliHamiltonian::zeros(input.qubits, input.dt, n);
            for (label, s) in raw.iter() {
                out.set(label.clone(), filter_apply(s, &c, spec.phase_mode))?;
            }
            out
        }
        None => raw.clone(),
    };
    Ok(ReconstructionResult {
        amplitudes,
        raw_amplitudes: raw,
        preconditioned: input.preconditioned.clone(),
        trajectories: rows
            .into_iter()
            .map(|r| BlochTrajectory::new(input.qubits, input.dt, r))
            .collect(),
        final_states: states,
        diagnostics,
    })
}
