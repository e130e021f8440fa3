//! simulate -> synthesize -> condition -> reconstruct -> score.
//!
//! The simulator runs on a grid of half a raw sample, `h = 1 / (2 fs)`,
//! starting `k - 1` steps before the pulse (`k` raw samples per
//! reconstruction bin). Raw sample `i` then sits on simulator point `2 i` and
//! bin `n` of the conditioned trace is centred exactly on `t_n = n dt`. The
//! truth is zero outside `[0, t_p]`; its value on the reconstruction grid is
//! the mean over the `2 k` simulator steps of each bin.

use std::f64::consts::PI;

use super::{ModeSpec, ResonatorModel, Scenario, Term, TruthSpec};
use crate::coupler::{chevron, modulated_two_qubit_hamiltonian, ModulationPulse};
use crate::dynamics::{lindblad_evolve_with, PauliHamiltonian};
use crate::engine::{
    optimize_preconditioning, reconstruct, EngineOptions, Mode, PreconditionOptions, PreconditionResult,
    ReconstructionInput, ReconstructionResult,
};
use crate::error::{Error, Result};
use crate::metrics::{dynamical_coherent_fidelity, mean_fidelity, FidelityTrace, ReconstructionFidelity};
use crate::pauli::{cardinal_state, density_from_bloch, CMatrix, Pauli, PauliLabel};
use crate::readout::{
    calibrate, calibration_traces, resonator_response_adiabatic, resonator_response_ode, stream_seed,
    synthesize_shots,
};
use crate::signal::{condition_with, Conditioning};

/// RNG sub-stream tag for calibration traces.
const CALIBRATION_STREAM: u64 = 1000;

/// Measured and true `<Z_q>` for one initial state on `t_0..=t_N`.
#[derive(Clone, Debug)]
pub struct StateTrace {
    pub label: String,
    /// `[q][n]`.
    pub true_z: Vec<Vec<f64>>,
    /// `[q][n]`.
    pub conditioned_z: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub warnings: Vec<String>,
    /// Truth on the reconstruction grid.
    pub truth: PauliHamiltonian,
    /// What the dynamical fidelity is scored against.
    pub reference: PauliHamiltonian,
    pub traces: Vec<StateTrace>,
    /// Final states of the simulator.
    pub tomography: Vec<CMatrix>,
    pub result: ReconstructionResult,
    pub fidelity: ReconstructionFidelity,
    pub dynamical: FidelityTrace,
    pub preconditioning: Option<PreconditionResult>,
    /// Raw samples per record.
    pub record_samples: usize,
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub duration_ns: f64,
    pub run: RunOutput,
}

#[derive(Clone, Debug)]
pub struct ChevronOutput {
    pub detunings_mhz: Vec<f64>,
    pub durations_ns: Vec<f64>,
    /// `[detuning][duration]` population of `|01>`.
    pub population: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub enum ScenarioOutput {
    Single(Box<RunOutput>),
    Sweep(Vec<SweepPoint>),
    /// A chevron scenario also runs its reconstruction.
    Chevron(Box<RunOutput>, ChevronOutput),
}

impl ScenarioOutput {
    /// The single run, or the first run of a sweep.
    pub fn primary(&self) -> &RunOutput {
        match self {
            ScenarioOutput::Single(r) | ScenarioOutput::Chevron(r, _) => r,
            ScenarioOutput::Sweep(points) => &points[0].run,
        }
    }
}

fn context(what: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let context = what.into();
    move |e| match e {
        Error::Config { .. } | Error::Scenario { .. } => e,
        other => Error::Scenario {
            context,
            source: Box::new(other),
        },
    }
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutput> {
    s.validate()?;
    if let Some(sweep) = &s.sweep {
        let mut points = Vec::with_capacity(sweep.durations_ns.len());
        for &d in &sweep.durations_ns {
            let mut point = s.clone();
            point.timing.duration_ns = d;
            point.sweep = None;
            let run = run_single(&point).map_err(context(format!("sweep point {d} ns")))?;
            points.push(SweepPoint { duration_ns: d, run });
        }
        return Ok(ScenarioOutput::Sweep(points));
    }
    let run = run_single(s)?;
    match &s.chevron {
        Some(c) => {
            let p = s.coupler_params();
            let detunings: Vec<f64> = c.detunings_mhz.iter().map(|d| d * 2.0 * PI * 1e6).collect();
            let durations: Vec<f64> = c.durations_ns.iter().map(|t| t * 1e-9).collect();
            let population = chevron(c.epsilon, &detunings, &durations, &p).map_err(context("chevron"))?;
            Ok(ScenarioOutput::Chevron(
                Box::new(run),
                ChevronOutput {
                    detunings_mhz: c.detunings_mhz.clone(),
                    durations_ns: c.durations_ns.clone(),
                    population,
                },
            ))
        }
        None => Ok(ScenarioOutput::Single(Box::new(run))),
    }
}

/// Simulator time axis.
struct Grid {
    /// Raw samples per reconstruction bin.
    k: usize,
    /// Simulator step, half a raw sample.
    h: f64,
    /// Reconstruction steps.
    n: usize,
    duration: f64,
    /// Simulator steps.
    len: usize,
}

impl Grid {
    fn pad(&self) -> usize {
        self.k - 1
    }

    /// Simulator point on `t_j = j dt`.
    fn point(&self, j: usize) -> usize {
        self.pad() + 2 * self.k * j
    }

    /// Midpoint time of simulator step `m`, relative to the pulse start.
    fn midpoint(&self, m: usize) -> f64 {
        (m as f64 + 0.5 - self.pad() as f64) * self.h
    }

    /// The simulator series from `t = 0` on.
    fn from_zero(&self, sim: &PauliHamiltonian) -> PauliHamiltonian {
        let mut out = PauliHamiltonian::zeros(sim.qubits(), self.h, self.len - self.pad());
        for (label, series) in sim.iter() {
            out.set(label.clone(), series[self.pad()..].to_vec()).expect("label fits");
        }
        out
    }

    /// Mean of each reconstruction bin.
    fn bin_average(&self, sim: &PauliHamiltonian, dt: f64) -> PauliHamiltonian {
        let mut out = PauliHamiltonian::zeros(sim.qubits(), dt, self.n);
        let w = 2 * self.k;
        for (label, series) in sim.iter() {
            let avg = (0..self.n)
                .map(|j| series[self.point(j)..self.point(j) + w].iter().sum::<f64>() / w as f64)
                .collect();
            out.set(label.clone(), avg).expect("label fits");
        }
        out
    }
}

fn add_term(h: &mut PauliHamiltonian, label: PauliLabel, values: Vec<f64>) -> Result<()> {
    let merged = match h.series(&label) {
        Some(old) => old.iter().zip(&values).map(|(a, b)| a + b).collect(),
        None => values,
    };
    h.set(label, merged)
}

fn terms_on(h: &mut PauliHamiltonian, terms: &[Term], grid: &Grid) -> Result<()> {
    for t in terms {
        let label: PauliLabel = t.label.parse()?;
        let values = (0..grid.len).map(|m| t.waveform.value(grid.midpoint(m), grid.duration)).collect();
        add_term(h, label, values)?;
    }
    Ok(())
}

/// A truth-like spec on the simulator grid.
fn simulate_spec(s: &Scenario, spec: &TruthSpec, grid: &Grid) -> Result<PauliHamiltonian> {
    let q = s.qubits();
    let mut h = PauliHamiltonian::zeros(q, grid.h, grid.len);
    terms_on(&mut h, &spec.terms, grid)?;
    if let Some(c) = &spec.coupler {
        let p = s.coupler_params();
        let shape: Vec<f64> = (0..grid.len)
            .map(|m| c.envelope.unit_shape(grid.midpoint(m), grid.duration))
            .collect();
        let pulse = ModulationPulse::for_gate(c.beta, c.theta, &shape, grid.h, &p)?;
        let inside = |m: usize| (0.0..grid.duration).contains(&grid.midpoint(m));
        let detuning = c.detuning_khz * 2.0 * PI * 1e3;
        let drive = modulated_two_qubit_hamiltonian(&pulse, &p, detuning)?;
        for (label, series) in drive.iter() {
            let windowed = series.iter().enumerate().map(|(m, v)| if inside(m) { *v } else { 0.0 }).collect();
            add_term(&mut h, label.clone(), windowed)?;
        }
        if c.static_zz {
            let zz = (0..grid.len).map(|m| if inside(m) { p.zeta_measured } else { 0.0 }).collect();
            add_term(&mut h, "ZZ".parse()?, zz)?;
        }
    }
    Ok(h)
}

fn z_index(q: usize, qubit: usize) -> usize {
    // Bloch rows exclude the identity
    PauliLabel::single(q, qubit, Pauli::Z).index() - 1
}

pub fn run_single(s: &Scenario) -> Result<RunOutput> {
    let warnings = s.validate()?;
    let q = s.qubits();
    let dt = s.dt();
    let fs = s.sample_rate();
    let readouts = s.readout_params();
    let rates = s.rates();
    let taus = s.taus();
    let shots = s.effective_shots();
    let k = s.decimation();
    let n = s.steps();

    // enough record after t_p to cover the delay shift and the resonator lag
    let lag = readouts
        .iter()
        .zip(&taus)
        .map(|(p, tau)| (tau.max(p.delay()) * fs).ceil() as usize)
        .max()
        .unwrap_or(0);
    let record_samples = (n + 1) * k + lag + 4 * k;
    let grid = Grid {
        k,
        h: 0.5 / fs,
        n,
        duration: s.duration(),
        len: 2 * (record_samples - 1),
    };

    let truth_sim = simulate_spec(s, &s.truth, &grid).map_err(context("truth"))?;
    let truth = grid.bin_average(&truth_sim, dt);
    let reference = match &s.reference {
        Some(r) => grid.bin_average(&simulate_spec(s, r, &grid).map_err(context("reference"))?, dt),
        None => truth.clone(),
    };

    let from_zero = grid.from_zero(&truth_sim);

    let calibrations: Vec<_> = readouts
        .iter()
        .enumerate()
        .map(|(qb, p)| {
            let (plus, minus) = calibration_traces(
                p,
                s.readout.calibration_ns * 1e-9,
                shots,
                stream_seed(s.seed, &[CALIBRATION_STREAM + qb as u64]),
            );
            calibrate(&plus, &minus)
        })
        .collect();
    let filter = s.readout.filter.map(|f| f.spec());
    let t0 = -((k - 1) as f64) * grid.h;

    let rec = &s.reconstruction;
    let mut initial_states = Vec::with_capacity(rec.initial_states.len());
    let mut traces = Vec::with_capacity(rec.initial_states.len());
    let mut tomography = Vec::with_capacity(rec.initial_states.len());
    for (si, label) in rec.initial_states.iter().enumerate() {
        let rho0 = cardinal_state(label)?;
        let (traj, _) = lindblad_evolve_with(&rho0, &from_zero, &rates, rec.substeps)
            .map_err(context(format!("simulating {label}")))?;
        // the state is prepared at t = 0 and held before it
        let mut rows = vec![traj.rows()[0].clone(); grid.pad()];
        rows.extend_from_slice(traj.rows());
        tomography.push(density_from_bloch(&rows[grid.point(n)], q));
        let mut true_z = Vec::with_capacity(q);
        let mut conditioned_z = Vec::with_capacity(q);
        for (qb, p) in readouts.iter().enumerate() {
            let zi = z_index(q, qb);
            true_z.push((0..=n).map(|j| rows[grid.point(j)][zi]).collect::<Vec<_>>());
            let samples: Vec<f64> = (0..record_samples).map(|i| rows[2 * i][zi]).collect();
            let field = match s.readout.model {
                ResonatorModel::Adiabatic => resonator_response_adiabatic(&samples, p),
                ResonatorModel::Ode => resonator_response_ode(&samples, p),
            };
            let mut record = synthesize_shots(&field, p, shots, stream_seed(s.seed, &[si as u64, qb as u64]));
            record.t0 = t0;
            let opts = Conditioning {
                filter,
                target_dt: dt,
                tau: taus[qb],
                shift: s.readout.shift,
            };
            let z = condition_with(&record, &opts, &calibrations[qb]).map_err(context(format!("conditioning {label}")))?;
            conditioned_z.push(z.values[..=n].to_vec());
        }
        initial_states.push(rho0);
        traces.push(StateTrace {
            label: label.clone(),
            true_z,
            conditioned_z,
        });
    }

    let z = traces.iter().map(|t| t.conditioned_z.clone()).collect();
    let mut input = ReconstructionInput::new(q, dt, initial_states, z, rates.clone());
    if let Some(labels) = &rec.recover_labels {
        input = input.with_labels(labels.iter().map(|l| l.parse()).collect::<Result<_>>()?);
    }
    if !rec.precondition.is_empty() {
        let spec = TruthSpec {
            terms: rec.precondition.clone(),
            coupler: None,
        };
        input = input.with_preconditioned(grid.bin_average(&simulate_spec(s, &spec, &grid)?, dt));
    }
    let engine = EngineOptions {
        substeps: rec.substeps,
        rank_tol: rec.rank_tol,
        output_filter: rec.output_filter.map(|f| f.spec()),
    };

    let preconditioning = match &rec.optimize {
        Some(opt) => {
            let labels: Vec<PauliLabel> = opt.labels.iter().map(|l| l.parse()).collect::<Result<_>>()?;
            let opts = PreconditionOptions {
                max_iterations: opt.max_iterations,
                engine,
                ..Default::default()
            };
            let found = optimize_preconditioning(&input, &labels, &tomography, &opts)
                .map_err(context("preconditioning optimization"))?;
            let fitted = found.hamiltonian(q, dt, n);
            let merged = match &input.preconditioned {
                Some(pre) => pre.plus(&fitted)?,
                None => fitted,
            };
            input = input.with_preconditioned(merged);
            Some(found)
        }
        None => None,
    };

    let mode = match rec.mode {
        ModeSpec::FirstOrder => Mode::FirstOrder,
        ModeSpec::SecondOrder => Mode::SecondOrder,
        ModeSpec::FastSlow => {
            let guess = rec.fast_guess.as_ref().expect("validated");
            Mode::FastSlow(grid.bin_average(&simulate_spec(s, guess, &grid)?, dt))
        }
    };
    let result = reconstruct(&input, &mode, &engine).map_err(context("reconstruction"))?;
    let fidelity = mean_fidelity(&result.final_states, &tomography)?;
    let dynamical = dynamical_coherent_fidelity(&result.hamiltonian(), &reference)?;

    Ok(RunOutput {
        scenario: s.clone(),
        warnings,
        truth,
        reference,
        traces,
        tomography,
        result,
        fidelity,
        dynamical,
        preconditioning,
        record_samples,
    })
}
