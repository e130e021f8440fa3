//! Scenario configs and the batch pipeline behind the CLI.
//!
//! A scenario is one TOML file: device, ground-truth pulse, readout chain and
//! reconstruction settings. Frequencies in configs are `f = Omega / 2 pi` in
//! MHz or GHz, times in ns or us, rates in 1/us; everything is converted to
//! rad/s and seconds on resolution. The manifest written with every run embeds
//! the fully defaulted config, so a manifest can be run again directly.

mod gallery;
mod output;
mod run;
pub mod waveform;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use gallery::{bundled, bundled_names};
pub use output::{output_dir, write_outputs, ARTIFACTS};
pub use run::{run_scenario, run_single, ChevronOutput, RunOutput, ScenarioOutput, StateTrace, SweepPoint};
use waveform::Waveform;

use crate::coupler::{CouplerParams, ModulationPulse};
use crate::dynamics::DissipationRates;
use crate::engine::ReconstructionInput;
use crate::error::{Error, Result};
use crate::pauli::{cardinal_qubits, cardinal_state, PauliLabel};
use crate::readout::{MeasurementDephasing, ReadoutParams};
use crate::signal::{DelayShift, FilterSpec, PhaseMode};

const MHZ: f64 = 2.0 * PI * 1e6;

/// Configured delay may differ from `2 / kappa` by this fraction before a
/// warning is raised.
pub const TAU_TOLERANCE: f64 = 0.2;

fn default_seed() -> u64 {
    1
}
fn default_shots() -> usize {
    10_000
}
fn default_sample_rate() -> f64 {
    1.0
}
fn default_calibration_ns() -> f64 {
    1000.0
}
fn default_substeps() -> usize {
    crate::dynamics::DEFAULT_SUBSTEPS
}
fn default_rank_tol() -> f64 {
    1e-6
}
fn default_max_iterations() -> u64 {
    400
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Shots averaged per initial state.
    #[serde(default = "default_shots")]
    pub shots: usize,
    /// Zero readout noise and a single shot.
    #[serde(default)]
    pub noiseless: bool,
    pub timing: Timing,
    pub device: Device,
    #[serde(default)]
    pub readout: ReadoutChain,
    #[serde(default)]
    pub truth: TruthSpec,
    /// Hamiltonian the dynamical fidelity is scored against; the truth if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<TruthSpec>,
    pub reconstruction: ReconstructionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chevron: Option<ChevronSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    /// Pulse length `t_p`.
    pub duration_ns: f64,
    /// Reconstruction step.
    pub dt_ns: f64,
    /// Digitizer rate in GSa/s.
    #[serde(default = "default_sample_rate")]
    pub sample_rate_gsps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Device {
    /// One entry per qubit, qubit 1 first.
    pub qubits: Vec<QubitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupler: Option<CouplerConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitConfig {
    pub kappa_mhz: f64,
    pub chi_mhz: f64,
    pub nbar: f64,
    pub eta: f64,
    /// Single-shot noise std per raw sample, in resonator field units.
    pub noise_sigma: f64,
    /// Measurement-induced dephasing, 1/us.
    pub gamma_d_per_us: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    /// Ramsey time without the measurement tone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_us: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplerConfig {
    pub omega_c0_ghz: f64,
    pub asymmetry: f64,
    pub g1c_mhz: f64,
    pub g2c_mhz: f64,
    pub g12_mhz: f64,
    pub omega_q1_ghz: f64,
    pub omega_q2_ghz: f64,
    pub zeta_khz: f64,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        Self {
            omega_c0_ghz: 6.5,
            asymmetry: 0.2,
            g1c_mhz: 120.0,
            g2c_mhz: 170.0,
            g12_mhz: 18.0,
            omega_q1_ghz: 5.319,
            omega_q2_ghz: 5.271,
            zeta_khz: 28.1,
        }
    }
}

impl CouplerConfig {
    pub fn params(&self) -> CouplerParams {
        CouplerParams {
            omega_c0: self.omega_c0_ghz * 1e3 * MHZ,
            asymmetry: self.asymmetry,
            g1c: self.g1c_mhz * MHZ,
            g2c: self.g2c_mhz * MHZ,
            g12: self.g12_mhz * MHZ,
            omega_q1: self.omega_q1_ghz * 1e3 * MHZ,
            omega_q2: self.omega_q2_ghz * 1e3 * MHZ,
            zeta_measured: self.zeta_khz * 1e-3 * MHZ,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonatorModel {
    /// Field follows `z` with an exact `2 / kappa` delay.
    #[default]
    Adiabatic,
    /// Field integrated from its equation of motion.
    Ode,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub order: usize,
    pub critical_mhz: f64,
    #[serde(default)]
    pub phase_mode: PhaseMode,
}

impl FilterConfig {
    pub fn spec(&self) -> FilterSpec {
        FilterSpec {
            order: self.order,
            critical_freq: self.critical_mhz * 1e6,
            phase_mode: self.phase_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutChain {
    #[serde(default)]
    pub model: ResonatorModel,
    /// Delay removed per qubit; `2 / kappa` if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_ns: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(default)]
    pub shift: DelayShift,
    /// Length of each calibration trace.
    #[serde(default = "default_calibration_ns")]
    pub calibration_ns: f64,
}

impl Default for ReadoutChain {
    fn default() -> Self {
        Self {
            model: ResonatorModel::Adiabatic,
            tau_ns: None,
            filter: None,
            shift: DelayShift::default(),
            calibration_ns: default_calibration_ns(),
        }
    }
}

/// One Pauli term with its waveform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    #[serde(flatten)]
    pub waveform: Waveform,
}

/// Parametric coupler drive targeting `XY(beta, theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerDrive {
    pub beta: f64,
    pub theta: f64,
    /// Envelope shape; only its normalized profile is used.
    pub envelope: Waveform,
    /// Modulation-frequency error, kHz.
    #[serde(default)]
    pub detuning_khz: f64,
    /// Add the measured static ZZ for the whole pulse.
    #[serde(default)]
    pub static_zz: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSpec {
    #[serde(default)]
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupler: Option<CouplerDrive>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    FirstOrder,
    SecondOrder,
    FastSlow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub labels: Vec<String>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionSpec {
    #[serde(default)]
    pub mode: ModeSpec,
    /// Cardinal product states such as `+X` or `+X-Z`.
    pub initial_states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recover_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_filter: Option<FilterConfig>,
    /// Known amplitudes supplied to the engine.
    #[serde(default)]
    pub precondition: Vec<Term>,
    /// Z-type labels whose constant values are fitted to the final tomography.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSpec>,
    /// The fast part handed to fast/slow mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_guess: Option<TruthSpec>,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
}

/// Re-runs the scenario once per pulse length; area-specified waveforms keep
/// their area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub durations_ns: Vec<f64>,
}

/// `|01>` population scan over constant-amplitude modulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChevronSpec {
    /// Modulation amplitude in flux quanta.
    pub epsilon: f64,
    pub detunings_mhz: Vec<f64>,
    pub durations_ns: Vec<f64>,
}

fn whole_ratio(a: f64, b: f64) -> Option<usize> {
    let r = a / b;
    let k = r.round();
    (k >= 1.0 && (r - k).abs() <= 1e-9 * r.max(1.0)).then_some(k as usize)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("scenario", e.to_string()))
    }

    /// Reads a scenario TOML, or a `manifest.json` written by a previous run.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let field = path.display().to_string();
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::config(&field, e.to_string()))?;
            let body = value.get("scenario").cloned().unwrap_or(value);
            serde_json::from_value(body).map_err(|e| Error::config(field, e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::config(field, e.to_string()))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shots(mut self, shots: usize) -> Self {
        self.shots = shots;
        self
    }

    pub fn into_noiseless(mut self) -> Self {
        self.noiseless = true;
        self
    }

    /// Shots actually simulated.
    pub fn effective_shots(&self) -> usize {
        if self.noiseless {
            1
        } else {
            self.shots
        }
    }

    pub fn qubits(&self) -> usize {
        self.device.qubits.len()
    }

    pub fn duration(&self) -> f64 {
        self.timing.duration_ns * 1e-9
    }

    pub fn dt(&self) -> f64 {
        self.timing.dt_ns * 1e-9
    }

    pub fn sample_rate(&self) -> f64 {
        self.timing.sample_rate_gsps * 1e9
    }

    /// Reconstruction steps `N`.
    pub fn steps(&self) -> usize {
        whole_ratio(self.timing.duration_ns, self.timing.dt_ns).unwrap_or(0)
    }

    /// Raw samples per reconstruction step.
    pub fn decimation(&self) -> usize {
        whole_ratio(self.timing.dt_ns * self.timing.sample_rate_gsps, 1.0).unwrap_or(0)
    }

    pub fn readout_params(&self) -> Vec<ReadoutParams> {
        self.device
            .qubits
            .iter()
            .map(|c| {
                let noise = if self.noiseless { 0.0 } else { c.noise_sigma };
                ReadoutParams::new(c.kappa_mhz * MHZ, c.chi_mhz * MHZ, c.nbar, c.eta, self.sample_rate(), noise)
                    .with_dephasing(MeasurementDephasing::Calibrated {
                        gamma_d: c.gamma_d_per_us * 1e6,
                    })
            })
            .collect()
    }

    /// Rates shared by the simulator and the engine; `gamma_d` comes from the
    /// readout config so both see the same value.
    pub fn rates(&self) -> Vec<DissipationRates> {
        self.device
            .qubits
            .iter()
            .zip(self.readout_params())
            .map(|(c, p)| {
                let gamma_down = c.t1_us.map_or(0.0, |t| 1e6 / t);
                let gamma_phi = c.t2_us.map_or(0.0, |t2| (1e6 / t2 - 0.5 * gamma_down).max(0.0));
                DissipationRates {
                    gamma_down,
                    gamma_up: 0.0,
                    gamma_phi,
                    gamma_d: crate::readout::measurement_dephasing(&p),
                }
            })
            .collect()
    }

    pub fn coupler_params(&self) -> CouplerParams {
        self.device.coupler.unwrap_or_default().params()
    }

    /// Delay removed from each qubit's record.
    pub fn taus(&self) -> Vec<f64> {
        match &self.readout.tau_ns {
            Some(t) => t.iter().map(|v| v * 1e-9).collect(),
            None => self.readout_params().iter().map(ReadoutParams::delay).collect(),
        }
    }

    pub fn min_states(&self) -> usize {
        let q = self.qubits();
        let first = ReconstructionInput::min_states_first_order(q);
        match self.reconstruction.mode {
            ModeSpec::SecondOrder => {
                let unknowns = (1usize << (2 * q)) - 1;
                unknowns.div_ceil(q).max(first)
            }
            _ => first,
        }
    }

    fn check_terms(&self, terms: &[Term], field: &str) -> Result<()> {
        let q = self.qubits();
        for (i, t) in terms.iter().enumerate() {
            let f = format!("{field}[{i}]");
            let label: PauliLabel = t
                .label
                .parse()
                .map_err(|_| Error::config(&f, format!("bad Pauli label {:?}", t.label)))?;
            if label.qubits() != q || label.is_identity() {
                return Err(Error::config(&f, format!("label {} does not fit {q} qubit(s)", t.label)));
            }
            t.waveform.validate(self.duration(), &f)?;
        }
        Ok(())
    }

    fn check_truth(&self, spec: &TruthSpec, field: &str) -> Result<()> {
        self.check_terms(&spec.terms, &format!("{field}.terms"))?;
        if let Some(c) = &spec.coupler {
            let f = format!("{field}.coupler");
            if self.qubits() != 2 {
                return Err(Error::config(&f, "a coupler drive needs two qubits"));
            }
            c.envelope.validate(self.duration(), &format!("{f}.envelope"))?;
            let p = self.coupler_params();
            p.validate()?;
            let n = 64;
            let h = self.duration() / n as f64;
            let shape: Vec<f64> = (0..n).map(|k| c.envelope.unit_shape((k as f64 + 0.5) * h, self.duration())).collect();
            ModulationPulse::for_gate(c.beta, c.theta, &shape, h, &p).map_err(|e| Error::Scenario {
                context: f,
                source: Box::new(e),
            })?;
        }
        Ok(())
    }

    /// Checks every rule a run depends on; returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        let q = self.qubits();
        if !(1..=2).contains(&q) {
            return Err(Error::config("device.qubits", format!("1 or 2 qubits supported, got {q}")));
        }
        let t = &self.timing;
        if !(t.duration_ns > 0.0 && t.dt_ns > 0.0 && t.sample_rate_gsps > 0.0) {
            return Err(Error::config("timing", "duration, dt and sample rate must be positive"));
        }
        if self.steps() == 0 {
            return Err(Error::config("timing.dt_ns", "the pulse must be a whole number of steps"));
        }
        if self.decimation() == 0 {
            return Err(Error::config("timing.dt_ns", "dt must be a whole number of raw samples"));
        }
        if self.shots == 0 {
            return Err(Error::config("shots", "must be at least 1"));
        }
        for (i, p) in self.readout_params().iter().enumerate() {
            p.validate().map_err(|e| match e {
                Error::Config { field, message } => Error::config(format!("device.qubits[{i}].{field}"), message),
                other => other,
            })?;
        }
        for (i, r) in self.rates().iter().enumerate() {
            r.validate()?;
            if let Some(t2) = self.device.qubits[i].t2_us {
                let t1 = self.device.qubits[i].t1_us.unwrap_or(f64::INFINITY);
                if t2 > 2.0 * t1 {
                    return Err(Error::config(format!("device.qubits[{i}].t2_us"), "T2 cannot exceed 2 T1"));
                }
            }
        }
        if let Some(c) = &self.device.coupler {
            c.params().validate()?;
        }

        let taus = self.taus();
        if taus.len() != q || taus.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::config("readout.tau_ns", format!("need one non-negative delay per qubit ({q})")));
        }
        for (i, (tau, p)) in taus.iter().zip(self.readout_params()).enumerate() {
            let expected = p.delay();
            if (tau - expected).abs() > TAU_TOLERANCE * expected {
                warnings.push(format!(
                    "qubit {}: tau = {:.2} ns deviates from 2/kappa = {:.2} ns by more than {:.0}%",
                    i + 1,
                    tau * 1e9,
                    expected * 1e9,
                    TAU_TOLERANCE * 100.0
                ));
            }
        }
        if let Some(f) = &self.readout.filter {
            f.spec().validate(self.sample_rate())?;
        }
        if let Some(f) = &self.reconstruction.output_filter {
            f.spec().validate(1.0 / self.dt())?;
        }
        if !(self.readout.calibration_ns > 0.0) {
            return Err(Error::config("readout.calibration_ns", "must be positive"));
        }

        self.check_truth(&self.truth, "truth")?;
        if let Some(r) = &self.reference {
            self.check_truth(r, "reference")?;
        }

        let rec = &self.reconstruction;
        let mut seen = BTreeSet::new();
        for (i, label) in rec.initial_states.iter().enumerate() {
            let field = format!("reconstruction.initial_states[{i}]");
            cardinal_state(label).map_err(|_| Error::config(&field, format!("bad state label {label:?}")))?;
            if cardinal_qubits(label) != q {
                return Err(Error::config(&field, format!("{label} is not a {q}-qubit state")));
            }
            if !seen.insert(label.to_ascii_uppercase()) {
                return Err(Error::config(&field, format!("{label} appears twice")));
            }
        }
        let min = self.min_states();
        if rec.initial_states.len() < min {
            let d = 1usize << q;
            return Err(Error::config(
                "reconstruction.initial_states",
                format!(
                    "{} initial state(s) given; the inversion needs S >= {min} linearly independent initial states \
                     for {q} qubit(s) (S >= d(d-1)/Q = {})",
                    rec.initial_states.len(),
                    (d * (d - 1)).div_ceil(q)
                ),
            ));
        }
        if let Some(labels) = &rec.recover_labels {
            for (i, l) in labels.iter().enumerate() {
                let field = format!("reconstruction.recover_labels[{i}]");
                let label: PauliLabel = l.parse().map_err(|_| Error::config(&field, format!("bad label {l:?}")))?;
                if label.qubits() != q || label.is_identity() || label.is_z_type() {
                    return Err(Error::config(&field, format!("{l} cannot be solved for at first order")));
                }
            }
        }
        self.check_terms(&rec.precondition, "reconstruction.precondition")?;
        if let Some(opt) = &rec.optimize {
            for (i, l) in opt.labels.iter().enumerate() {
                let field = format!("reconstruction.optimize.labels[{i}]");
                let label: PauliLabel = l.parse().map_err(|_| Error::config(&field, format!("bad label {l:?}")))?;
                if label.qubits() != q || !label.is_z_type() || label.is_identity() {
                    return Err(Error::config(&field, format!("{l} is not a Z-type label on {q} qubit(s)")));
                }
            }
        }
        match (rec.mode, &rec.fast_guess) {
            (ModeSpec::FastSlow, None) => {
                return Err(Error::config("reconstruction.fast_guess", "fast_slow mode needs a fast guess"))
            }
            (_, Some(g)) => self.check_truth(g, "reconstruction.fast_guess")?,
            _ => {}
        }
        if rec.substeps == 0 || !(rec.rank_tol > 0.0 && rec.rank_tol < 1.0) {
            return Err(Error::config("reconstruction", "substeps >= 1 and 0 < rank_tol < 1"));
        }

        if let Some(s) = &self.sweep {
            if s.durations_ns.is_empty() {
                return Err(Error::config("sweep.durations_ns", "must not be empty"));
            }
            for (i, d) in s.durations_ns.iter().enumerate() {
                let mut point = self.clone();
                point.timing.duration_ns = *d;
                point.sweep = None;
                point
                    .validate()
                    .map_err(|e| Error::Scenario {
                        context: format!("sweep.durations_ns[{i}] = {d}"),
                        source: Box::new(e),
                    })?;
            }
        }
        if let Some(c) = &self.chevron {
            if q != 2 {
                return Err(Error::config("chevron", "needs two qubits"));
            }
            if !(c.epsilon.abs() <= crate::coupler::MAX_MODULATION) {
                return Err(Error::config("chevron.epsilon", "exceeds the modulation bound"));
            }
            if c.durations_ns.iter().any(|t| !(*t >= 0.0)) {
                return Err(Error::config("chevron.durations_ns", "must be non-negative"));
            }
        }
        Ok(warnings)
    }

    /// Human-readable summary for `describe`.
    pub fn describe(&self) -> String {
        let mut out = format!("{}\n\n{}\n\n", self.name, self.description.trim());
        let mode = match self.reconstruction.mode {
            ModeSpec::FirstOrder => "first order",
            ModeSpec::SecondOrder => "second order",
            ModeSpec::FastSlow => "fast/slow",
        };
        out.push_str(&format!(
            "qubits: {}\npulse: {} ns, dt = {} ns\ninitial states: {} ({})\nshots: {}{}\nmode: {mode}\n",
            self.qubits(),
            self.timing.duration_ns,
            self.timing.dt_ns,
            self.reconstruction.initial_states.len(),
            self.reconstruction.initial_states.join(" "),
            self.shots,
            if self.noiseless { " (noiseless)" } else { "" },
        ));
        let labels: Vec<&str> = self.truth.terms.iter().map(|t| t.label.as_str()).collect();
        if !labels.is_empty() {
            out.push_str(&format!("truth terms: {}\n", labels.join(" ")));
        }
        if let Some(c) = &self.truth.coupler {
            out.push_str(&format!(
                "coupler drive: XY(beta = {:.4}, theta = {:.4}), detuning {} kHz\n",
                c.beta, c.theta, c.detuning_khz
            ));
        }
        if !self.reconstruction.precondition.is_empty() {
            let l: Vec<&str> = self.reconstruction.precondition.iter().map(|t| t.label.as_str()).collect();
            out.push_str(&format!("preconditioned: {}\n", l.join(" ")));
        }
        if let Some(o) = &self.reconstruction.optimize {
            out.push_str(&format!("preconditioning optimized over: {}\n", o.labels.join(" ")));
        }
        if let Some(s) = &self.sweep {
            out.push_str(&format!("sweep over durations (ns): {:?}\n", s.durations_ns));
        }
        if let Some(c) = &self.chevron {
            out.push_str(&format!(
                "chevron: epsilon = {}, {} detunings x {} durations\n",
                c.epsilon,
                c.detunings_mhz.len(),
                c.durations_ns.len()
            ));
        }
        out
    }
}
