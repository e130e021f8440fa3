//! Dispersive readout: resonator field from a `<Z>` trajectory, averaged
//! voltage records with shot noise, and calibration traces.
//!
//! Records are the real quadrature of the reflected field. Input `z` series
//! are sampled at `sample_rate`, the same grid the record is emitted on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::C64;

/// How the measurement-induced dephasing rate is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementDephasing {
    /// A measured rate in 1/s.
    Calibrated { gamma_d: f64 },
    /// `gamma_d = per_photon * nbar`.
    PerPhoton { per_photon: f64 },
}

impl Default for MeasurementDephasing {
    fn default() -> Self {
        MeasurementDephasing::Calibrated { gamma_d: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutParams {
    /// Resonator linewidth, rad/s.
    pub kappa: f64,
    /// Full dispersive shift, rad/s.
    pub chi: f64,
    /// Measurement tone amplitude, rad/s.
    pub omega_wm: f64,
    pub nbar: f64,
    /// Detection efficiency in `(0, 1]`.
    pub eta: f64,
    /// Samples per second.
    pub sample_rate: f64,
    /// Single-shot noise std per sample at unit efficiency, in field units.
    pub noise_sigma: f64,
    #[serde(default)]
    pub dephasing: MeasurementDephasing,
}

impl ReadoutParams {
    /// Drive amplitude chosen so that `2 omega_wm / kappa = sqrt(nbar)`.
    pub fn new(kappa: f64, chi: f64, nbar: f64, eta: f64, sample_rate: f64, noise_sigma: f64) -> Self {
        Self {
            kappa,
            chi,
            omega_wm: 0.5 * kappa * nbar.sqrt(),
            nbar,
            eta,
            sample_rate,
            noise_sigma,
            dephasing: MeasurementDephasing::default(),
        }
    }

    pub fn with_dephasing(mut self, dephasing: MeasurementDephasing) -> Self {
        self.dephasing = dephasing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) {
            return Err(Error::config("kappa", "must be > 0"));
        }
        if !((self.chi / self.kappa).abs() < 0.2) {
            return Err(Error::config("chi", "|chi / kappa| must be below 0.2"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::config("eta", "must lie in (0, 1]"));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::config("sample_rate", "must be > 0"));
        }
        if !(self.noise_sigma >= 0.0) || !(self.omega_wm >= 0.0) || !(self.nbar >= 0.0) {
            return Err(Error::config("noise_sigma", "noise, drive and photon number must be >= 0"));
        }
        match self.dephasing {
            MeasurementDephasing::Calibrated { gamma_d } if !(gamma_d >= 0.0) => {
                Err(Error::config("dephasing.gamma_d", "must be >= 0"))
            }
            MeasurementDephasing::PerPhoton { per_photon } if !(per_photon >= 0.0) => {
                Err(Error::config("dephasing.per_photon", "must be >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Resonator delay `2 / kappa`.
    pub fn delay(&self) -> f64 {
        2.0 / self.kappa
    }

    /// Magnitude of `Re[a]` at `z = +-1` in the adiabatic model.
    pub fn full_scale(&self) -> f64 {
        2.0 * self.omega_wm / self.kappa * (self.chi / self.kappa)
    }
}

/// Measurement-induced dephasing rate, the single value fed to both the
/// simulator and the reconstructor.
pub fn measurement_dephasing(p: &ReadoutParams) -> f64 {
    match p.dephasing {
        MeasurementDephasing::Calibrated { gamma_d } => gamma_d,
        MeasurementDephasing::PerPhoton { per_photon } => per_photon * p.nbar,
    }
}

/// Linear interpolation at fractional index `x`, holding the end values.
fn interp(z: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return z[0];
    }
    let last = z.len() - 1;
    if x >= last as f64 {
        return z[last];
    }
    let k = x.floor() as usize;
    let f = x - k as f64;
    z[k] * (1.0 - f) + z[k + 1] * f
}

/// Field that follows `z` with an exact delay of `2 / kappa`; before the
/// first sample `z` is taken as `z[0]`.
pub fn resonator_response_adiabatic(z: &[f64], p: &ReadoutParams) -> Vec<C64> {
    if z.is_empty() {
        return Vec::new();
    }
    let shift = p.delay() * p.sample_rate;
    let amp = 2.0 * p.omega_wm / p.kappa;
    let ratio = p.chi / p.kappa;
    (0..z.len())
        .map(|k| C64::new(-amp * ratio * interp(z, k as f64 - shift), -amp))
        .collect()
}

/// Fixed point of the field equation for constant `z`.
pub fn steady_state_field(z: f64, p: &ReadoutParams) -> C64 {
    C64::new(0.0, -p.omega_wm) / (C64::new(1.0, p.chi * z / p.kappa) * (0.5 * p.kappa))
}

/// RK4 integration of `da/dt = -(kappa/2)(i chi z / kappa + 1) a - i omega_wm`
/// from the steady state of `z[0]`, with `z` linearly interpolated between
/// samples.
pub fn resonator_response_ode(z: &[f64], p: &ReadoutParams) -> Vec<C64> {
    if z.is_empty() {
        return Vec::new();
    }
    let h = 1.0 / p.sample_rate;
    let drive = C64::new(0.0, -p.omega_wm);
    let f = |a: C64, zt: f64| -> C64 { -(0.5 * p.kappa) * C64::new(1.0, p.chi * zt / p.kappa) * a + drive };
    let mut a = steady_state_field(z[0], p);
    let mut out = Vec::with_capacity(z.len());
    out.push(a);
    for w in z.windows(2) {
        let (z0, z1) = (w[0], w[1]);
        let zm = 0.5 * (z0 + z1);
        let k1 = f(a, z0);
        let k2 = f(a + k1 * (0.5 * h), zm);
        let k3 = f(a + k2 * (0.5 * h), zm);
        let k4 = f(a + k3 * h, z1);
        a += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        out.push(a);
    }
    out
}

/// Voltages that map to `z = +1` and `z = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub v_plus: f64,
    pub v_minus: f64,
}

impl Calibration {
    pub fn rescale(&self, v: f64) -> f64 {
        2.0 * (v - self.v_minus) / (self.v_plus - self.v_minus) - 1.0
    }
}

/// Ensemble-averaged voltage record.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub sample_rate: f64,
    /// Time of `samples[0]`, seconds.
    pub t0: f64,
    pub samples: Vec<f64>,
    pub n_shots_averaged: usize,
    /// Delay already removed from the samples, seconds.
    pub delay_applied: f64,
    pub calibration: Option<Calibration>,
    /// Individual shots, kept only when requested.
    pub shots: Option<Vec<Vec<f64>>>,
}

impl MeasurementRecord {
    pub fn times(&self) -> Vec<f64> {
        (0..self.samples.len())
            .map(|k| self.t0 + k as f64 / self.sample_rate)
            .collect()
    }

    pub fn with_calibration(mut self, calibration: Calibration) -> Self {
        self.calibration = Some(calibration);
        self
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.samples.iter().copied()) / self.samples.len() as f64
    }

    /// CSV with columns `time_s,voltage`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,voltage\n");
        for (t, v) in self.times().iter().zip(&self.samples) {
            out.push_str(&format!("{t:.14e},{v:.14e}\n"));
        }
        out
    }

    /// Sidecar metadata for [`MeasurementRecord::to_csv`].
    pub fn metadata(&self, params: &ReadoutParams, seed: u64) -> serde_json::Value {
        serde_json::json!({
            "sample_rate": self.sample_rate,
            "t0": self.t0,
            "n_shots_averaged": self.n_shots_averaged,
            "delay_applied": self.delay_applied,
            "calibration": self.calibration,
            "params": params,
            "seed": seed,
        })
    }
}

/// Neumaier summation, order-fixed.
pub fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Derives an independent RNG seed for a labelled sub-stream.
pub fn stream_seed(seed: u64, path: &[u64]) -> u64 {
    // splitmix64 chained over the path
    let mut x = seed;
    for &p in path {
        x ^= p.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x = z ^ (z >> 31);
    }
    x
}

/// Per-sample noise std of a record averaged over `n_shots`.
pub fn averaged_noise_sigma(p: &ReadoutParams, n_shots: usize) -> f64 {
    p.noise_sigma / (p.eta * n_shots.max(1) as f64).sqrt()
}

/// Averaged record of `Re[a]` plus white Gaussian noise of std
/// `noise_sigma / sqrt(eta * n_shots)`, drawn directly at the averaged level.
pub fn synthesize_shots(a: &[C64], p: &ReadoutParams, n_shots: usize, seed: u64) -> MeasurementRecord {
    let sigma = averaged_noise_sigma(p, n_shots);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        a.iter().map(|x| x.re + normal.sample(&mut rng)).collect()
    } else {
        a.iter().map(|x| x.re).collect()
    };
    MeasurementRecord {
        sample_rate: p.sample_rate,
        t0: 0.0,
        samples,
        n_shots_averaged: n_shots.max(1),
        delay_applied: 0.0,
        calibration: None,
        shots: None,
    }
}

/// Shot-by-shot synthesis with one RNG stream per shot; the first `retain`
/// shots are kept on the record. Slower than [`synthesize_shots`] but exposes
/// individual records.
pub fn synthesize_shots_retained(
    a: &[C64],
    p: &ReadoutParams,
    n_shots: usize,
    seed: u64,
    retain: usize,
) -> MeasurementRecord {
    let n_shots = n_shots.max(1);
    let sigma = p.noise_sigma / p.eta.sqrt();
    let normal = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    let mut kept = Vec::new();
    let mut sums = vec![(0.0f64, 0.0f64); a.len()];
    for shot in 0..n_shots {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &[shot as u64]));
        let record: Vec<f64> = a
            .iter()
            .map(|x| if sigma > 0.0 { x.re + normal.sample(&mut rng) } else { x.re })
            .collect();
        for ((sum, c), v) in sums.iter_mut().zip(&record) {
            let t = *sum + v;
            if sum.abs() >= v.abs() {
                *c += (*sum - t) + v;
            } else {
                *c += (v - t) + *sum;
            }
            *sum = t;
        }
        if shot < retain.min(1000) {
            kept.push(record);
        }
    }
    MeasurementRecord {
        sample_rate: p.sample_rate,
        t0: 0.0,
        samples: sums.iter().map(|(s, c)| (s + c) / n_shots as f64).collect(),
        n_shots_averaged: n_shots,
        delay_applied: 0.0,
        calibration: None,
        shots: (retain > 0).then_some(kept),
    }
}

/// Steady records with the qubit held at `z = +1` and `z = -1`.
pub fn calibration_traces(
    p: &ReadoutParams,
    duration: f64,
    n_shots: usize,
    seed: u64,
) -> (MeasurementRecord, MeasurementRecord) {
    let n = ((duration * p.sample_rate).round() as usize).max(1);
    let plus = resonator_response_adiabatic(&vec![1.0; n], p);
    let minus = resonator_response_adiabatic(&vec![-1.0; n], p);
    (
        synthesize_shots(&plus, p, n_shots, stream_seed(seed, &[1])),
        synthesize_shots(&minus, p, n_shots, stream_seed(seed, &[2])),
    )
}

/// Calibration from the means of the two steady traces.
pub fn calibrate(plus: &MeasurementRecord, minus: &MeasurementRecord) -> Calibration {
    Calibration {
        v_plus: plus.mean(),
        v_minus: minus.mean(),
    }
}
