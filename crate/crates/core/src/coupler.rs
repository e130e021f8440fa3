//! Flux-tunable coupler: tuning curve, dispersive exchange coupling, and the
//! two-qubit exchange Hamiltonian produced by parametric flux modulation.
//!
//! Flux is in units of the flux quantum. Frequencies and couplings are rad/s.
//! The coupler sits above both qubits, so every `Delta_i = omega_q_i -
//! omega_c` is negative. Emitted Hamiltonians live in the frame that rotates
//! with both AC-shifted qubits and keep only the resonant exchange terms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::PauliHamiltonian;
use crate::error::{Error, Result};
use crate::pauli::{CMatrix, C64, ONE, ZERO};

/// Largest `|g_ic / Delta_i|` for which the dispersive expansion is trusted.
pub const MAX_DISPERSIVE_RATIO: f64 = 0.2;
/// Largest modulation amplitude, in flux quanta.
pub const MAX_MODULATION: f64 = 0.2;
/// Base step of the Richardson-extrapolated second difference.
pub const CURVATURE_STEP: f64 = 1e-4;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerParams {
    pub omega_c0: f64,
    pub asymmetry: f64,
    pub g1c: f64,
    pub g2c: f64,
    pub g12: f64,
    pub omega_q1: f64,
    pub omega_q2: f64,
    /// Static ZZ rate, taken as measured rather than derived.
    pub zeta_measured: f64,
}

impl Default for CouplerParams {
    /// Qubit frequencies and ZZ rate from the reference device. The coupler
    /// frequency, asymmetry and couplings are not reported there; these values
    /// give a 163 ns full swap at a modulation amplitude of about 0.17.
    fn default() -> Self {
        Self {
            omega_c0: TWO_PI * 6.5e9,
            asymmetry: 0.2,
            g1c: TWO_PI * 120e6,
            g2c: TWO_PI * 170e6,
            g12: TWO_PI * 18e6,
            omega_q1: TWO_PI * 5.319e9,
            omega_q2: TWO_PI * 5.271e9,
            zeta_measured: TWO_PI * 28.1e3,
        }
    }
}

impl CouplerParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("omega_c0", self.omega_c0),
            ("omega_q1", self.omega_q1),
            ("omega_q2", self.omega_q2),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("coupler.{name}"), "must be positive"));
            }
        }
        if !(0.0..1.0).contains(&self.asymmetry) {
            return Err(Error::config("coupler.asymmetry", "must lie in [0, 1)"));
        }
        if self.omega_c0 <= self.omega_q1.max(self.omega_q2) {
            return Err(Error::config(
                "coupler.omega_c0",
                "the coupler must sit above both qubits",
            ));
        }
        for (name, v) in [("g1c", self.g1c), ("g2c", self.g2c), ("g12", self.g12), ("zeta_measured", self.zeta_measured)] {
            if !v.is_finite() {
                return Err(Error::config(format!("coupler.{name}"), "must be finite"));
            }
        }
        Ok(())
    }

    fn qubit(&self, i: usize) -> (f64, f64) {
        match i {
            0 => (self.omega_q1, self.g1c),
            _ => (self.omega_q2, self.g2c),
        }
    }
}

/// `omega_c0 * (cos^2(pi phi) + d^2 sin^2(pi phi))^(1/4)`.
pub fn coupler_frequency(phi_ext: f64, p: &CouplerParams) -> f64 {
    let (s, c) = (PI * phi_ext).sin_cos();
    p.omega_c0 * (c * c + p.asymmetry * p.asymmetry * s * s).powf(0.25)
}

/// Fails when either qubit is too close to the coupler for the dispersive
/// expansion.
pub fn check_regime(phi_ext: f64, p: &CouplerParams) -> Result<()> {
    let wc = coupler_frequency(phi_ext, p);
    for i in 0..2 {
        let (wq, g) = p.qubit(i);
        let ratio = (g / (wq - wc)).abs();
        if !(ratio < MAX_DISPERSIVE_RATIO) {
            return Err(Error::OutOfRegime(format!(
                "|g{}c / Delta_{}| = {ratio:.3} at flux {phi_ext} (limit {MAX_DISPERSIVE_RATIO})",
                i + 1,
                i + 1
            )));
        }
    }
    Ok(())
}

fn coupler_mediated(phi_ext: f64, p: &CouplerParams) -> f64 {
    let wc = coupler_frequency(phi_ext, p);
    let inv_delta = 1.0 / (p.omega_q1 - wc) + 1.0 / (p.omega_q2 - wc);
    let inv_sigma = 1.0 / (p.omega_q1 + wc) + 1.0 / (p.omega_q2 + wc);
    0.5 * p.g1c * p.g2c * (inv_delta - inv_sigma)
}

/// Flux-dependent part of the qubit frequency, kept apart from `omega_q` so
/// its differences do not cancel against a large constant.
fn lamb_shift(phi_ext: f64, p: &CouplerParams, i: usize) -> f64 {
    let wc = coupler_frequency(phi_ext, p);
    let (wq, g) = p.qubit(i);
    g * g * (1.0 / (wq - wc) - 1.0 / (wq + wc))
}

/// Total qubit-qubit coupling `J + g12`, with the counter-rotating `1/Sigma`
/// corrections in `J`.
pub fn exchange_coupling(phi_ext: f64, p: &CouplerParams) -> Result<f64> {
    check_regime(phi_ext, p)?;
    Ok(coupler_mediated(phi_ext, p) + p.g12)
}

/// Lamb-shifted qubit frequencies `(omega~_q1, omega~_q2)`.
pub fn lamb_shifted_freqs(phi_ext: f64, p: &CouplerParams) -> Result<(f64, f64)> {
    check_regime(phi_ext, p)?;
    Ok((p.omega_q1 + lamb_shift(phi_ext, p, 0), p.omega_q2 + lamb_shift(phi_ext, p, 1)))
}

/// Second derivative at zero flux: central differences at `h` and `h/2`,
/// Richardson-combined to cancel the `h^2` error term.
fn curvature(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let f0 = f(0.0);
    let d = |h: f64| (f(h) - 2.0 * f0 + f(-h)) / (h * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// `d^2 J / d phi^2` at zero flux.
pub fn coupling_curvature(p: &CouplerParams) -> Result<f64> {
    check_regime(0.0, p)?;
    Ok(curvature(|x| coupler_mediated(x, p), CURVATURE_STEP))
}

/// `d^2 omega~_qi / d phi^2` at zero flux, for both qubits.
pub fn frequency_curvatures(p: &CouplerParams) -> Result<(f64, f64)> {
    check_regime(0.0, p)?;
    Ok((
        curvature(|x| lamb_shift(x, p, 0), CURVATURE_STEP),
        curvature(|x| lamb_shift(x, p, 1), CURVATURE_STEP),
    ))
}

/// Pauli amplitude of the exchange term at modulation amplitude `epsilon`:
/// `Omega_XX = Omega_YY = epsilon^2 J'' / 4`.
///
/// Starting from `|10>` the `|01>` population is `sin^2(Omega t / 2)`, so a
/// full swap takes `pi / |Omega|`.
pub fn exchange_rate(epsilon: f64, p: &CouplerParams) -> Result<f64> {
    Ok(0.25 * epsilon * epsilon * coupling_curvature(p)?)
}

/// Flux modulation `phi(t) = epsilon(t) cos(omega_phi t + phase)` about zero
/// bias, sampled once per grid bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationPulse {
    /// Envelope in flux quanta, one value per bin.
    pub epsilon: Vec<f64>,
    pub dt: f64,
    pub omega_phi: f64,
    pub phase: f64,
}

impl ModulationPulse {
    pub fn duration(&self) -> f64 {
        self.epsilon.len() as f64 * self.dt
    }

    pub fn peak(&self) -> f64 {
        self.epsilon.iter().fold(0.0f64, |m, e| m.max(e.abs()))
    }

    /// Phase of the exchange term, `beta' = 2 * phase`.
    pub fn exchange_phase(&self) -> f64 {
        2.0 * self.phase
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("pulse.dt", "must be positive"));
        }
        if self.epsilon.iter().any(|e| !e.is_finite()) {
            return Err(Error::config("pulse.epsilon", "must be finite"));
        }
        if self.peak() > MAX_MODULATION {
            return Err(Error::OutOfRegime(format!(
                "modulation amplitude {} exceeds {MAX_MODULATION} flux quanta",
                self.peak()
            )));
        }
        Ok(())
    }

    /// Pulse realizing `XY(beta, theta)` with the given envelope shape, at the
    /// resonant modulation frequency.
    ///
    /// The shape is scaled so its peak becomes the required amplitude. The
    /// exchange phase is `pi - beta` or `-beta`, whichever makes the pulse
    /// area come out with the sign of `theta` given the sign of `J''`.
    pub fn for_gate(beta: f64, theta: f64, shape: &[f64], dt: f64, p: &CouplerParams) -> Result<Self> {
        let peak = shape.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if peak == 0.0 {
            return Err(Error::config("pulse.shape", "envelope is identically zero"));
        }
        let k = 0.25 * coupling_curvature(p)?;
        let area: f64 = shape.iter().map(|s| (s / peak).powi(2)).sum::<f64>() * dt;
        let eps = (theta.abs() / (k.abs() * area)).sqrt();
        let exchange_phase = if theta * k >= 0.0 { PI - beta } else { -beta };
        let mut pulse = Self {
            epsilon: shape.iter().map(|s| eps * s / peak).collect(),
            dt,
            omega_phi: 0.0,
            phase: 0.5 * exchange_phase,
        };
        pulse.omega_phi = resonant_modulation_frequency(pulse.peak(), p)?;
        pulse.validate()?;
        Ok(pulse)
    }
}

/// `Delta_12 / 2` including the AC shifts at modulation amplitude `epsilon`.
pub fn resonant_modulation_frequency(epsilon: f64, p: &CouplerParams) -> Result<f64> {
    let (w1, w2) = lamb_shifted_freqs(0.0, p)?;
    let (c1, c2) = frequency_curvatures(p)?;
    let ac = 0.25 * epsilon * epsilon;
    Ok(0.5 * (w1 - w2 + ac * (c1 - c2)))
}

/// Rotating-frame amplitudes produced by `pulse`, on the pulse's own grid.
///
/// `Omega_XX = Omega_YY = A cos(beta')` and `Omega_XY = -Omega_YX = A sin(beta')`
/// with `A = epsilon(t)^2 J'' / 4`. A modulation-frequency error
/// `detuning_error` leaves `Omega_IZ - Omega_ZI = 4 * detuning_error` for the
/// whole pulse, split between the qubits in the ratio of their AC-shift
/// curvatures.
pub fn modulated_two_qubit_hamiltonian(
    pulse: &ModulationPulse,
    p: &CouplerParams,
    detuning_error: f64,
) -> Result<PauliHamiltonian> {
    p.validate()?;
    pulse.validate()?;
    let k = 0.25 * coupling_curvature(p)?;
    let (s, c) = pulse.exchange_phase().sin_cos();
    let amp: Vec<f64> = pulse.epsilon.iter().map(|e| k * e * e).collect();
    let scaled = |f: f64| amp.iter().map(|a| a * f).collect::<Vec<_>>();
    let n = pulse.epsilon.len();
    let mut h = PauliHamiltonian::zeros(2, pulse.dt, n)
        .with("XX", scaled(c))
        .with("YY", scaled(c))
        .with("XY", scaled(s))
        .with("YX", scaled(-s));
    if detuning_error != 0.0 {
        let (iz, zi) = residual_z(detuning_error, p)?;
        h = h.with("IZ", vec![iz; n]).with("ZI", vec![zi; n]);
    }
    Ok(h)
}

/// `(Omega_IZ, Omega_ZI)` left by an off-resonant modulation.
pub fn residual_z(detuning_error: f64, p: &CouplerParams) -> Result<(f64, f64)> {
    let (c1, c2) = frequency_curvatures(p)?;
    let spread = c2 - c1;
    if spread.abs() <= 1e-9 * c1.abs().max(c2.abs()) {
        // identical curvatures: the shifts cancel, only the detuning remains
        return Ok((2.0 * detuning_error, -2.0 * detuning_error));
    }
    let scale = 4.0 * detuning_error / spread;
    Ok((scale * c2, scale * c1))
}

/// Constant static `ZZ` term `Omega_ZZ = zeta` on a grid.
pub fn static_zz(p: &CouplerParams, dt: f64, len: usize) -> PauliHamiltonian {
    PauliHamiltonian::zeros(2, dt, len).with("ZZ", vec![p.zeta_measured; len])
}

/// `XY(beta, theta)` in the `|q1 q2>` basis.
///
/// Generated by `-cos(beta)(XX+YY) + sin(beta)(XY-YX)` with Pauli amplitude
/// integrating to `theta`, so it acts only on the `{|01>, |10>}` block.
pub fn xy_gate(beta: f64, theta: f64) -> CMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    let off = |sign: f64| C64::new(0.0, s) * C64::from_polar(1.0, sign * beta);
    let mut u = CMatrix::from_element(4, 4, ZERO);
    u[(0, 0)] = ONE;
    u[(3, 3)] = ONE;
    u[(1, 1)] = C64::new(c, 0.0);
    u[(2, 2)] = C64::new(c, 0.0);
    u[(1, 2)] = off(-1.0);
    u[(2, 1)] = off(1.0);
    u
}

/// Constant Hamiltonian whose propagator over `len * dt` is `XY(beta, theta)`.
pub fn xy_hamiltonian(beta: f64, theta: f64, dt: f64, len: usize) -> PauliHamiltonian {
    let a = theta / (dt * len as f64);
    let (s, c) = beta.sin_cos();
    PauliHamiltonian::zeros(2, dt, len)
        .with("XX", vec![-a * c; len])
        .with("YY", vec![-a * c; len])
        .with("XY", vec![a * s; len])
        .with("YX", vec![-a * s; len])
}

/// `|01>` population after starting in `|10>`, for constant modulation at
/// amplitude `epsilon`, over a grid of modulation detunings and pulse lengths.
///
/// Rows follow `detunings`, columns follow `durations`.
pub fn chevron(epsilon: f64, detunings: &[f64], durations: &[f64], p: &CouplerParams) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(detunings.len());
    for &delta in detunings {
        let pulse = ModulationPulse {
            epsilon: vec![epsilon],
            dt: 1.0,
            omega_phi: 0.0,
            phase: 0.0,
        };
        let h = modulated_two_qubit_hamiltonian(&pulse, p, delta)?.matrix_at(0);
        let row = durations
            .iter()
            .map(|&t| {
                let u = crate::pauli::matrix_exp(&(&h * C64::new(0.0, -t)));
                u[(1, 2)].norm_sqr()
            })
            .collect();
        out.push(row);
    }
    Ok(out)
}
