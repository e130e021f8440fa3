//! Time-dependent Pauli Hamiltonians and their open-system evolution.
//!
//! Amplitudes are angular frequencies (rad/s) held constant across each `dt`
//! bin. The operator at step `n` is `H_n = norm * sum_P Omega_P(t_n) P`, with
//! `norm = 1 / 2^Q` unless overridden.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{
    density_from_bloch, expectations, matrix_exp, trace, CMatrix, PauliBasis, PauliLabel, C64, I, ONE,
    ZERO,
};

/// Real amplitude series over non-identity Pauli labels on a uniform grid.
///
/// Labels that were never set read as zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    qubits: usize,
    dt: f64,
    len: usize,
    normalization: f64,
    amplitudes: BTreeMap<PauliLabel, Vec<f64>>,
}

impl PauliHamiltonian {
    pub fn zeros(qubits: usize, dt: f64, len: usize) -> Self {
        assert!(qubits >= 1 && dt > 0.0);
        Self {
            qubits,
            dt,
            len,
            normalization: 1.0 / (1u64 << qubits) as f64,
            amplitudes: BTreeMap::new(),
        }
    }

    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn set(&mut self, label: PauliLabel, series: Vec<f64>) -> Result<()> {
        if label.qubits() != self.qubits {
            return Err(Error::DimensionMismatch(format!(
                "label {label} on a {}-qubit Hamiltonian",
                self.qubits
            )));
        }
        if label.is_identity() {
            return Err(Error::InvalidLabel(label.to_string()));
        }
        if series.len() != self.len {
            return Err(Error::GridMismatch(format!(
                "series for {label} has {} samples, expected {}",
                series.len(),
                self.len
            )));
        }
        self.amplitudes.insert(label, series);
        Ok(())
    }

    /// Convenience for string labels; panics on malformed input.
    pub fn with(mut self, label: &str, series: Vec<f64>) -> Self {
        let label: PauliLabel = label.parse().expect("valid Pauli label");
        self.set(label, series).expect("consistent series");
        self
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn labels(&self) -> impl Iterator<Item = &PauliLabel> {
        self.amplitudes.keys()
    }

    pub fn series(&self, label: &PauliLabel) -> Option<&[f64]> {
        self.amplitudes.get(label).map(Vec::as_slice)
    }

    /// Series for `label`, zeros if unset.
    pub fn series_or_zero(&self, label: &PauliLabel) -> Vec<f64> {
        self.series(label).map_or_else(|| vec![0.0; self.len], <[f64]>::to_vec)
    }

    pub fn amplitude(&self, label: &PauliLabel, step: usize) -> f64 {
        self.amplitudes.get(label).map_or(0.0, |s| s[step])
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|n| n as f64 * self.dt).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliLabel, &[f64])> {
        self.amplitudes.iter().map(|(l, s)| (l, s.as_slice()))
    }

    /// Operator `norm * sum_P Omega_P(t_n) P` at step `n`.
    pub fn matrix_at(&self, step: usize) -> CMatrix {
        let basis = PauliBasis::get(self.qubits);
        let d = basis.dim();
        let mut h = CMatrix::zeros(d, d);
        for (label, series) in &self.amplitudes {
            let w = series[step] * self.normalization;
            if w != 0.0 {
                h += basis.operator(label) * C64::new(w, 0.0);
            }
        }
        h
    }

    /// Sum of two Hamiltonians on the same grid and convention.
    pub fn plus(&self, other: &PauliHamiltonian) -> Result<PauliHamiltonian> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        for (label, series) in &other.amplitudes {
            let entry = out
                .amplitudes
                .entry(label.clone())
                .or_insert_with(|| vec![0.0; self.len]);
            for (a, b) in entry.iter_mut().zip(series) {
                *a += b;
            }
        }
        Ok(out)
    }

    /// `time_s` followed by one column per label, in label order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s");
        for label in self.amplitudes.keys() {
            out.push_str(&format!(",{label}"));
        }
        out.push('\n');
        for n in 0..self.len {
            out.push_str(&format!("{:.14e}", n as f64 * self.dt));
            for series in self.amplitudes.values() {
                out.push_str(&format!(",{:.14e}", series[n]));
            }
            out.push('\n');
        }
        out
    }

    pub fn check_same_grid(&self, other: &PauliHamiltonian) -> Result<()> {
        if self.qubits != other.qubits
            || self.len != other.len
            || (self.dt - other.dt).abs() > 1e-15 * self.dt
            || self.normalization != other.normalization
        {
            return Err(Error::GridMismatch(format!(
                "({} qubits, {} x {:e} s, norm {}) vs ({} qubits, {} x {:e} s, norm {})",
                self.qubits,
                self.len,
                self.dt,
                self.normalization,
                other.qubits,
                other.len,
                other.dt,
                other.normalization
            )));
        }
        Ok(())
    }
}

/// Per-qubit dissipation rates in 1/s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationRates {
    #[serde(default)]
    pub gamma_down: f64,
    #[serde(default)]
    pub gamma_up: f64,
    #[serde(default)]
    pub gamma_phi: f64,
    #[serde(default)]
    pub gamma_d: f64,
}

impl DissipationRates {
    pub fn gamma1(&self) -> f64 {
        self.gamma_down + self.gamma_up
    }

    pub fn gamma_delta(&self) -> f64 {
        self.gamma_down - self.gamma_up
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma_d + self.gamma_phi + 0.5 * self.gamma1()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gamma_down", self.gamma_down),
            ("gamma_up", self.gamma_up),
            ("gamma_phi", self.gamma_phi),
            ("gamma_d", self.gamma_d),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("rate must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Jump operators for per-qubit dephasing and amplitude damping, with the
/// rates folded in.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    qubits: usize,
    jumps: Vec<(CMatrix, CMatrix)>,
}

impl Lindbladian {
    pub fn new(qubits: usize, rates: &[DissipationRates]) -> Result<Self> {
        if rates.len() != qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} rate sets for {} qubits",
                rates.len(),
                qubits
            )));
        }
        let lower = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let raise = lower.adjoint();
        let z = crate::pauli::Pauli::Z.matrix();
        let mut jumps = Vec::new();
        for (q, r) in rates.iter().enumerate() {
            r.validate()?;
            for (op, rate) in [
                (&z, 0.5 * (r.gamma_d + r.gamma_phi)),
                (&lower, r.gamma_down),
                (&raise, r.gamma_up),
            ] {
                if rate > 0.0 {
                    let l = embed(op, q, qubits) * C64::new(rate.sqrt(), 0.0);
                    let ldl = l.adjoint() * &l;
                    jumps.push((l, ldl));
                }
            }
        }
        Ok(Self { qubits, jumps })
    }

    pub fn unitary(qubits: usize) -> Self {
        Self {
            qubits,
            jumps: Vec::new(),
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Dissipative part only.
    pub fn dissipate(&self, rho: &CMatrix) -> CMatrix {
        let d = rho.nrows();
        let mut out = CMatrix::zeros(d, d);
        for (l, ldl) in &self.jumps {
            out += l * rho * l.adjoint() - (ldl * rho + rho * ldl) * C64::new(0.5, 0.0);
        }
        out
    }

    /// `d rho / dt = -i[H, rho] + sum_k D[L_k] rho`.
    pub fn rhs(&self, h: &CMatrix, rho: &CMatrix) -> CMatrix {
        let hr = h * rho;
        let comm = &hr - hr.adjoint();
        self.dissipate(rho) - comm * I
    }

    /// One RK4 advance of `dt` split into `substeps` pieces, `h` held fixed.
    pub fn step(&self, h: &CMatrix, rho: &CMatrix, dt: f64, substeps: usize) -> CMatrix {
        let hs = dt / substeps as f64;
        let half = C64::new(0.5 * hs, 0.0);
        let full = C64::new(hs, 0.0);
        let sixth = C64::new(hs / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        let mut rho = rho.clone();
        for _ in 0..substeps {
            let k1 = self.rhs(h, &rho);
            let k2 = self.rhs(h, &(&rho + &k1 * half));
            let k3 = self.rhs(h, &(&rho + &k2 * half));
            let k4 = self.rhs(h, &(&rho + &k3 * full));
            rho += (k1 + (k2 + k3) * two + k4) * sixth;
            // keep exact Hermiticity; RK4 preserves it only to rounding
            rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        }
        rho
    }
}

/// Single-qubit operator placed on `qubit` of a `qubits`-qubit register.
pub fn embed(op: &CMatrix, qubit: usize, qubits: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..qubits {
        out = if q == qubit {
            out.kronecker(op)
        } else {
            out.kronecker(&CMatrix::identity(2, 2))
        };
    }
    out
}

/// Pauli expectation values sampled on the Hamiltonian grid, `N + 1` rows.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochTrajectory {
    qubits: usize,
    dt: f64,
    rows: Vec<Vec<f64>>,
}

impl BlochTrajectory {
    pub fn new(qubits: usize, dt: f64, rows: Vec<Vec<f64>>) -> Self {
        Self { qubits, dt, rows }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of sampled instants (`N + 1`).
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn at(&self, step: usize) -> &[f64] {
        &self.rows[step]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn component(&self, label: &PauliLabel) -> Vec<f64> {
        let k = label.index() - 1;
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// `<Z_q>` series, `qubit` 0-based.
    pub fn z(&self, qubit: usize) -> Vec<f64> {
        self.component(&PauliLabel::single(self.qubits, qubit, crate::pauli::Pauli::Z))
    }
}

pub const DEFAULT_SUBSTEPS: usize = 4;

/// Integrates the master equation across the whole Hamiltonian grid.
pub fn lindblad_evolve(
    rho0: &CMatrix,
    hamiltonian: &PauliHamiltonian,
    rates: &[DissipationRates],
) -> Result<(BlochTrajectory, CMatrix)> {
    lindblad_evolve_with(rho0, hamiltonian, rates, DEFAULT_SUBSTEPS)
}

pub fn lindblad_evolve_with(
    rho0: &CMatrix,
    hamiltonian: &PauliHamiltonian,
    rates: &[DissipationRates],
    substeps: usize,
) -> Result<(BlochTrajectory, CMatrix)> {
    let q = hamiltonian.qubits();
    let d = 1usize << q;
    if rho0.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {:?}, Hamiltonian acts on {d}x{d}",
            rho0.shape()
        )));
    }
    let tr0 = trace(rho0).re;
    if (tr0 - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitTrace { trace: tr0 });
    }
    let lindblad = Lindbladian::new(q, rates)?;
    let mut rho = rho0.clone();
    let mut rows = Vec::with_capacity(hamiltonian.len() + 1);
    rows.push(expectations(&rho, q));
    for n in 0..hamiltonian.len() {
        rho = lindblad.step(&hamiltonian.matrix_at(n), &rho, hamiltonian.dt(), substeps.max(1));
        let drift = (trace(&rho).re - 1.0).abs();
        if drift > 1e-6 || !drift.is_finite() {
            return Err(Error::IntegrationFailure { step: n, drift });
        }
        rows.push(expectations(&rho, q));
    }
    Ok((BlochTrajectory::new(q, hamiltonian.dt(), rows), rho))
}

/// `exp(-i H_n dt)` for one grid step.
pub fn step_unitary(hamiltonian: &PauliHamiltonian, step: usize) -> CMatrix {
    matrix_exp(&(hamiltonian.matrix_at(step) * C64::new(0.0, -hamiltonian.dt())))
}

/// Time-ordered product of per-step propagators for steps `0..up_to_step`.
pub fn propagate_unitary(hamiltonian: &PauliHamiltonian, up_to_step: usize) -> CMatrix {
    let d = 1usize << hamiltonian.qubits();
    (0..up_to_step.min(hamiltonian.len())).fold(CMatrix::identity(d, d), |u, n| {
        step_unitary(hamiltonian, n) * u
    })
}

/// Cumulative propagators `U(t_0), ..., U(t_N)`.
pub fn unitary_series(hamiltonian: &PauliHamiltonian) -> Vec<CMatrix> {
    let d = 1usize << hamiltonian.qubits();
    let mut out = Vec::with_capacity(hamiltonian.len() + 1);
    out.push(CMatrix::identity(d, d));
    for n in 0..hamiltonian.len() {
        let next = step_unitary(hamiltonian, n) * out.last().expect("non-empty");
        out.push(next);
    }
    out
}

/// First-order Euler prediction of every Pauli expectation one step ahead.
pub fn heisenberg_step_predict(
    bloch: &[f64],
    hamiltonian: &PauliHamiltonian,
    step: usize,
    rates: &[DissipationRates],
) -> Result<Vec<f64>> {
    let q = hamiltonian.qubits();
    let lindblad = Lindbladian::new(q, rates)?;
    let rho = density_from_bloch(bloch, q);
    let deriv = expectations(&lindblad.rhs(&hamiltonian.matrix_at(step), &rho), q);
    Ok(bloch
        .iter()
        .zip(deriv)
        .map(|(b, db)| b + hamiltonian.dt() * db)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{cardinal_state, hermitian_eigen, is_unitary, pauli_operator, Pauli};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const MHZ: f64 = 2.0 * PI * 1e6;

    fn constant(qubits: usize, dt: f64, len: usize, label: &str, value: f64) -> PauliHamiltonian {
        PauliHamiltonian::zeros(qubits, dt, len).with(label, vec![value; len])
    }

    #[test]
    fn ground_state_is_stationary() {
        let h = PauliHamiltonian::zeros(1, 2e-9, 50);
        let (traj, _) = lindblad_evolve(&cardinal_state("+Z").unwrap(), &h, &[DissipationRates::default()]).unwrap();
        assert!(traj.z(0).iter().all(|&z| (z - 1.0).abs() < 1e-15));
    }

    #[test]
    fn dephasing_decays_coherence_at_gamma_d() {
        let gamma_d = 2e5;
        let steps = 2500;
        let dt = 1.0 / gamma_d / steps as f64;
        let h = PauliHamiltonian::zeros(1, dt, steps);
        let rates = [DissipationRates {
            gamma_d,
            ..Default::default()
        }];
        let (traj, _) = lindblad_evolve(&cardinal_state("+X").unwrap(), &h, &rates).unwrap();
        let x = traj.component(&"X".parse().unwrap());
        assert_abs_diff_eq!(x[steps], (-1.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn constant_x_drive_makes_pi_rotation() {
        let h = constant(1, 2e-9, 125, "X", 2.0 * MHZ);
        let (traj, _) = lindblad_evolve(&cardinal_state("+Z").unwrap(), &h, &[DissipationRates::default()]).unwrap();
        assert_abs_diff_eq!(*traj.z(0).last().unwrap(), -1.0, epsilon = 1e-9);
    }

    #[test]
    fn relaxation_drives_z_toward_equilibrium() {
        let rates = [DissipationRates {
            gamma_down: 1e6,
            gamma_up: 2e5,
            ..Default::default()
        }];
        let h = PauliHamiltonian::zeros(1, 10e-9, 400);
        let (traj, _) = lindblad_evolve(&cardinal_state("-Z").unwrap(), &h, &rates).unwrap();
        let r = rates[0];
        let z_inf = r.gamma_delta() / r.gamma1();
        for (n, z) in traj.z(0).iter().enumerate() {
            let t = n as f64 * 10e-9;
            let exact = z_inf + (-1.0 - z_inf) * (-r.gamma1() * t).exp();
            assert_abs_diff_eq!(*z, exact, epsilon = 1e-10);
        }
    }

    #[test]
    fn rate_accessors() {
        let r = DissipationRates {
            gamma_down: 3.0,
            gamma_up: 1.0,
            gamma_phi: 5.0,
            gamma_d: 7.0,
        };
        assert_eq!(r.gamma1(), 4.0);
        assert_eq!(r.gamma_delta(), 2.0);
        assert_eq!(r.gamma2(), 14.0);
        assert!(DissipationRates { gamma_d: -1.0, ..r }.validate().is_err());
    }

    #[test]
    fn zero_hamiltonian_propagates_to_identity() {
        let h = PauliHamiltonian::zeros(2, 4e-9, 10);
        let u = propagate_unitary(&h, 10);
        assert_abs_diff_eq!((u - CMatrix::identity(4, 4)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pi_area_x_gives_minus_i_x() {
        let h = constant(1, 2e-9, 125, "X", 2.0 * MHZ);
        let u = propagate_unitary(&h, 125);
        let expected = Pauli::X.matrix() * -I;
        assert!((u - expected).norm() < 1e-10);
    }

    #[test]
    fn piecewise_propagator_matches_fine_grid() {
        // X for the first half, Y for the second
        let coarse_dt = 4e-9;
        let n = 40;
        let ox = 3.0 * MHZ;
        let oy = -1.7 * MHZ;
        let mut coarse = PauliHamiltonian::zeros(1, coarse_dt, n);
        coarse.set("X".parse().unwrap(), (0..n).map(|k| if k < n / 2 { ox } else { 0.0 }).collect()).unwrap();
        coarse.set("Y".parse().unwrap(), (0..n).map(|k| if k < n / 2 { 0.0 } else { oy }).collect()).unwrap();
        let fine_n = n * 10;
        let mut fine = PauliHamiltonian::zeros(1, coarse_dt / 10.0, fine_n);
        fine.set("X".parse().unwrap(), (0..fine_n).map(|k| if k < fine_n / 2 { ox } else { 0.0 }).collect()).unwrap();
        fine.set("Y".parse().unwrap(), (0..fine_n).map(|k| if k < fine_n / 2 { 0.0 } else { oy }).collect()).unwrap();
        let uc = propagate_unitary(&coarse, n);
        let uf = propagate_unitary(&fine, fine_n);
        assert!((&uc - &uf).norm() < 1e-8);
        // closed form: two segment exponentials in time order
        let t = n as f64 / 2.0 * coarse_dt;
        let seg = |p: Pauli, w: f64| matrix_exp(&(p.matrix() * C64::new(0.0, -0.5 * w * t)));
        let closed = seg(Pauli::Y, oy) * seg(Pauli::X, ox);
        assert!((uc - closed).norm() < 1e-10);
    }

    #[test]
    fn euler_prediction_examples() {
        let dt = 2e-9;
        let none = [DissipationRates::default()];
        let h0 = PauliHamiltonian::zeros(1, dt, 1);
        assert_eq!(heisenberg_step_predict(&[0.0, 0.0, 1.0], &h0, 0, &none).unwrap()[2], 1.0);

        let w = 2.0 * MHZ;
        let hx = constant(1, dt, 1, "X", w);
        let z = heisenberg_step_predict(&[0.0, 1.0, 0.0], &hx, 0, &none).unwrap()[2];
        assert_abs_diff_eq!(z, w * dt, epsilon = 1e-15);

        let decay = [DissipationRates {
            gamma_down: 1e5,
            ..Default::default()
        }];
        let z = heisenberg_step_predict(&[0.0, 0.0, 1.0], &h0, 0, &decay).unwrap()[2];
        assert_abs_diff_eq!(z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn euler_error_is_second_order() {
        let rates = [DissipationRates {
            gamma_down: 1.6e4,
            gamma_phi: 8e3,
            gamma_d: 2e5,
            ..Default::default()
        }];
        let rho = cardinal_state("+X").unwrap();
        let b0 = expectations(&rho, 1);
        let err = |dt: f64| {
            let h = PauliHamiltonian::zeros(1, dt, 1)
                .with("X", vec![4.0 * MHZ])
                .with("Y", vec![-3.0 * MHZ])
                .with("Z", vec![2.0 * MHZ]);
            let euler = heisenberg_step_predict(&b0, &h, 0, &rates).unwrap();
            let (traj, _) = lindblad_evolve_with(&rho, &h, &rates, 16).unwrap();
            euler
                .iter()
                .zip(traj.at(1))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(4e-9) / err(2e-9);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn two_qubit_operator_uses_quarter_normalization() {
        let h = constant(2, 1e-9, 1, "XX", 4.0);
        let m = h.matrix_at(0);
        assert!((m - pauli_operator(&"XX".parse().unwrap())).norm() < 1e-15);
    }

    #[test]
    fn set_rejects_bad_series() {
        let mut h = PauliHamiltonian::zeros(1, 1e-9, 3);
        assert!(matches!(h.set("X".parse().unwrap(), vec![0.0; 2]), Err(Error::GridMismatch(_))));
        assert!(matches!(h.set("XX".parse().unwrap(), vec![0.0; 3]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(h.set("I".parse().unwrap(), vec![0.0; 3]), Err(Error::InvalidLabel(_))));
    }

    fn random_hamiltonian(coeffs: &[f64], qubits: usize, dt: f64, len: usize, scale: f64) -> PauliHamiltonian {
        let mut h = PauliHamiltonian::zeros(qubits, dt, len);
        for (k, label) in PauliLabel::all(qubits).into_iter().enumerate() {
            let c = coeffs[k % coeffs.len()];
            let series = (0..len).map(|n| scale * c * (1.0 + 0.3 * (n as f64 * 0.37 + k as f64).sin())).collect();
            h.set(label, series).unwrap();
        }
        h
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn trace_preserved_and_positive(coeffs in proptest::collection::vec(-1.0f64..1.0, 15), q in 1usize..=2) {
            let h = random_hamiltonian(&coeffs, q, 2e-9, 60, 20.0 * MHZ);
            let rates = vec![DissipationRates { gamma_down: 2e4, gamma_up: 1e3, gamma_phi: 8e3, gamma_d: 2e5 }; q];
            let label = if q == 1 { "+X" } else { "+X-Y" };
            let rho0 = cardinal_state(label).unwrap();
            let lindblad = Lindbladian::new(q, &rates).unwrap();
            let mut rho = rho0;
            for n in 0..h.len() {
                rho = lindblad.step(&h.matrix_at(n), &rho, h.dt(), 4);
                prop_assert!((trace(&rho).re - 1.0).abs() < 1e-9);
                let (vals, _) = hermitian_eigen(&rho);
                prop_assert!(vals.iter().cloned().fold(f64::INFINITY, f64::min) >= -1e-7);
            }
        }

        #[test]
        fn purity_never_increases_without_drive(gphi in 1e3f64..1e6, gd in 0.0f64..1e6, label in "[+-][XYZ]") {
            // unital channels only: relaxation toward |0> can re-purify
            let rates = [DissipationRates { gamma_phi: gphi, gamma_d: gd, ..Default::default() }];
            let h = PauliHamiltonian::zeros(1, 20e-9, 50);
            let (traj, _) = lindblad_evolve(&cardinal_state(&label).unwrap(), &h, &rates).unwrap();
            let purity: Vec<f64> = traj.rows().iter().map(|b| 0.5 * (1.0 + b.iter().map(|x| x * x).sum::<f64>())).collect();
            for w in purity.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
        }

        #[test]
        fn unitary_limit_keeps_bloch_norm(coeffs in proptest::collection::vec(-1.0f64..1.0, 3)) {
            let h = random_hamiltonian(&coeffs, 1, 2e-9, 100, 6.0 * MHZ);
            let (traj, _) = lindblad_evolve(&cardinal_state("+Y").unwrap(), &h, &[DissipationRates::default()]).unwrap();
            for b in traj.rows() {
                let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((norm - 1.0).abs() < 1e-8);
            }
            prop_assert!(is_unitary(&propagate_unitary(&h, 100), 1e-9));
        }

        #[test]
        fn euler_matches_rk4_to_second_order(coeffs in proptest::collection::vec(-1.0f64..1.0, 3), label in "[+-][XYZ]") {
            let h = random_hamiltonian(&coeffs, 1, 2e-9, 1, 5.0 * MHZ);
            let rates = [DissipationRates { gamma_down: 1.6e4, gamma_phi: 8e3, gamma_d: 2e5, ..Default::default() }];
            let rho = cardinal_state(&label).unwrap();
            let euler = heisenberg_step_predict(&expectations(&rho, 1), &h, 0, &rates).unwrap();
            let (traj, _) = lindblad_evolve(&rho, &h, &rates).unwrap();
            // |H| dt <= 0.11 rad, so the O(dt^2) remainder stays below ~6e-3
            for (a, b) in euler.iter().zip(traj.at(1)) {
                prop_assert!((a - b).abs() < 6e-3);
            }
        }
    }
}
