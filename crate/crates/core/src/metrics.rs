//! State and process fidelities.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dynamics::{unitary_series, PauliHamiltonian};
use crate::engine::ReconstructionResult;
use crate::error::{Error, Result};
use crate::pauli::{hermitian_eigen, trace, CMatrix, C64};

/// Eigenvalues below this are treated as tomography noise and clamped to 0.
const CLAMP: f64 = -1e-9;
/// Eigenvalues below this mean the input is not a state.
const NEGATIVE: f64 = -1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityKind {
    StateFidelity,
    DynamicalCoherent,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityTrace {
    pub dt: f64,
    pub values: Vec<f64>,
    pub kind: FidelityKind,
}

impl FidelityTrace {
    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Smallest value strictly inside the trace, with its index.
    pub fn interior_minimum(&self) -> Option<(usize, f64)> {
        let n = self.values.len();
        if n < 3 {
            return None;
        }
        self.values[1..n - 1]
            .iter()
            .enumerate()
            .map(|(k, &v)| (k + 1, v))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,fidelity\n");
        for (t, v) in self.times().iter().zip(&self.values) {
            out.push_str(&format!("{t:.14e},{v:.14e}\n"));
        }
        out
    }
}

fn check_state(rho: &CMatrix, what: &str) -> Result<(Vec<f64>, CMatrix)> {
    if !rho.is_square() {
        return Err(Error::InvalidState(format!("{what} is not square")));
    }
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let (vals, vecs) = hermitian_eigen(&h);
    if let Some(&min) = vals.iter().find(|&&v| v < NEGATIVE) {
        return Err(Error::InvalidState(format!("{what} has eigenvalue {min:e}")));
    }
    Ok((vals, vecs))
}

fn sqrt_from_eigen(vals: &[f64], vecs: &CMatrix) -> CMatrix {
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let s = if v < CLAMP { 0.0 } else { v.max(0.0).sqrt() };
        scaled.column_mut(k).scale_mut(s);
    }
    scaled * vecs.adjoint()
}

/// Positive square root of a positive semidefinite matrix.
pub fn sqrtm_psd(rho: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = check_state(rho, "matrix")?;
    Ok(sqrt_from_eigen(&vals, &vecs))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`, clamped to `[0, 1]`.
///
/// The inner trace equals the nuclear norm of `sqrt(a) sqrt(b)`, which avoids
/// taking square roots of round-off sized eigenvalues.
pub fn state_fidelity(rho_rec: &CMatrix, rho_tomo: &CMatrix) -> Result<f64> {
    if rho_rec.shape() != rho_tomo.shape() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {:?} against {:?}",
            rho_rec.shape(),
            rho_tomo.shape()
        )));
    }
    let (va, ea) = check_state(rho_rec, "reconstructed state")?;
    let (vb, eb) = check_state(rho_tomo, "tomography state")?;
    let product = sqrt_from_eigen(&va, &ea) * sqrt_from_eigen(&vb, &eb);
    let root: f64 = product.singular_values().iter().sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// Haar-averaged `|<psi|U|psi>|^2` in closed form: `(d + |Tr U|^2) / (d (d + 1))`.
pub fn haar_average_fidelity(u: &CMatrix) -> f64 {
    let d = u.nrows() as f64;
    (d + trace(u).norm_sqr()) / (d * (d + 1.0))
}

/// Haar-random pure state of dimension `d`.
pub fn haar_random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let mut psi: Vec<C64> = (0..d)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut psi {
        *z /= norm;
    }
    psi
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase fix.
pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // Q diag(r_kk / |r_kk|) is Haar distributed
    for k in 0..d {
        let p = r[(k, k)];
        let phase = if p.norm() > 0.0 { p / p.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Sample mean of `|<psi|U|psi>|^2` over Haar-random pure states.
pub fn haar_average_fidelity_monte_carlo<R: Rng + ?Sized>(u: &CMatrix, samples: usize, rng: &mut R) -> f64 {
    let d = u.nrows();
    let mut acc = 0.0;
    for _ in 0..samples {
        let psi = haar_random_state(d, rng);
        let mut overlap = C64::new(0.0, 0.0);
        for i in 0..d {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..d {
                row += u[(i, j)] * psi[j];
            }
            overlap += psi[i].conj() * row;
        }
        acc += overlap.norm_sqr();
    }
    acc / samples as f64
}

/// Haar-averaged overlap of the propagators of `h_r` and `h_c` at every grid
/// point `t_0..=t_N`.
pub fn dynamical_coherent_fidelity(h_r: &PauliHamiltonian, h_c: &PauliHamiltonian) -> Result<FidelityTrace> {
    h_r.check_same_grid(h_c)?;
    let ur = unitary_series(h_r);
    let uc = unitary_series(h_c);
    let values = ur
        .iter()
        .zip(&uc)
        .map(|(r, c)| haar_average_fidelity(&(c.adjoint() * r)))
        .collect();
    Ok(FidelityTrace {
        dt: h_r.dt(),
        values,
        kind: FidelityKind::DynamicalCoherent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReconstructionFidelity {
    pub per_state: Vec<f64>,
    pub mean: f64,
}

/// State fidelity of each final state against its tomography, and the mean.
pub fn mean_fidelity(final_states: &[CMatrix], tomography: &[CMatrix]) -> Result<ReconstructionFidelity> {
    if final_states.len() != tomography.len() || final_states.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} final states against {} tomography states",
            final_states.len(),
            tomography.len()
        )));
    }
    let per_state = final_states
        .iter()
        .zip(tomography)
        .map(|(a, b)| state_fidelity(a, b))
        .collect::<Result<Vec<_>>>()?;
    let mean = per_state.iter().sum::<f64>() / per_state.len() as f64;
    Ok(ReconstructionFidelity { per_state, mean })
}

pub fn mean_reconstruction_fidelity(
    result: &ReconstructionResult,
    tomography: &[CMatrix],
) -> Result<ReconstructionFidelity> {
    mean_fidelity(&result.final_states, tomography)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{cardinal_state, density_from_bloch, is_unitary, pure_density, Pauli};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn textbook_values() {
        let zero = cardinal_state("+Z").unwrap();
        let one = cardinal_state("-Z").unwrap();
        let mixed = density_from_bloch(&[0.0, 0.0, 0.0], 1);
        assert!((state_fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(state_fidelity(&zero, &one).unwrap() < 1e-12);
        assert!((state_fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!((state_fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_matrices() {
        let bad = density_from_bloch(&[0.0, 0.0, 1.5], 1);
        assert!(matches!(state_fidelity(&bad, &bad), Err(Error::InvalidState(_))));
    }

    #[test]
    fn orthogonal_unitary_gives_one_third() {
        let x = Pauli::X.matrix();
        assert!((haar_average_fidelity(&x) - 1.0 / 3.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc = haar_average_fidelity_monte_carlo(&x, 100_000, &mut rng);
        assert!((mc - 1.0 / 3.0).abs() < 3e-3, "{mc}");
    }

    #[test]
    fn closed_form_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2usize, 4] {
            for _ in 0..4 {
                let u = haar_random_unitary(d, &mut rng);
                assert!(is_unitary(&u, 1e-12));
                let mc = haar_average_fidelity_monte_carlo(&u, 100_000, &mut rng);
                assert!((mc - haar_average_fidelity(&u)).abs() < 3e-3);
            }
        }
    }

    #[test]
    fn identical_hamiltonians_have_unit_trace() {
        let h = PauliHamiltonian::zeros(1, 2e-9, 50).with("X", vec![1e7; 50]);
        let f = dynamical_coherent_fidelity(&h, &h).unwrap();
        assert_eq!(f.values.len(), 51);
        assert!(f.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let short = PauliHamiltonian::zeros(1, 2e-9, 49);
        assert!(dynamical_coherent_fidelity(&h, &short).is_err());
    }

    #[test]
    fn interior_minimum_skips_endpoints() {
        let t = FidelityTrace {
            dt: 1.0,
            values: vec![1.0, 0.9, 0.95, 0.5],
            kind: FidelityKind::DynamicalCoherent,
        };
        assert_eq!(t.interior_minimum(), Some((1, 0.9)));
    }

    fn random_state(seed: &[f64], d: usize, rank: usize) -> CMatrix {
        let mut a = CMatrix::zeros(d, rank);
        for (k, z) in a.iter_mut().enumerate() {
            *z = C64::new(seed[(2 * k) % seed.len()], seed[(2 * k + 1) % seed.len()]);
        }
        let rho = &a * a.adjoint();
        &rho / trace(&rho)
    }

    proptest! {
        #[test]
        fn fidelity_is_symmetric(a in proptest::collection::vec(-1.0f64..1.0, 32),
                                 b in proptest::collection::vec(-1.0f64..1.0, 32)) {
            prop_assume!(a.iter().any(|v| v.abs() > 0.1) && b.iter().any(|v| v.abs() > 0.1));
            let r = random_state(&a, 4, 3);
            let s = random_state(&b, 4, 4);
            let f1 = state_fidelity(&r, &s).unwrap();
            let f2 = state_fidelity(&s, &r).unwrap();
            prop_assert!((f1 - f2).abs() < 1e-10);
            prop_assert!((0.0..=1.0).contains(&f1));
        }

        #[test]
        fn pure_states_reduce_to_overlap(a in proptest::collection::vec(-1.0f64..1.0, 8),
                                         b in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let psi: Vec<C64> = a.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            let phi: Vec<C64> = b.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            let np: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            let nf: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            prop_assume!(np > 1e-3 && nf > 1e-3);
            let overlap: C64 = psi.iter().zip(&phi).map(|(x, y)| x.conj() * y).sum();
            let expected = overlap.norm_sqr() / (np * nf);
            let f = state_fidelity(&pure_density(&psi), &pure_density(&phi)).unwrap();
            prop_assert!((f - expected).abs() < 1e-9);
        }

        #[test]
        fn global_phase_is_invisible(alpha in -3.0f64..3.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = haar_random_unitary(4, &mut rng);
            let v = &u * C64::from_polar(1.0, alpha);
            prop_assert!((haar_average_fidelity(&(u.adjoint() * v)) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn depends_only_on_relative_unitary(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ur = haar_random_unitary(2, &mut rng);
            let uc = haar_random_unitary(2, &mut rng);
            let w = haar_random_unitary(2, &mut rng);
            let f = haar_average_fidelity(&(uc.adjoint() * &ur));
            let g = haar_average_fidelity(&((&w * uc).adjoint() * (&w * ur)));
            prop_assert!((f - g).abs() < 1e-12);
        }
    }
}
