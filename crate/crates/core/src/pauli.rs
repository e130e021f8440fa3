//! Dense complex-matrix kernel: Pauli strings, tensor products, dissipators,
//! matrix exponentials and Bloch-vector conversions.
//!
//! Basis ordering is big-endian in the qubit index: for two qubits the basis
//! is `|q1 q2>` = `|00>, |01>, |10>, |11>`, and `|0>` is the `z = +1`
//! eigenstate of `Z`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    /// `self * other = phase * result`.
    pub fn mul(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::{X, Y, Z};
        let i = C64::new(0.0, 1.0);
        match (self, other) {
            (Pauli::I, p) | (p, Pauli::I) => (ONE, p),
            (a, b) if a == b => (ONE, Pauli::I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 1 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel(Vec<Pauli>);

impl PauliLabel {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidLabel(String::new()));
        }
        Ok(Self(letters))
    }

    pub fn identity(qubits: usize) -> Self {
        Self(vec![Pauli::I; qubits])
    }

    /// Single-letter label acting on `qubit` (0-based) of a `qubits`-qubit register.
    pub fn single(qubits: usize, qubit: usize, p: Pauli) -> Self {
        let mut v = vec![Pauli::I; qubits];
        v[qubit] = p;
        Self(v)
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Made only of `I` and `Z`: commutes with every measured `Z_q`, so
    /// invisible to a first-order update.
    pub fn is_z_type(&self) -> bool {
        self.0.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    /// Position in the base-4 enumeration (I, X, Y, Z per letter, qubit 1
    /// most significant). The identity has index 0.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &p| acc * 4 + p as usize)
    }

    pub fn from_index(qubits: usize, mut index: usize) -> Self {
        let mut v = vec![Pauli::I; qubits];
        for slot in v.iter_mut().rev() {
            *slot = Pauli::ALL[index % 4];
            index /= 4;
        }
        Self(v)
    }

    /// All `4^Q - 1` non-identity labels in enumeration order.
    pub fn all(qubits: usize) -> Vec<PauliLabel> {
        (1..4usize.pow(qubits as u32))
            .map(|i| Self::from_index(qubits, i))
            .collect()
    }

    /// Labels a first-order update can solve for: everything but the
    /// `d - 1` products of `I` and `Z`.
    pub fn recoverable(qubits: usize) -> Vec<PauliLabel> {
        Self::all(qubits).into_iter().filter(|p| !p.is_z_type()).collect()
    }

    pub fn product(&self, other: &PauliLabel) -> (C64, PauliLabel) {
        assert_eq!(self.qubits(), other.qubits());
        let mut phase = ONE;
        let letters = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (ph, p) = a.mul(b);
                phase *= ph;
                p
            })
            .collect();
        (phase, PauliLabel(letters))
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidLabel(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidLabel(s.to_string()));
        }
        Ok(Self(letters))
    }
}

impl Serialize for PauliLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn pauli_operator(label: &PauliLabel) -> CMatrix {
    let mut letters = label.letters().iter();
    let first = letters.next().expect("labels are non-empty").matrix();
    letters.fold(first, |acc, p| kron(&acc, &p.matrix()))
}

/// Precomputed Pauli matrices for a register size.
#[derive(Debug)]
pub struct PauliBasis {
    pub qubits: usize,
    pub labels: Vec<PauliLabel>,
    pub operators: Vec<CMatrix>,
}

impl PauliBasis {
    fn build(qubits: usize) -> Self {
        let labels = PauliLabel::all(qubits);
        let operators = labels.iter().map(pauli_operator).collect();
        Self {
            qubits,
            labels,
            operators,
        }
    }

    /// Shared basis for `qubits` in `1..=3`; larger registers are built fresh
    /// and leaked, which never happens in the supported scenarios.
    pub fn get(qubits: usize) -> &'static PauliBasis {
        static CACHE: [OnceLock<PauliBasis>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        match qubits {
            1..=3 => CACHE[qubits - 1].get_or_init(|| Self::build(qubits)),
            _ => Box::leak(Box::new(Self::build(qubits))),
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// Operator of the label whose enumeration index is `index` (>= 1).
    pub fn operator(&self, label: &PauliLabel) -> &CMatrix {
        &self.operators[label.index() - 1]
    }
}

/// `Re Tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// `D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}`.
pub fn dissipator(l: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    if l.shape() != rho.shape() || !l.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "dissipator: L is {:?}, rho is {:?}",
            l.shape(),
            rho.shape()
        )));
    }
    let ld = l.adjoint();
    let ldl = &ld * l;
    Ok(l * rho * &ld - (&ldl * rho + rho * &ldl) * C64::new(0.5, 0.0))
}

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs(&(a - a.adjoint())) <= tol
}

pub fn is_skew_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && max_abs(&(a + a.adjoint())) <= tol
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    let n = u.nrows();
    u.is_square() && max_abs(&(u.adjoint() * u - CMatrix::identity(n, n))) < tol
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues and the
/// unitary whose columns are the eigenvectors.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(h.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Matrix exponential. Skew-Hermitian inputs (the propagator hot path) go
/// through a Hermitian eigendecomposition so the result stays unitary;
/// everything else uses Pade scaling-and-squaring.
pub fn matrix_exp(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "matrix_exp needs a square matrix");
    let scale = max_abs(a).max(1.0);
    if is_skew_hermitian(a, 1e-12 * scale) {
        // a = -i h with h Hermitian
        let h = a * I;
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let (vals, vecs) = hermitian_eigen(&h);
        let n = a.nrows();
        let mut scaled = vecs.clone();
        for (j, &lam) in vals.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lam);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        let u = scaled * vecs.adjoint();
        debug_assert!(is_unitary(&u, 1e-10));
        u
    } else {
        a.clone().exp()
    }
}

/// Pauli expectation values `Tr(rho P)` for every non-identity label of a
/// `qubits`-qubit register, in [`PauliLabel::all`] order.
pub fn bloch_vector(rho: &CMatrix, qubits: usize) -> Result<Vec<f64>> {
    let basis = PauliBasis::get(qubits);
    if rho.nrows() != basis.dim() || !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "bloch_vector: rho is {:?} but {} qubits need {}x{}",
            rho.shape(),
            qubits,
            basis.dim(),
            basis.dim()
        )));
    }
    let tr = trace(rho).re;
    if (tr - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitTrace { trace: tr });
    }
    Ok(expectations(rho, qubits))
}

/// Same as [`bloch_vector`] without the trace contract; used for traceless
/// operators such as generator outputs.
pub fn expectations(rho: &CMatrix, qubits: usize) -> Vec<f64> {
    PauliBasis::get(qubits)
        .operators
        .iter()
        .map(|p| trace_product_re(rho, p))
        .collect()
}

/// `rho = (I + sum_P b_P P) / 2^Q`.
pub fn density_from_bloch(bloch: &[f64], qubits: usize) -> CMatrix {
    let basis = PauliBasis::get(qubits);
    assert_eq!(bloch.len(), basis.labels.len(), "bloch vector length");
    let d = basis.dim();
    let mut rho = CMatrix::identity(d, d);
    for (b, p) in bloch.iter().zip(&basis.operators) {
        if *b != 0.0 {
            rho += p * C64::new(*b, 0.0);
        }
    }
    rho / C64::new(d as f64, 0.0)
}

pub fn pure_density(psi: &[C64]) -> CMatrix {
    let v = nalgebra::DVector::from_column_slice(psi);
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    (&v * v.adjoint()) / C64::new(norm2, 0.0)
}

/// Cardinal product state such as `+X`, `-Z` or `+X+Z` (qubit 1 first).
pub fn cardinal_state(label: &str) -> Result<CMatrix> {
    let bad = || Error::InvalidLabel(label.to_string());
    let chars: Vec<char> = label.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
    if chars.is_empty() || chars.len() % 2 != 0 {
        return Err(bad());
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![ONE];
    for pair in chars.chunks(2) {
        let sign = match pair[0] {
            '+' => 1.0,
            '-' => -1.0,
            _ => return Err(bad()),
        };
        let single = match pair[1].to_ascii_uppercase() {
            'X' => [C64::new(h, 0.0), C64::new(sign * h, 0.0)],
            'Y' => [C64::new(h, 0.0), C64::new(0.0, sign * h)],
            'Z' if sign > 0.0 => [ONE, ZERO],
            'Z' => [ZERO, ONE],
            _ => return Err(bad()),
        };
        psi = psi
            .iter()
            .flat_map(|a| single.iter().map(move |b| a * b))
            .collect();
    }
    Ok(pure_density(&psi))
}

/// Number of qubits encoded by a cardinal state label.
pub fn cardinal_qubits(label: &str) -> usize {
    label.chars().filter(|c| *c == '+' || *c == '-').count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_mat_eq(a: &CMatrix, b: &CMatrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() <= tol, "{a}\n!=\n{b}");
        }
    }

    /// Truncated Taylor series, used as an independent exponential oracle.
    fn exp_series(a: &CMatrix) -> CMatrix {
        let n = a.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..80 {
            term = &term * a / c(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn z_operator_is_diagonal() {
        let z = pauli_operator(&"Z".parse().unwrap());
        assert_mat_eq(&z, &CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE])), 0.0);
    }

    #[test]
    fn xi_has_ones_on_anti_block_diagonal() {
        let xi = pauli_operator(&"XI".parse().unwrap());
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 2)] = ONE;
        expected[(1, 3)] = ONE;
        expected[(2, 0)] = ONE;
        expected[(3, 1)] = ONE;
        assert_mat_eq(&xi, &expected, 0.0);
    }

    #[test]
    fn xy_squared_traces_to_four() {
        let p = pauli_operator(&"XY".parse().unwrap());
        let t = trace(&(&p * &p));
        assert_abs_diff_eq!(t.re, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn paulis_are_trace_orthogonal() {
        for q in 1..=2 {
            let basis = PauliBasis::get(q);
            for (i, a) in basis.operators.iter().enumerate() {
                for (j, b) in basis.operators.iter().enumerate() {
                    let t = trace(&(a * b));
                    let expected = if i == j { (1 << q) as f64 } else { 0.0 };
                    assert_abs_diff_eq!(t.re, expected, epsilon = 1e-14);
                    assert_abs_diff_eq!(t.im, 0.0, epsilon = 1e-14);
                }
                assert!(is_hermitian(a, 1e-15));
                assert_abs_diff_eq!(trace(a).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn label_product_matches_matrix_product() {
        for a in PauliLabel::all(2) {
            for b in PauliLabel::all(2) {
                let (phase, p) = a.product(&b);
                let lhs = pauli_operator(&a) * pauli_operator(&b);
                let rhs = pauli_operator(&p) * phase;
                assert_mat_eq(&lhs, &rhs, 1e-15);
            }
        }
    }

    #[test]
    fn index_round_trips() {
        for (k, l) in PauliLabel::all(2).iter().enumerate() {
            assert_eq!(l.index(), k + 1);
            assert_eq!(&PauliLabel::from_index(2, k + 1), l);
            assert_eq!(l.to_string().parse::<PauliLabel>().unwrap(), *l);
        }
        assert!("XQ".parse::<PauliLabel>().is_err());
    }

    #[test]
    fn dephasing_leaves_pole_alone() {
        let z = Pauli::Z.matrix();
        let rho = cardinal_state("+Z").unwrap();
        let d = dissipator(&z, &rho).unwrap();
        assert_mat_eq(&d, &CMatrix::zeros(2, 2), 1e-15);
    }

    #[test]
    fn dephasing_scales_coherences_by_minus_two() {
        let z = Pauli::Z.matrix();
        let rho = cardinal_state("+X").unwrap();
        let d = dissipator(&z, &rho).unwrap();
        // direct 2x2 arithmetic: Z rho Z flips the off-diagonal signs
        let mut expected = CMatrix::zeros(2, 2);
        expected[(0, 1)] = rho[(0, 1)] * -2.0;
        expected[(1, 0)] = rho[(1, 0)] * -2.0;
        assert_mat_eq(&d, &expected, 1e-15);
    }

    #[test]
    fn lowering_moves_excited_population_down() {
        let lower = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        let rho = cardinal_state("-Z").unwrap();
        let d = dissipator(&lower, &rho).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert_mat_eq(&d, &expected, 1e-15);
    }

    #[test]
    fn dissipator_rejects_mismatched_dims() {
        let rho = cardinal_state("+Z+Z").unwrap();
        assert!(matches!(
            dissipator(&Pauli::Z.matrix(), &rho),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_mat_eq(&matrix_exp(&CMatrix::zeros(4, 4)), &CMatrix::identity(4, 4), 0.0);
    }

    #[test]
    fn exp_half_pi_x() {
        let a = Pauli::X.matrix() * c(0.0, -PI / 2.0);
        let u = matrix_exp(&a);
        let closed = Pauli::I.matrix() * c((PI / 2.0).cos(), 0.0) - Pauli::X.matrix() * c(0.0, (PI / 2.0).sin());
        assert_mat_eq(&u, &closed, 1e-14);
        assert_mat_eq(&u, &exp_series(&a), 1e-13);
        assert_abs_diff_eq!(u[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        assert_mat_eq(&CMatrix::from_row_slice(1, 1, &[u[(0, 1)]]), &CMatrix::from_row_slice(1, 1, &[-I]), 1e-14);
    }

    #[test]
    fn exp_diagonal_z() {
        let a = Pauli::Z.matrix() * c(0.0, -PI / 2.0);
        let u = matrix_exp(&a);
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[C64::from_polar(1.0, -PI / 2.0), ZERO, ZERO, C64::from_polar(1.0, PI / 2.0)],
        );
        assert_mat_eq(&u, &expected, 1e-14);
        assert_mat_eq(&u, &exp_series(&a), 1e-13);
    }

    #[test]
    fn exp_general_path_matches_series() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.3, 0.1), c(1.2, 0.0), c(-0.4, 0.7), c(0.0, -0.2)]);
        assert!(!is_skew_hermitian(&a, 1e-12));
        assert_mat_eq(&matrix_exp(&a), &exp_series(&a), 1e-12);
    }

    #[test]
    fn bloch_of_cardinal_states() {
        assert_eq!(bloch_vector(&cardinal_state("+Z").unwrap(), 1).unwrap(), vec![0.0, 0.0, 1.0]);
        let plus = bloch_vector(&cardinal_state("+X").unwrap(), 1).unwrap();
        assert_abs_diff_eq!(plus[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(plus[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(plus[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_like_state_correlations() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [ZERO, c(h, 0.0), c(h, 0.0), ZERO];
        let rho = pure_density(&psi);
        let b = bloch_vector(&rho, 2).unwrap();
        // brute-force oracle: Tr(rho P) via explicit matrix products
        for (label, value) in PauliLabel::all(2).iter().zip(&b) {
            let brute = trace(&(&rho * pauli_operator(label))).re;
            assert_abs_diff_eq!(*value, brute, epsilon = 1e-15);
            let expected = match label.to_string().as_str() {
                "XX" | "YY" => 1.0,
                "ZZ" => -1.0,
                _ => 0.0,
            };
            assert_abs_diff_eq!(*value, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn bloch_rejects_bad_trace() {
        let rho = cardinal_state("+Z").unwrap() * c(2.0, 0.0);
        assert!(matches!(bloch_vector(&rho, 1), Err(Error::NonUnitTrace { .. })));
    }

    #[test]
    fn cardinal_state_parsing() {
        assert_eq!(cardinal_qubits("+X-Z"), 2);
        assert!(cardinal_state("+Q").is_err());
        assert!(cardinal_state("X").is_err());
        let rho = cardinal_state("+Y").unwrap();
        let b = bloch_vector(&rho, 1).unwrap();
        assert_abs_diff_eq!(b[1], 1.0, epsilon = 1e-15);
    }

    fn random_density(seed: &[f64], d: usize) -> CMatrix {
        // rho = A A^dag / Tr, A filled from the seed values
        let mut a = CMatrix::zeros(d, d);
        for (k, z) in a.iter_mut().enumerate() {
            *z = c(seed[(2 * k) % seed.len()], seed[(2 * k + 1) % seed.len()]);
        }
        let rho = &a * a.adjoint();
        let t = trace(&rho);
        rho / t
    }

    proptest! {
        #[test]
        fn bloch_round_trip(seed in proptest::collection::vec(-1.0f64..1.0, 32), q in 1usize..=2) {
            let d = 1 << q;
            let rho = random_density(&seed, d);
            prop_assume!(trace(&(&rho * rho.adjoint())).re > 1e-6);
            let b = bloch_vector(&rho, q).unwrap();
            let back = density_from_bloch(&b, q);
            for (x, y) in rho.iter().zip(back.iter()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn dissipator_traceless_and_hermitian(seed in proptest::collection::vec(-1.0f64..1.0, 32), lseed in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let rho = random_density(&seed, 2);
            let l = CMatrix::from_row_slice(2, 2, &[c(lseed[0], lseed[1]), c(lseed[2], lseed[3]), c(lseed[4], lseed[5]), c(lseed[6], lseed[7])]);
            let d = dissipator(&l, &rho).unwrap();
            prop_assert!(trace(&d).norm() < 1e-12);
            prop_assert!(is_hermitian(&d, 1e-12));
        }

        #[test]
        fn unitary_exponentials_invert(bloch in proptest::collection::vec(-1.0f64..1.0, 15), t in 0.0f64..2.5) {
            let basis = PauliBasis::get(2);
            let mut h = CMatrix::zeros(4, 4);
            for (b, p) in bloch.iter().zip(&basis.operators) {
                h += p * c(*b, 0.0);
            }
            // keep ||H t|| <= 10
            let scale = 10.0 / (h.norm() * t).max(10.0);
            let ht = h * c(t * scale, 0.0);
            let fwd = matrix_exp(&(&ht * -I));
            let bwd = matrix_exp(&(&ht * I));
            let prod = fwd * bwd;
            for (x, y) in prod.iter().zip(CMatrix::identity(4, 4).iter()) {
                prop_assert!((x - y).norm() < 1e-9);
            }
        }
    }
}
