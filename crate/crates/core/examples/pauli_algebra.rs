//! Pauli labels, products, commutators and Bloch vectors.

use hamrec::pauli::{bloch_vector, cardinal_state, commutator, pauli_operator};
use hamrec::PauliLabel;

fn main() -> hamrec::Result<()> {
    let xy: PauliLabel = "XY".parse()?;
    let zz: PauliLabel = "ZZ".parse()?;
    let (phase, product) = xy.product(&zz);
    println!("XY * ZZ = ({phase}) {product}");

    let c = commutator(&pauli_operator(&"X".parse()?), &pauli_operator(&"Y".parse()?));
    println!("[X, Y] = 2i Z: {}", (c[(0, 0)] - hamrec::C64::new(0.0, 2.0)).norm() < 1e-12);

    println!("recoverable two-qubit labels: {:?}", PauliLabel::recoverable(2).iter().map(|l| l.to_string()).collect::<Vec<_>>());

    let rho = cardinal_state("+X-Z")?;
    let bloch = bloch_vector(&rho, 2)?;
    for (k, v) in bloch.iter().enumerate().filter(|(_, v)| v.abs() > 1e-12) {
        println!("<{}> = {v:+.1}", PauliLabel::from_index(2, k + 1));
    }
    Ok(())
}
