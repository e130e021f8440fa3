//! Parametric exchange through a flux-modulated tunable coupler.

use std::f64::consts::PI;

use hamrec::coupler::{chevron, coupler_frequency, exchange_rate, residual_z, CouplerParams};

fn main() -> hamrec::Result<()> {
    let p = CouplerParams::default();
    p.validate()?;
    for phi in [0.0, 0.25, 0.5] {
        println!("omega_c({phi}) / 2pi = {:.3} GHz", coupler_frequency(phi, &p) / (2.0 * PI * 1e9));
    }
    for eps in [0.10, 0.167, 0.20] {
        let rate = exchange_rate(eps, &p)?.abs();
        println!("epsilon {eps:.3}: full swap after {:.0} ns", PI / rate * 1e9);
    }
    let (iz, zi) = residual_z(2.0 * PI * 92.75e3, &p)?;
    println!("92.75 kHz detuning error leaves IZ {:.0} kHz, ZI {:.0} kHz", iz / (2.0 * PI * 1e3), zi / (2.0 * PI * 1e3));

    let durations: Vec<f64> = (0..=8).map(|k| k as f64 * 40e-9).collect();
    let detunings: Vec<f64> = [-2.0, 0.0, 2.0].iter().map(|d| d * 2.0 * PI * 1e6).collect();
    let grid = chevron(0.167, &detunings, &durations, &p)?;
    for (d, row) in [-2.0, 0.0, 2.0].iter().zip(&grid) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        println!("{d:+.0} MHz: {}", cells.join(" "));
    }
    Ok(())
}
