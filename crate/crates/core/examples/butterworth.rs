//! Butterworth low-pass design and zero-phase filtering.

use hamrec::signal::{butterworth_coefficients, filter_apply, FilterSpec, PhaseMode};

fn main() -> hamrec::Result<()> {
    let fs = 1e9;
    let spec = FilterSpec::new(3, 50e6);
    let c = butterworth_coefficients(&spec, fs)?;
    for f in [0.0, 10e6, 50e6, 100e6, 200e6] {
        println!("|H({:>3.0} MHz)| = {:.4}", f / 1e6, c.response(f, fs).norm());
    }

    // a 2 MHz tone plus a 150 MHz spur
    let x: Vec<f64> = (0..2000)
        .map(|n| {
            let t = n as f64 / fs;
            (2.0 * std::f64::consts::PI * 2e6 * t).sin() + 0.3 * (2.0 * std::f64::consts::PI * 150e6 * t).sin()
        })
        .collect();
    let y = filter_apply(&x, &c, PhaseMode::ZeroPhase);
    let spur = |v: &[f64]| {
        let clean: Vec<f64> = (0..v.len()).map(|n| (2.0 * std::f64::consts::PI * 2e6 * n as f64 / fs).sin()).collect();
        (v[500..1500].iter().zip(&clean[500..1500]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 1000.0).sqrt()
    };
    println!("spur rms before {:.4}, after {:.4}", spur(&x), spur(&y));
    Ok(())
}
