//! Artifact files. Every number is written with a fixed format so identical
//! runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::run::{ChevronOutput, RunOutput, ScenarioOutput};
use super::Scenario;
use crate::error::Result;

/// Files written for every single run.
pub const ARTIFACTS: &[&str] = &[
    "truth_amplitudes.csv",
    "z_traces.csv",
    "reconstructed_amplitudes.csv",
    "diagnostics.csv",
    "dynamical_fidelity.csv",
    "fidelity.json",
    "manifest.json",
];

fn z_traces_csv(run: &RunOutput) -> String {
    let q = run.scenario.qubits();
    let mut out = String::from("time_s");
    for t in &run.traces {
        for k in 1..=q {
            out.push_str(&format!(",{0}_q{k}_true,{0}_q{k}_conditioned", t.label));
        }
    }
    out.push('\n');
    let dt = run.scenario.dt();
    for n in 0..=run.scenario.steps() {
        out.push_str(&format!("{:.14e}", n as f64 * dt));
        for t in &run.traces {
            for k in 0..q {
                out.push_str(&format!(",{:.14e},{:.14e}", t.true_z[k][n], t.conditioned_z[k][n]));
            }
        }
        out.push('\n');
    }
    out
}

fn fidelity_json(run: &RunOutput) -> Value {
    let states: Vec<Value> = run
        .traces
        .iter()
        .zip(&run.fidelity.per_state)
        .map(|(t, f)| json!({ "state": t.label, "fidelity": f }))
        .collect();
    let dynamical = &run.dynamical;
    let minimum = dynamical.interior_minimum().map(|(k, v)| {
        json!({ "index": k, "time_s": k as f64 * dynamical.dt, "value": v })
    });
    let preconditioning = run.preconditioning.as_ref().map(|p| {
        json!({
            "labels": p.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "amplitudes_rad_per_s": p.amplitudes,
            "amplitudes_khz": p.amplitudes.iter().map(|a| a / (2.0 * std::f64::consts::PI * 1e3)).collect::<Vec<_>>(),
            "fidelity": p.fidelity,
            "baseline_fidelity": p.baseline_fidelity,
            "gain": p.gain,
            "iterations": p.iterations,
        })
    });
    json!({
        "reconstruction": { "states": states, "mean": run.fidelity.mean },
        "dynamical": {
            "dt_s": dynamical.dt,
            "final": dynamical.last(),
            "interior_minimum": minimum,
            "values": dynamical.values,
        },
        "preconditioning": preconditioning,
    })
}

/// Everything the run consumed, in SI units.
fn resolved(s: &Scenario, record_samples: Option<usize>) -> Value {
    let coupler = (s.qubits() == 2).then(|| s.coupler_params());
    json!({
        "qubits": s.qubits(),
        "duration_s": s.duration(),
        "dt_s": s.dt(),
        "steps": s.steps(),
        "sample_rate_hz": s.sample_rate(),
        "decimation": s.decimation(),
        "shots_simulated": s.effective_shots(),
        "record_samples": record_samples,
        "readout": s.readout_params(),
        "rates": s.rates(),
        "tau_s": s.taus(),
        "coupler": coupler,
    })
}

fn manifest(s: &Scenario, warnings: &[String], record_samples: Option<usize>, artifacts: &[&str]) -> Value {
    json!({
        "toolkit": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "seed": s.seed,
        "scenario": s,
        "resolved": resolved(s, record_samples),
        "warnings": warnings,
        "artifacts": artifacts,
    })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_run(dir: &Path, run: &RunOutput, manifest_for: Option<(&Scenario, &[&str])>) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("truth_amplitudes.csv"), run.truth.to_csv())?;
    fs::write(dir.join("z_traces.csv"), z_traces_csv(run))?;
    fs::write(dir.join("reconstructed_amplitudes.csv"), run.result.amplitudes_csv())?;
    fs::write(dir.join("diagnostics.csv"), run.result.diagnostics_csv())?;
    fs::write(dir.join("dynamical_fidelity.csv"), run.dynamical.to_csv())?;
    write_json(&dir.join("fidelity.json"), &fidelity_json(run))?;
    let (s, extra) = manifest_for.unwrap_or((&run.scenario, &[]));
    let mut artifacts = ARTIFACTS.to_vec();
    artifacts.extend_from_slice(extra);
    write_json(&dir.join("manifest.json"), &manifest(s, &run.warnings, Some(run.record_samples), &artifacts))
}

fn chevron_csv(c: &ChevronOutput) -> String {
    let mut out = String::from("detuning_mhz,duration_ns,population_01\n");
    for (d, row) in c.detunings_mhz.iter().zip(&c.population) {
        for (t, p) in c.durations_ns.iter().zip(row) {
            out.push_str(&format!("{d:.14e},{t:.14e},{p:.14e}\n"));
        }
    }
    out
}

/// Run directory `<root>/<name>_seed<seed>`.
pub fn output_dir(root: &Path, s: &Scenario) -> PathBuf {
    root.join(format!("{}_seed{}", s.name, s.seed))
}

/// Writes all artifacts of `output` (produced from `s`) and returns the run
/// directory.
pub fn write_outputs(root: &Path, s: &Scenario, output: &ScenarioOutput) -> Result<PathBuf> {
    let dir = output_dir(root, s);
    fs::create_dir_all(&dir)?;
    match output {
        ScenarioOutput::Single(run) => write_run(&dir, run, Some((s, &[])))?,
        ScenarioOutput::Chevron(run, chevron) => {
            write_run(&dir, run, Some((s, &["chevron.csv"])))?;
            fs::write(dir.join("chevron.csv"), chevron_csv(chevron))?;
        }
        ScenarioOutput::Sweep(points) => {
            let mut summary =
                String::from("duration_ns,mean_fidelity,mean_infidelity,final_dynamical_fidelity\n");
            let mut warnings = Vec::new();
            for p in points {
                write_run(&dir.join(format!("duration_{}ns", p.duration_ns)), &p.run, None)?;
                let f = p.run.fidelity.mean;
                summary.push_str(&format!(
                    "{:.14e},{:.14e},{:.14e},{:.14e}\n",
                    p.duration_ns,
                    f,
                    1.0 - f,
                    p.run.dynamical.last().unwrap_or(f64::NAN)
                ));
                warnings.extend(p.run.warnings.iter().cloned());
            }
            fs::write(dir.join("sweep_summary.csv"), summary)?;
            warnings.dedup();
            write_json(&dir.join("manifest.json"), &manifest(s, &warnings, None, &["sweep_summary.csv"]))?;
        }
    }
    Ok(dir)
}
