//! Analytic pulse envelopes for scenario configs.
//!
//! Amplitudes are given as `Omega / 2 pi` in MHz; areas in radians. Every
//! shape lives on a window `[start, stop]` inside the pulse and is zero
//! outside it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MHZ: f64 = 2.0 * PI * 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Constant {
        amplitude_mhz: f64,
    },
    /// Flat top with raised-cosine edges of length `ramp_ns`. Give exactly
    /// one of a peak amplitude or a total area.
    FlatTop {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude_mhz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        area: Option<f64>,
        ramp_ns: f64,
    },
    /// `sin^2(pi t / T)` over the window.
    Hann {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude_mhz: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        area: Option<f64>,
    },
    /// `A sin(2 pi cycles t / T + phase)` over the window.
    Sine {
        amplitude_mhz: f64,
        cycles: f64,
        #[serde(default)]
        phase: f64,
    },
}

/// A shape placed on a sub-window of the pulse (whole pulse by default).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_ns: Option<f64>,
}

impl Waveform {
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            start_ns: None,
            stop_ns: None,
        }
    }

    fn window(&self, duration: f64) -> (f64, f64) {
        let start = self.start_ns.map_or(0.0, |v| v * 1e-9);
        let stop = self.stop_ns.map_or(duration, |v| v * 1e-9);
        (start, stop)
    }

    pub fn validate(&self, duration: f64, field: &str) -> Result<()> {
        let (start, stop) = self.window(duration);
        if !(start >= 0.0 && stop <= duration * (1.0 + 1e-12) && stop > start) {
            return Err(Error::config(field, format!("window [{start:e}, {stop:e}] s must lie inside the pulse")));
        }
        let strength = |amp: &Option<f64>, area: &Option<f64>| match (amp, area) {
            (Some(a), None) | (None, Some(a)) if a.is_finite() => Ok(()),
            _ => Err(Error::config(field, "give exactly one of amplitude_mhz or area")),
        };
        match &self.shape {
            Shape::Constant { amplitude_mhz } if !amplitude_mhz.is_finite() => {
                Err(Error::config(field, "amplitude must be finite"))
            }
            Shape::FlatTop { amplitude_mhz, area, ramp_ns } => {
                strength(amplitude_mhz, area)?;
                if !(*ramp_ns >= 0.0 && 2.0 * ramp_ns * 1e-9 <= (stop - start) * (1.0 + 1e-12)) {
                    return Err(Error::config(field, "ramps must fit inside the window"));
                }
                Ok(())
            }
            Shape::Hann { amplitude_mhz, area } => strength(amplitude_mhz, area),
            Shape::Sine { amplitude_mhz, cycles, phase } if !(amplitude_mhz.is_finite() && cycles.is_finite() && phase.is_finite()) => {
                Err(Error::config(field, "sine parameters must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Peak amplitude in rad/s.
    fn peak(&self, width: f64) -> f64 {
        let from = |amp: &Option<f64>, area: &Option<f64>, unit_area: f64| match (*amp, *area) {
            (Some(a), _) => a * MHZ,
            (None, Some(area)) => area / unit_area,
            (None, None) => 0.0,
        };
        match &self.shape {
            Shape::Constant { amplitude_mhz } | Shape::Sine { amplitude_mhz, .. } => amplitude_mhz * MHZ,
            // each raised-cosine edge carries half its length in area
            Shape::FlatTop { amplitude_mhz, area, ramp_ns } => from(amplitude_mhz, area, width - ramp_ns * 1e-9),
            Shape::Hann { amplitude_mhz, area } => from(amplitude_mhz, area, 0.5 * width),
        }
    }

    /// Value in rad/s at time `t` into a pulse of length `duration`.
    pub fn value(&self, t: f64, duration: f64) -> f64 {
        let (start, stop) = self.window(duration);
        if t < start || t >= stop {
            return 0.0;
        }
        let width = stop - start;
        let u = t - start;
        let a = self.peak(width);
        match &self.shape {
            Shape::Constant { .. } => a,
            Shape::FlatTop { ramp_ns, .. } => {
                let r = ramp_ns * 1e-9;
                let edge = |x: f64| 0.5 * (1.0 - (PI * x / r).cos());
                if u < r {
                    a * edge(u)
                } else if u > width - r {
                    a * edge(width - u)
                } else {
                    a
                }
            }
            Shape::Hann { .. } => a * (PI * u / width).sin().powi(2),
            Shape::Sine { cycles, phase, .. } => a * (2.0 * PI * cycles * u / width + phase).sin(),
        }
    }

    /// Unsigned envelope in `[0, 1]`, used to shape coupler pulses.
    pub fn unit_shape(&self, t: f64, duration: f64) -> f64 {
        let (start, stop) = self.window(duration);
        let peak = self.peak(stop - start);
        if peak == 0.0 {
            0.0
        } else {
            (self.value(t, duration) / peak).abs()
        }
    }
}
