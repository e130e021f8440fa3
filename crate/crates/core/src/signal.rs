//! Conditioning of averaged voltage records into `<Z>` traces: Butterworth
//! low-pass filtering, delay removal, bin-average decimation, affine rescale
//! and clipping.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::readout::{compensated_sum, Calibration, MeasurementRecord};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Forward then backward pass: squared magnitude, no group delay.
    #[default]
    ZeroPhase,
    Causal,
}

/// Low-pass Butterworth specification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub order: usize,
    /// Cutoff in Hz (-3 dB point of a single pass).
    pub critical_freq: f64,
    #[serde(default)]
    pub phase_mode: PhaseMode,
}

impl FilterSpec {
    pub fn new(order: usize, critical_freq: f64) -> Self {
        Self {
            order,
            critical_freq,
            phase_mode: PhaseMode::ZeroPhase,
        }
    }

    pub fn causal(mut self) -> Self {
        self.phase_mode = PhaseMode::Causal;
        self
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidFilter("order must be at least 1".into()));
        }
        if !(self.critical_freq > 0.0 && self.critical_freq < 0.5 * sample_rate) {
            return Err(Error::InvalidFilter(format!(
                "critical frequency {} Hz must lie in (0, {}) Hz",
                self.critical_freq,
                0.5 * sample_rate
            )));
        }
        Ok(())
    }
}

/// Transfer function `B(z^-1) / A(z^-1)` with `a[0] = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterCoefficients {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
}

impl FilterCoefficients {
    /// `H(e^{i 2 pi f / fs})`.
    pub fn response(&self, freq: f64, sample_rate: f64) -> Complex64 {
        let w = 2.0 * std::f64::consts::PI * freq / sample_rate;
        let eval = |c: &[f64]| -> Complex64 {
            c.iter()
                .enumerate()
                .map(|(k, &ck)| Complex64::from_polar(ck, -w * k as f64))
                .sum()
        };
        eval(&self.b) / eval(&self.a)
    }

    pub fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] -= ck * r;
        }
        c = next;
    }
    c
}

/// Digital Butterworth low-pass via the bilinear transform, prewarped at the
/// cutoff and normalised to unit DC gain.
pub fn butterworth_coefficients(spec: &FilterSpec, sample_rate: f64) -> Result<FilterCoefficients> {
    spec.validate(sample_rate)?;
    let n = spec.order;
    let fs2 = 2.0 * sample_rate;
    let wc = fs2 * (std::f64::consts::PI * spec.critical_freq / sample_rate).tan();
    let poles: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            let s = Complex64::from_polar(wc, theta);
            (fs2 + s) / (fs2 - s)
        })
        .collect();
    let zeros = vec![Complex64::new(-1.0, 0.0); n];
    let a: Vec<f64> = poly_from_roots(&poles).iter().map(|c| c.re).collect();
    let b_raw: Vec<f64> = poly_from_roots(&zeros).iter().map(|c| c.re).collect();
    let gain = a.iter().sum::<f64>() / b_raw.iter().sum::<f64>();
    Ok(FilterCoefficients {
        b: b_raw.iter().map(|x| x * gain).collect(),
        a,
    })
}

/// Direct-form II transposed pass with initial state `zi`.
fn lfilter(c: &FilterCoefficients, x: &[f64], zi: &[f64]) -> Vec<f64> {
    let order = c.a.len().max(c.b.len()) - 1;
    let coef = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let mut z = zi.to_vec();
    z.resize(order, 0.0);
    let mut y = Vec::with_capacity(x.len());
    for &xn in x {
        let yn = coef(&c.b, 0) * xn + z.first().copied().unwrap_or(0.0);
        for i in 0..order {
            let next = if i + 1 < order { z[i + 1] } else { 0.0 };
            z[i] = coef(&c.b, i + 1) * xn + next - coef(&c.a, i + 1) * yn;
        }
        y.push(yn);
    }
    y
}

/// State that makes a unit-step input start in steady state.
fn steady_state_zi(c: &FilterCoefficients) -> Vec<f64> {
    let order = c.a.len().max(c.b.len()) - 1;
    let coef = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
    let g = c.dc_gain();
    let mut zi = vec![0.0; order];
    let mut acc = 0.0;
    for i in (0..order).rev() {
        acc += coef(&c.b, i + 1) - coef(&c.a, i + 1) * g;
        zi[i] = acc;
    }
    zi
}

/// Applies the filter. Zero-phase mode pads with an odd reflection of
/// `3 * order` samples at each end and starts both passes in steady state.
pub fn filter_apply(samples: &[f64], c: &FilterCoefficients, mode: PhaseMode) -> Vec<f64> {
    if samples.is_empty() {
        return Vec::new();
    }
    match mode {
        PhaseMode::Causal => lfilter(c, samples, &[]),
        PhaseMode::ZeroPhase => {
            let order = c.a.len().max(c.b.len()) - 1;
            let n = samples.len();
            let pad = (3 * order).min(n - 1);
            let (first, last) = (samples[0], samples[n - 1]);
            let mut ext = Vec::with_capacity(n + 2 * pad);
            ext.extend((1..=pad).rev().map(|k| 2.0 * first - samples[k]));
            ext.extend_from_slice(samples);
            ext.extend((1..=pad).map(|k| 2.0 * last - samples[n - 1 - k]));
            let zi = steady_state_zi(c);
            let scaled = |x0: f64| zi.iter().map(|z| z * x0).collect::<Vec<_>>();
            let mut fwd = lfilter(c, &ext, &scaled(ext[0]));
            fwd.reverse();
            let mut bwd = lfilter(c, &fwd, &scaled(fwd[0]));
            bwd.reverse();
            bwd[pad..pad + n].to_vec()
        }
    }
}

/// How the resonator delay is removed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayShift {
    /// Advance by `round(tau * fs)` raw samples before decimation.
    #[default]
    RawSamples,
    /// Advance by `round(tau / target_dt)` bins after decimation.
    Bins,
}

/// Conditioning options for [`condition_record`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conditioning {
    pub filter: Option<FilterSpec>,
    pub target_dt: f64,
    pub tau: f64,
    #[serde(default)]
    pub shift: DelayShift,
}

/// Conditioned trace; `values[j]` is the bin centred at `t0 + j * dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

fn advance(x: &[f64], by: usize) -> Vec<f64> {
    let last = *x.last().expect("non-empty");
    (0..x.len()).map(|k| x.get(k + by).copied().unwrap_or(last)).collect()
}

fn decimation_factor(sample_rate: f64, target_dt: f64) -> Result<usize> {
    let ratio = sample_rate * target_dt;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "target_dt {target_dt:e} s is not a whole number of samples at {sample_rate:e} Sa/s"
        )));
    }
    Ok(k as usize)
}

/// Mean over consecutive bins of `k` samples; a trailing partial bin is dropped.
pub fn decimate(x: &[f64], k: usize) -> Vec<f64> {
    x.chunks_exact(k)
        .map(|c| compensated_sum(c.iter().copied()) / k as f64)
        .collect()
}

/// Filter, remove the delay, decimate, rescale with the record's calibration
/// and clip to `[-1, 1]`.
pub fn condition_record(record: &MeasurementRecord, opts: &Conditioning) -> Result<ZSeries> {
    let cal = record.calibration.ok_or(Error::MissingCalibration)?;
    condition_with(record, opts, &cal)
}

pub fn condition_with(record: &MeasurementRecord, opts: &Conditioning, cal: &Calibration) -> Result<ZSeries> {
    if record.samples.is_empty() {
        return Err(Error::InvalidInput("empty record".into()));
    }
    let k = decimation_factor(record.sample_rate, opts.target_dt)?;
    let filtered = match &opts.filter {
        Some(spec) => {
            let c = butterworth_coefficients(spec, record.sample_rate)?;
            filter_apply(&record.samples, &c, spec.phase_mode)
        }
        None => record.samples.clone(),
    };
    let binned = match opts.shift {
        DelayShift::RawSamples => {
            let by = (opts.tau * record.sample_rate).round() as usize;
            decimate(&advance(&filtered, by), k)
        }
        DelayShift::Bins => {
            let by = (opts.tau / opts.target_dt).round() as usize;
            advance(&decimate(&filtered, k), by)
        }
    };
    let values = binned.iter().map(|&v| cal.rescale(v).clamp(-1.0, 1.0)).collect();
    Ok(ZSeries {
        t0: record.t0 + 0.5 * (k - 1) as f64 / record.sample_rate,
        dt: opts.target_dt,
        values,
    })
}
