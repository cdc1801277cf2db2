//! Heterodyne free-induction-decay signal chain.
//!
//! The complex spectral response is `X(f) = i·A(f)` on the profile grid.
//! The detector records `r(t) = Re[e^{iφ0} Σ X_k e^{i2π(f_LO + f_k)t}]` at
//! `t_m = τ + m·dt` with `M·dt = 1/Δf`, so every line lands on one FFT bin
//! and the positive and negative images never overlap. Recovery takes the
//! positive band, removes the constant phase φ0 and the linear phase
//! `2π·f·τ`, and keeps the imaginary part.

use hyperspin_core::spectra::AbsorptionProfile;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Sampled detector trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidTrace {
    /// µs
    pub dt_us: f64,
    /// Real detector samples at `delay_us + m·dt_us`.
    pub samples: Vec<f64>,
    /// MHz
    pub lo_detune_mhz: f64,
    /// Acquisition delay τ, µs.
    pub delay_us: f64,
    /// LO phase φ0, radians.
    pub phase: f64,
    /// Profile grid the trace was built from (kHz).
    pub start_khz: f64,
    pub step_khz: f64,
    pub bins: usize,
    pub width_khz: f64,
}

impl FidTrace {
    pub fn time(&self, m: usize) -> f64 {
        self.delay_us + m as f64 * self.dt_us
    }

    pub fn sample_rate_mhz(&self) -> f64 {
        1.0 / self.dt_us
    }

    /// Magnitude of the complex baseband signal at each sample time.
    pub fn envelope(&self) -> Vec<f64> {
        let n = self.samples.len();
        let mut buf: Vec<Complex64> = self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        // analytic signal: keep positive frequencies, doubled
        for (j, z) in buf.iter_mut().enumerate() {
            if j == 0 || 2 * j > n {
                *z = Complex64::new(0.0, 0.0);
            } else {
                *z *= 2.0;
            }
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|z| z.norm() / n as f64).collect()
    }
}

// Number of samples: power of two with sampling rate above twice the top
// of the shifted band.
fn sample_count(profile: &AbsorptionProfile, lo_mhz: f64) -> Result<(usize, f64, f64)> {
    let df = profile.step_khz * 1e-3;
    let half = profile.values.len() / 2;
    let half_span = half as f64 * df;
    if !(lo_mhz > half_span) {
        return Err(AppError::NyquistViolation(format!(
            "LO detuning {lo_mhz} MHz must exceed the half spectral span {half_span} MHz"
        )));
    }
    let lo_bins = lo_mhz / df;
    if (lo_bins - lo_bins.round()).abs() > 1e-6 * lo_bins.max(1.0) {
        return Err(AppError::Config(format!(
            "LO detuning {lo_mhz} MHz must be a multiple of the profile step {df} MHz"
        )));
    }
    let needed = 2 * (lo_bins.round() as usize + half) + 1;
    Ok((needed.next_power_of_two(), df, lo_bins.round()))
}

/// Detector trace of `profile` with the default sampling rate.
pub fn fid_trace(profile: &AbsorptionProfile, lo_detune_mhz: f64, delay_us: f64, phase: f64) -> Result<FidTrace> {
    let (m, df, _) = sample_count(profile, lo_detune_mhz)?;
    fid_trace_sampled(profile, lo_detune_mhz, delay_us, phase, m as f64 * df)
}

/// Detector trace with an explicit sampling rate. The rate must be an
/// integer multiple of the profile step.
pub fn fid_trace_sampled(
    profile: &AbsorptionProfile,
    lo_detune_mhz: f64,
    delay_us: f64,
    phase: f64,
    sample_rate_mhz: f64,
) -> Result<FidTrace> {
    let (_, df, lo_bins) = sample_count(profile, lo_detune_mhz)?;
    let half = profile.values.len() / 2;
    let top = lo_detune_mhz + half as f64 * df;
    if !(sample_rate_mhz > 2.0 * top) {
        return Err(AppError::NyquistViolation(format!(
            "sampling rate {sample_rate_mhz} MHz must exceed 2 × {top} MHz"
        )));
    }
    let m_f = sample_rate_mhz / df;
    if (m_f - m_f.round()).abs() > 1e-6 * m_f {
        return Err(AppError::Config("sampling rate must be a multiple of the profile step".into()));
    }
    let m = m_f.round() as usize;
    let dt = 1.0 / sample_rate_mhz;
    // place X_k = i·A_k e^{iφ0} e^{i2πFτ} on bin F/Δf, then inverse FFT
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (k, a) in profile.values.iter().enumerate() {
        let bin = lo_bins as i64 - half as i64 + k as i64;
        let f = bin as f64 * df;
        let rot = Complex64::from_polar(1.0, phase + 2.0 * std::f64::consts::PI * f * delay_us);
        buf[bin as usize] += Complex64::new(0.0, *a) * rot;
    }
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    Ok(FidTrace {
        dt_us: dt,
        samples: buf.iter().map(|z| z.re).collect(),
        lo_detune_mhz,
        delay_us,
        phase,
        start_khz: profile.start_khz,
        step_khz: profile.step_khz,
        bins: profile.values.len(),
        width_khz: profile.width_khz,
    })
}

/// Phase-corrected absorption spectrum of a trace.
pub fn recover_spectrum(trace: &FidTrace, phi0: f64, tau_us: f64) -> Result<AbsorptionProfile> {
    let m = trace.samples.len();
    let df = trace.step_khz * 1e-3;
    let fs = 1.0 / trace.dt_us;
    if (fs / df - m as f64).abs() > 1e-6 * m as f64 {
        return Err(AppError::Config("trace length does not match its profile grid".into()));
    }
    let lo_bins = (trace.lo_detune_mhz / df).round() as i64;
    let half = (trace.bins / 2) as i64;
    if lo_bins - half <= 0 || 2 * (lo_bins + half) >= m as i64 {
        return Err(AppError::NyquistViolation("trace band does not fit below Nyquist".into()));
    }
    let mut buf: Vec<Complex64> = trace.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let values = (0..trace.bins)
        .map(|k| {
            let bin = lo_bins - half + k as i64;
            let f = bin as f64 * df;
            let rot = Complex64::from_polar(1.0, -(phi0 + 2.0 * std::f64::consts::PI * f * tau_us));
            (buf[bin as usize] * rot * (2.0 / m as f64)).im
        })
        .collect();
    Ok(AbsorptionProfile {
        start_khz: trace.start_khz,
        step_khz: trace.step_khz,
        values,
        width_khz: trace.width_khz,
    })
}

/// RMS difference of two profiles on the same grid.
pub fn rms_difference(a: &AbsorptionProfile, b: &AbsorptionProfile) -> f64 {
    let n = a.values.len().min(b.values.len()).max(1);
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y) * (x - y)).sum();
    (s / n as f64).sqrt()
}
