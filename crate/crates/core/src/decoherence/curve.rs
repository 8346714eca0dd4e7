use std::io::Write;

use serde::{Deserialize, Serialize};

use super::SpinBath;
use crate::error::{Error, Result};

/// Samples per fit window.
const WINDOW_SAMPLES: usize = 301;
/// The fit window is `[0, WINDOW_SPAN · τ]`.
const WINDOW_SPAN: f64 = 3.0;

/// Envelope `A e^{-t/τ_d}` fitted to an overlap magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub tau_d: f64,
    pub amplitude: f64,
    /// Coefficient of determination over `[0, 3 τ_d]`.
    pub r_squared: f64,
}

/// First `t` with `f(t) <= 1/e`.
fn e_folding_time(f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let target = (-1.0f64).exp();
    let mut hi = 1e-6;
    while f(hi) > target {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::Domain("overlap never falls below 1/e".into()));
        }
    }
    // first crossing on a fine scan, then bisection
    let steps = 1000;
    let mut lo = 0.0;
    for k in 1..=steps {
        let t = hi * k as f64 / steps as f64;
        if f(t) <= target {
            hi = t;
            break;
        }
        lo = t;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Best amplitude and residual sum of squares for a fixed `tau`.
fn sse(samples: &[(f64, f64)], tau: f64) -> (f64, f64) {
    let (mut ye, mut ee) = (0.0, 0.0);
    for &(t, y) in samples {
        let e = (-t / tau).exp();
        ye += y * e;
        ee += e * e;
    }
    let a = ye / ee;
    let s = samples
        .iter()
        .map(|&(t, y)| (y - a * (-t / tau).exp()).powi(2))
        .sum();
    (a, s)
}

fn window(f: &dyn Fn(f64) -> f64, tau: f64) -> Vec<(f64, f64)> {
    let end = WINDOW_SPAN * tau;
    (0..WINDOW_SAMPLES)
        .map(|k| {
            let t = end * k as f64 / (WINDOW_SAMPLES - 1) as f64;
            (t, f(t))
        })
        .collect()
}

/// Least-squares `τ` for a fixed sample window: log-grid scan, then golden
/// section around the best grid point.
fn best_tau(samples: &[(f64, f64)], guess: f64) -> f64 {
    let grid: Vec<f64> = (0..=80).map(|k| guess * 10f64.powf(-1.0 + k as f64 / 40.0)).collect();
    let k = (0..grid.len())
        .min_by(|&a, &b| sse(samples, grid[a]).1.total_cmp(&sse(samples, grid[b]).1))
        .expect("non-empty grid");
    let (mut a, mut b) = (
        grid[k.saturating_sub(1)].ln(),
        grid[(k + 1).min(grid.len() - 1)].ln(),
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if sse(samples, c.exp()).1 < sse(samples, d.exp()).1 {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Fits `A e^{-t/τ}` to `f` over the self-consistent window `[0, 3τ]`.
///
/// Starts from the `1/e` crossing and alternates between fitting inside the
/// current window and resizing the window to the fitted `τ`.
pub fn fit_exponential_envelope(f: &dyn Fn(f64) -> f64) -> Result<DecayFit> {
    let mut tau = e_folding_time(f)?;
    for _ in 0..50 {
        let next = best_tau(&window(f, tau), tau);
        let done = ((next - tau) / tau).abs() < 1e-10;
        tau = next;
        if done {
            break;
        }
    }
    let samples = window(f, tau);
    let (amplitude, residual) = sse(&samples, tau);
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let total: f64 = samples.iter().map(|s| (s.1 - mean).powi(2)).sum();
    Ok(DecayFit {
        tau_d: tau,
        amplitude,
        r_squared: 1.0 - residual / total,
    })
}

/// Overlap magnitude sampled on `[0, 3 τ_fit]` together with the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub samples: Vec<(f64, f64)>,
    pub fit: DecayFit,
}

impl DecayCurve {
    pub fn from_bath(bath: &SpinBath) -> Result<Self> {
        let f = |t: f64| bath.overlap(t).abs();
        let fit = fit_exponential_envelope(&f)?;
        Ok(DecayCurve {
            samples: window(&f, fit.tau_d),
            fit,
        })
    }

    /// Columns `t, overlap, fitted_tau_d`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["t", "overlap", "fitted_tau_d"]).map_err(io)?;
        for &(t, y) in &self.samples {
            w.write_record([t.to_string(), y.to_string(), self.fit.tau_d.to_string()])
                .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }
}
