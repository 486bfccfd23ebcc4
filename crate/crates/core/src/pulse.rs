//! Square-root raised-cosine pulses and the correlation matrices derived from
//! them.
//!
//! A [`SampledPulse`] is truncated to `±span` Nyquist periods and renormalized to
//! unit energy. Its autocorrelation `(f*f)(t)` is evaluated through the
//! closed-form raised cosine rather than by numerical convolution; the sampled
//! grid is kept for quadrature-based checks.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::CVector;

/// Default truncation, in Nyquist periods on each side of the origin.
pub const DEFAULT_SPAN: usize = 16;

/// Grid points per Nyquist period.
const OVERSAMPLING: usize = 32;

/// Half-width (in units of `t/T`) of the window around a removable singularity
/// inside which the closed-form limit is used.
const SINGULARITY_WINDOW: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseShape {
    /// Square-root raised cosine with the given roll-off in `(0, 1]`.
    Srrc { rolloff: f64 },
    /// Ideal brick-wall pulse, `sinc(t/T)/sqrt(T)`.
    Sinc,
}

#[derive(Clone, Debug)]
pub struct SampledPulse {
    shape: PulseShape,
    nyquist_period: f64,
    span: usize,
    scale: f64,
    grid_step: f64,
    grid: Vec<f64>,
}

/// Builds a truncated, unit-energy SRRC pulse whose autocorrelation is a
/// `nyquist_period`-Nyquist raised cosine.
pub fn make_srrc(nyquist_period: f64, rolloff: f64, span: usize) -> Result<SampledPulse> {
    if !(rolloff > 0.0 && rolloff <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "roll-off must lie in (0, 1], got {rolloff}"
        )));
    }
    SampledPulse::build(PulseShape::Srrc { rolloff }, nyquist_period, span)
}

/// Ideal sinc pulse, used for losslessness reference checks.
pub fn make_sinc(nyquist_period: f64, span: usize) -> Result<SampledPulse> {
    SampledPulse::build(PulseShape::Sinc, nyquist_period, span)
}

impl SampledPulse {
    fn build(shape: PulseShape, nyquist_period: f64, span: usize) -> Result<Self> {
        if !(nyquist_period > 0.0 && nyquist_period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Nyquist period must be positive, got {nyquist_period}"
            )));
        }
        if span < 4 {
            return Err(Error::InvalidParameter(format!(
                "pulse span must be at least 4 periods, got {span}"
            )));
        }
        let mut pulse = SampledPulse {
            shape,
            nyquist_period,
            span,
            scale: 1.0,
            grid_step: nyquist_period / OVERSAMPLING as f64,
            grid: Vec::new(),
        };
        let n = span * OVERSAMPLING;
        let raw: Vec<f64> = (0..=2 * n)
            .map(|i| pulse.eval_untruncated((i as f64 - n as f64) * pulse.grid_step))
            .collect();
        let energy = simpson(raw.iter().map(|v| v * v), pulse.grid_step);
        pulse.scale = 1.0 / energy.sqrt();
        pulse.grid = raw.into_iter().map(|v| v * pulse.scale).collect();
        Ok(pulse)
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    pub fn nyquist_period(&self) -> f64 {
        self.nyquist_period
    }

    /// Roll-off factor; zero for the ideal sinc.
    pub fn rolloff(&self) -> f64 {
        match self.shape {
            PulseShape::Srrc { rolloff } => rolloff,
            PulseShape::Sinc => 0.0,
        }
    }

    pub fn span(&self) -> usize {
        self.span
    }

    /// Half-length of the truncated pulse support, in seconds.
    pub fn support(&self) -> f64 {
        self.span as f64 * self.nyquist_period
    }

    /// Half-length of the support of `(f*f)`, in seconds.
    pub fn correlation_support(&self) -> f64 {
        2.0 * self.support()
    }

    /// Sample spacing of [`Self::grid`].
    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    /// Pulse samples on `t = (i - span*os) * grid_step`, `i = 0..=2*span*os`.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Energy of the sampled grid by Simpson quadrature.
    pub fn grid_energy(&self) -> f64 {
        simpson(self.grid.iter().map(|v| v * v), self.grid_step)
    }

    /// Truncated, renormalized pulse `f(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() > self.support() {
            return 0.0;
        }
        self.scale * self.eval_untruncated(t)
    }

    fn eval_untruncated(&self, t: f64) -> f64 {
        let x = t / self.nyquist_period;
        let amp = 1.0 / self.nyquist_period.sqrt();
        match self.shape {
            PulseShape::Sinc => amp * sinc(x),
            PulseShape::Srrc { rolloff } => amp * srrc_normalized(x, rolloff),
        }
    }

    /// Autocorrelation `(f*f)(t)`: the raised cosine of period `T_beta`,
    /// zero outside the support of the truncated pulse's autocorrelation.
    pub fn autocorrelation(&self, t: f64) -> f64 {
        if t.abs() > self.correlation_support() {
            return 0.0;
        }
        let x = t / self.nyquist_period;
        match self.shape {
            PulseShape::Sinc => sinc(x),
            PulseShape::Srrc { rolloff } => raised_cosine_normalized(x, rolloff),
        }
    }

    /// `|F(j omega)|^2 / T_beta` for the untruncated pulse (peak value 1).
    pub fn power_spectrum(&self, omega: f64) -> f64 {
        let nu = omega.abs() * self.nyquist_period / (2.0 * PI);
        match self.shape {
            PulseShape::Sinc => {
                if nu < 0.5 {
                    1.0
                } else if nu == 0.5 {
                    0.5
                } else {
                    0.0
                }
            }
            PulseShape::Srrc { rolloff } => {
                let lo = (1.0 - rolloff) / 2.0;
                let hi = (1.0 + rolloff) / 2.0;
                if nu <= lo {
                    1.0
                } else if nu < hi {
                    0.5 * (1.0 + (PI / rolloff * (nu - lo)).cos())
                } else {
                    0.0
                }
            }
        }
    }

    /// Angular frequency beyond which the untruncated spectrum vanishes.
    pub fn band_edge(&self) -> f64 {
        (1.0 + self.rolloff()) * PI / self.nyquist_period
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// SRRC with unit period and unit energy.
fn srrc_normalized(x: f64, rho: f64) -> f64 {
    let direct = |x: f64| {
        let num = (PI * x * (1.0 - rho)).sin() + 4.0 * rho * x * (PI * x * (1.0 + rho)).cos();
        let den = PI * x * (1.0 - (4.0 * rho * x).powi(2));
        num / den
    };
    let at_origin = 1.0 - rho + 4.0 * rho / PI;
    let xs = 1.0 / (4.0 * rho);
    let at_quarter = rho / 2f64.sqrt()
        * ((1.0 + 2.0 / PI) * (PI / (4.0 * rho)).sin()
            + (1.0 - 2.0 / PI) * (PI / (4.0 * rho)).cos());
    if let Some(v) = near_singularity(x, 0.0, at_origin, &direct) {
        return v;
    }
    if let Some(v) = near_singularity(x.abs(), xs, at_quarter, &direct) {
        return v;
    }
    direct(x)
}

/// Raised cosine with unit period: `sinc(x) cos(pi rho x) / (1 - (2 rho x)^2)`.
fn raised_cosine_normalized(x: f64, rho: f64) -> f64 {
    let direct = |x: f64| sinc(x) * (PI * rho * x).cos() / (1.0 - (2.0 * rho * x).powi(2));
    let xs = 1.0 / (2.0 * rho);
    let limit = PI / 4.0 * sinc(xs);
    if let Some(v) = near_singularity(x.abs(), xs, limit, &direct) {
        return v;
    }
    direct(x)
}

/// Inside the window around `xs`, interpolate between the analytic limit and the
/// direct formula at the window edge; the error is second order in the window.
fn near_singularity(x: f64, xs: f64, limit: f64, direct: &dyn Fn(f64) -> f64) -> Option<f64> {
    let d = x - xs;
    if d == 0.0 {
        return Some(limit);
    }
    if d.abs() >= SINGULARITY_WINDOW {
        return None;
    }
    let edge = xs + SINGULARITY_WINDOW * d.signum();
    let w = d.abs() / SINGULARITY_WINDOW;
    Some((1.0 - w) * limit + w * direct(edge))
}

/// Composite Simpson rule over uniformly spaced samples (odd count).
pub(crate) fn simpson(values: impl Iterator<Item = f64>, step: f64) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    if n < 3 {
        return v.iter().sum::<f64>() * step;
    }
    let last = if n % 2 == 1 { n - 1 } else { n - 2 };
    let mut acc = v[0] + v[last];
    for (i, val) in v.iter().enumerate().take(last).skip(1) {
        acc += if i % 2 == 1 { 4.0 * val } else { 2.0 * val };
    }
    let mut total = acc * step / 3.0;
    if last != n - 1 {
        total += 0.5 * step * (v[n - 2] + v[n - 1]);
    }
    total
}

/// Temporal correlation matrix `[C]_{r,c} = (f*f)((r-c) T_s)`.
#[derive(Clone, Debug)]
pub struct CorrelationMatrix {
    pub entries: DMatrix<f64>,
    pub sampling_time: f64,
}

impl CorrelationMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::min_eigenvalue(&self.entries)
    }
}

pub fn correlation_matrix(
    pulse: &SampledPulse,
    sampling_time: f64,
    size: usize,
) -> Result<CorrelationMatrix> {
    if size == 0 {
        return Err(Error::InvalidParameter("correlation matrix size must be >= 1".into()));
    }
    if !(sampling_time > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sampling time must be positive, got {sampling_time}"
        )));
    }
    let lags: Vec<f64> = (0..size)
        .map(|k| pulse.autocorrelation(k as f64 * sampling_time))
        .collect();
    let entries = DMatrix::from_fn(size, size, |r, c| lags[r.abs_diff(c)]);
    Ok(CorrelationMatrix {
        entries,
        sampling_time,
    })
}

/// Energy `(1/Z0) x^H C x` of one block of samples fed to one antenna.
pub fn block_energy(samples: &CVector, corr: &CorrelationMatrix, impedance: f64) -> Result<f64> {
    if samples.len() != corr.size() {
        return Err(Error::DimensionMismatch(format!(
            "block of {} samples against a {}x{} correlation matrix",
            samples.len(),
            corr.size(),
            corr.size()
        )));
    }
    let n = samples.len();
    let mut acc = 0.0;
    for r in 0..n {
        let mut row = num_complex::Complex64::new(0.0, 0.0);
        for c in 0..n {
            row += samples[c] * corr.entries[(r, c)];
        }
        acc += (samples[r].conj() * row).re;
    }
    Ok(acc.max(0.0) / impedance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn nyquist_zeros_and_unit_peak() {
        let p = make_srrc(1.0, 0.25, 16).unwrap();
        assert!((p.autocorrelation(0.0) - 1.0).abs() < 1e-6);
        for k in 1..=8 {
            assert!(p.autocorrelation(k as f64).abs() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn unit_energy_and_even_symmetry() {
        let p = make_srrc(2.0, 0.3, 12).unwrap();
        assert!((p.grid_energy() - 1.0).abs() < 1e-6);
        for i in 0..200 {
            let t = 0.137 * i as f64;
            assert_eq!(p.eval(t), p.eval(-t));
        }
    }

    #[test]
    fn removable_singularity_is_continuous() {
        let p = make_srrc(1.0, 1.0, 16).unwrap();
        let at = p.eval(0.25);
        assert!(at.is_finite());
        assert!((p.eval(0.25 - 1e-7) - at).abs() < 1e-5);
        assert!((p.eval(0.25 + 1e-7) - at).abs() < 1e-5);
        // raised-cosine singularity at T/(2 rho)
        let r = make_srrc(1.0, 0.25, 16).unwrap();
        let v = r.autocorrelation(2.0);
        assert!((r.autocorrelation(2.0 + 1e-7) - v).abs() < 1e-6);
        assert!((r.autocorrelation(2.0 - 1e-7) - v).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_srrc(1.0, 0.0, 16).is_err());
        assert!(make_srrc(1.0, 1.2, 16).is_err());
        assert!(make_srrc(0.0, 0.25, 16).is_err());
        assert!(make_srrc(-1.0, 0.25, 16).is_err());
        assert!(make_srrc(1.0, 0.25, 3).is_err());
    }

    #[test]
    fn correlation_at_nyquist_rate_is_identity() {
        let p = make_srrc(1.0, 0.25, 16).unwrap();
        let c = correlation_matrix(&p, 1.0, 6).unwrap();
        let diff = &c.entries - DMatrix::<f64>::identity(6, 6);
        assert!(diff.amax() < 1e-6);
    }

    #[test]
    fn correlation_beyond_support_is_exactly_zero() {
        let p = make_srrc(1.0, 0.25, 4).unwrap();
        let c = correlation_matrix(&p, 0.9, 12).unwrap();
        // 9 * 0.9 = 8.1 > 2 * span
        assert_eq!(c.entries[(9, 0)], 0.0);
        assert_eq!(c.entries[(0, 11)], 0.0);
        assert_ne!(c.entries[(1, 0)], 0.0);
    }

    #[test]
    fn block_energy_examples() {
        let p = make_srrc(1.0, 0.25, 16).unwrap();
        let c = correlation_matrix(&p, 0.8, 4).unwrap();
        let mut e0 = CVector::zeros(4);
        e0[0] = C64::new(1.0, 0.0);
        assert!((block_energy(&e0, &c, 50.0).unwrap() - 0.02).abs() < 1e-8);
        assert_eq!(block_energy(&CVector::zeros(4), &c, 50.0).unwrap(), 0.0);
        assert!(block_energy(&CVector::zeros(3), &c, 50.0).is_err());
    }

    #[test]
    fn spectrum_vanishes_beyond_band_edge() {
        let p = make_srrc(1.0, 0.25, 16).unwrap();
        assert_eq!(p.power_spectrum(p.band_edge() * 1.0001), 0.0);
        assert_eq!(p.power_spectrum(0.0), 1.0);
        // truncated pulse leaks only a little beyond the edge
        let dtft = |omega: f64| {
            let n = p.grid().len() as f64;
            let mut acc = C64::new(0.0, 0.0);
            for (i, v) in p.grid().iter().enumerate() {
                let t = (i as f64 - (n - 1.0) / 2.0) * p.grid_step();
                acc += C64::from_polar(*v, -omega * t);
            }
            (acc * p.grid_step()).norm_sqr() / p.nyquist_period()
        };
        assert!((dtft(0.0) - 1.0).abs() < 1e-2);
        assert!(dtft(1.2 * p.band_edge()) < 1e-3);
        assert!(dtft(2.0 * p.band_edge()) < 1e-3);
    }
}
