use std::f64::consts::PI;

use num_complex::Complex64;

use super::{BreathSignal, DspError};

/// Removes the least-squares straight line.
pub fn detrend(sig: &BreathSignal) -> Result<BreathSignal, DspError> {
    sig.require(2)?;
    let x = sig.samples();
    let n = x.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let x_mean = x.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let dt = i as f64 - t_mean;
        sxy += dt * (v - x_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    let out = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v - x_mean) - slope * (i as f64 - t_mean))
        .collect();
    Ok(sig.with_samples(out))
}

/// One second-order section, `b0 + b1 z^-1 + b2 z^-2 / 1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b[0] + self.b[1] * z1 + self.b[2] * z2) / (1.0 + self.a[0] * z1 + self.a[1] * z2)
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Transposed direct form II over `x` in place, starting from the
    /// steady state reached by a constant input equal to `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let Some(&u) = x.first() else { return };
        let y_ss = self.dc_gain() * u;
        let mut z2 = self.b[2] * u - self.a[1] * y_ss;
        let mut z1 = self.b[1] * u - self.a[0] * y_ss + z2;
        for v in x.iter_mut() {
            let xin = *v;
            let y = self.b[0] * xin + z1;
            z1 = self.b[1] * xin - self.a[0] * y + z2;
            z2 = self.b[2] * xin - self.a[1] * y;
            *v = y;
        }
    }
}

/// Digital Butterworth band-pass as cascaded biquads, designed through the
/// analog low-pass → band-pass transform and the bilinear map.
#[derive(Debug, Clone, PartialEq)]
pub struct BandpassDesign {
    pub order: usize,
    pub low: f64,
    pub high: f64,
    pub sample_rate: f64,
    pub sections: Vec<Biquad>,
}

impl BandpassDesign {
    /// `order` is the low-pass prototype order; the band-pass has twice as
    /// many poles and one biquad per prototype pole.
    pub fn butterworth(order: usize, low: f64, high: f64, fs: f64) -> Result<Self, DspError> {
        let nyquist = fs / 2.0;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(DspError::BadSampleRate(fs));
        }
        if !(low > 0.0 && low < high && high < nyquist) {
            return Err(DspError::BandOutsideNyquist { low, high, nyquist });
        }
        assert!(order > 0, "filter order must be positive");

        // prewarped edges for s = (z - 1) / (z + 1)
        let wl = (PI * low / fs).tan();
        let wh = (PI * high / fs).tan();
        let bw = wh - wl;
        let w0sq = wl * wh;

        let mut analog = Vec::with_capacity(2 * order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let p = Complex64::from_polar(1.0, theta);
            // s^2 - p*bw*s + w0^2 = 0
            let pb = p * bw;
            let disc = (pb * pb - 4.0 * w0sq).sqrt();
            analog.push((pb + disc) / 2.0);
            analog.push((pb - disc) / 2.0);
        }
        let digital: Vec<Complex64> = analog.iter().map(|s| (1.0 + s) / (1.0 - s)).collect();

        let eps = 1e-12;
        let mut denoms: Vec<[f64; 2]> = digital
            .iter()
            .filter(|z| z.im > eps)
            .map(|z| [-2.0 * z.re, z.norm_sqr()])
            .collect();
        let mut reals: Vec<f64> = digital.iter().filter(|z| z.im.abs() <= eps).map(|z| z.re).collect();
        reals.sort_by(f64::total_cmp);
        for pair in reals.chunks(2) {
            match *pair {
                [r1, r2] => denoms.push([-(r1 + r2), r1 * r2]),
                [r] => denoms.push([-r, 0.0]),
                _ => unreachable!(),
            }
        }

        // one zero at z = 1 and one at z = -1 per section
        let mut sections: Vec<Biquad> = denoms
            .into_iter()
            .map(|a| Biquad {
                b: [1.0, 0.0, -1.0],
                a,
            })
            .collect();

        let center = 2.0 * w0sq.sqrt().atan();
        let gain: f64 = sections.iter().map(|s| s.response(center).norm()).product();
        let per_section = gain.recip().powf(1.0 / sections.len() as f64);
        for s in &mut sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(Self {
            order,
            low,
            high,
            sample_rate: fs,
            sections,
        })
    }

    /// Complex frequency response at `freq` Hz for one forward pass.
    pub fn response(&self, freq: f64) -> Complex64 {
        let omega = 2.0 * PI * freq / self.sample_rate;
        self.sections.iter().map(|s| s.response(omega)).product()
    }

    /// Single forward pass, steady-state initialised.
    pub fn filter_in_place(&self, x: &mut [f64]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Forward-backward filtering with one second of odd reflection at each
    /// end, discarded afterwards.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let pad = (self.sample_rate.round() as usize).clamp(1, n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

        self.filter_in_place(&mut ext);
        ext.reverse();
        self.filter_in_place(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase 2nd-order Butterworth band-pass between `low` and `high` Hz.
pub fn bandpass(sig: &BreathSignal, low: f64, high: f64) -> Result<BreathSignal, DspError> {
    sig.require(2)?;
    let design = BandpassDesign::butterworth(2, low, high, sig.sample_rate())?;
    Ok(sig.with_samples(design.filtfilt(sig.samples())))
}
