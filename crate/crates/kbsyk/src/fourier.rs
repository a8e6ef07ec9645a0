//! Trapezoid-weighted Fourier transforms of sampled correlators.
//!
//! All transforms use the convention `F(w) = \int dt e^{i w t} f(t)` and its
//! inverse `f(t) = \int dw/2pi e^{-i w t} F(w)`. Spectra of finite slices are
//! evaluated on zero-padded frequency grids so that the low-frequency limits
//! used by the effective-temperature fits are smoothly interpolated.

use num_complex::Complex64;

/// Re-anchor the running phase every this many steps to stop unit-magnitude
/// drift in the recurrence.
const PHASE_REANCHOR: usize = 512;

/// Trapezoid quadrature weight for index `k` of an `n`-point closed rule.
#[inline]
pub fn trapezoid_weight(k: usize, n: usize) -> f64 {
    if n == 1 {
        1.0
    } else if k == 0 || k == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// `sum_k w_k f_k exp(i w (t0 + k dt))` for one frequency, with trapezoid
/// weights folded in by the caller. Phase handled by recurrence.
fn phased_sum(f: &[Complex64], t0: f64, dt: f64, omega: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let step = Complex64::from_polar(1.0, omega * dt);
    let mut phase = Complex64::from_polar(1.0, omega * t0);
    for (k, &fk) in f.iter().enumerate() {
        if k > 0 && k % PHASE_REANCHOR == 0 {
            phase = Complex64::from_polar(1.0, omega * (t0 + k as f64 * dt));
        }
        acc += fk * phase;
        phase *= step;
    }
    acc
}

/// Trapezoid approximation of `\int_{t0}^{t0+(n-1)dt} e^{i w t} f(t) dt`.
pub fn line_transform(f: &[Complex64], t0: f64, dt: f64, omega: f64) -> Complex64 {
    let n = f.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let weighted: Vec<Complex64> = f
        .iter()
        .enumerate()
        .map(|(k, &v)| v * trapezoid_weight(k, n))
        .collect();
    phased_sum(&weighted, t0, dt, omega) * dt
}

/// Half-line transform `\int_0^T e^{i w t} f(t) dt` with an Euler-Maclaurin
/// endpoint correction at t = 0. The correction removes the O(dt^2) boundary
/// term `(dt^2/12) d/dt[e^{iwt} f]` that dominates the plain trapezoid error
/// for decaying integrands; the t = T term is dropped (f must have decayed).
pub fn half_line_transform_corrected(f: &[Complex64], dt: f64, omega: f64) -> Complex64 {
    let base = line_transform(f, 0.0, dt, omega);
    if f.len() < 3 {
        return base;
    }
    // one-sided second-order derivative of f at t = 0
    let fp0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
    let gp0 = Complex64::new(0.0, omega) * f[0] + fp0;
    base + gp0 * (dt * dt / 12.0)
}

/// Inverse transform `\int dw/2pi e^{-i w t} F(w)` over a uniform symmetric
/// frequency grid, trapezoid weighted.
pub fn inverse_transform(spectrum: &[Complex64], omega0: f64, domega: f64, t: f64) -> Complex64 {
    let n = spectrum.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let weighted: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        .map(|(k, &v)| v * trapezoid_weight(k, n))
        .collect();
    phased_sum(&weighted, omega0, domega, -t) * (domega / (2.0 * std::f64::consts::PI))
}

/// Spectrum of a sampled slice on a zero-padded frequency grid.
///
/// `samples` live at `t_k = t_start + k * step`; the returned grid has
/// `pad * len + 1` equally spaced frequencies, symmetric about zero and
/// extending to the Nyquist limit `pi / step`.
pub struct PaddedSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub fn padded_spectrum(samples: &[Complex64], t_start: f64, step: f64, pad: usize) -> PaddedSpectrum {
    let n = samples.len();
    assert!(n >= 2, "padded_spectrum needs at least two samples");
    let p = pad * n;
    let domega = 2.0 * std::f64::consts::PI / (p as f64 * step);
    let half = p / 2;
    let weighted: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(k, &v)| v * trapezoid_weight(k, n))
        .collect();
    let mut omega = Vec::with_capacity(2 * half + 1);
    let mut values = Vec::with_capacity(2 * half + 1);
    for m in -(half as i64)..=(half as i64) {
        let w = m as f64 * domega;
        omega.push(w);
        values.push(phased_sum(&weighted, t_start, step, w) * step);
    }
    PaddedSpectrum { omega, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn geometric_series_closed_form() {
        // s_k = (-i/2) q0^k with q0 = e^{-i w0 dt}; the trapezoid DFT then has
        // the exact closed form dt * [sum_k q^k - (s_0 + s_{K-1} q^{K-1})/2]
        // with q = e^{i (w - w0) dt}, evaluated here independently.
        let w0 = 1.3;
        let dt = 0.1;
        let k_len = 64;
        let samples: Vec<Complex64> = (0..k_len)
            .map(|k| c(0.0, -0.5) * Complex64::from_polar(1.0, -w0 * k as f64 * dt))
            .collect();
        for &w in &[0.0, 0.7, 1.3, 2.9] {
            let got = line_transform(&samples, 0.0, dt, w);
            let q = Complex64::from_polar(1.0, (w - w0) * dt);
            let amp = c(0.0, -0.5);
            let full: Complex64 = if (q - c(1.0, 0.0)).norm() < 1e-14 {
                amp * k_len as f64
            } else {
                amp * (c(1.0, 0.0) - q.powi(k_len as i32)) / (c(1.0, 0.0) - q)
            };
            let ends = 0.5 * (amp + amp * Complex64::from_polar(1.0, -w0 * (k_len - 1) as f64 * dt)
                * Complex64::from_polar(1.0, w * (k_len - 1) as f64 * dt));
            let expect = (full - ends) * dt;
            assert!((got - expect).norm() < 1e-12, "w={w}: {got} vs {expect}");
        }
    }

    #[test]
    fn corrected_half_line_matches_lorentzian() {
        // f = e^{-a t}: int_0^inf e^{iwt} f = 1/(a - i w)
        let a = 0.8;
        let dt = 0.05;
        let n = 1200; // T = 60, e^{-aT} ~ 1e-21
        let f: Vec<Complex64> = (0..n).map(|k| c((-a * k as f64 * dt).exp(), 0.0)).collect();
        for &w in &[0.0, 0.5, 2.0, 5.0] {
            let got = half_line_transform_corrected(&f, dt, w);
            let expect = c(1.0, 0.0) / c(a, -w);
            // residual error is the O(dt^4) Euler-Maclaurin tail, ~1e-6 at w=5
            assert!(
                (got - expect).norm() < 5e-6,
                "w={w}: got {got}, expect {expect}, err {}",
                (got - expect).norm()
            );
        }
    }

    #[test]
    fn inverse_round_trip() {
        // Gaussian pair: F(w) = exp(-w^2/2) <-> f(t) = exp(-t^2/2)/sqrt(2pi)
        let n = 2048;
        let wmax = 12.0;
        let dw = 2.0 * wmax / n as f64;
        let spectrum: Vec<Complex64> = (0..=n)
            .map(|k| {
                let w = -wmax + k as f64 * dw;
                c((-0.5 * w * w).exp(), 0.0)
            })
            .collect();
        for &t in &[0.0, 0.4, 1.7] {
            let got = inverse_transform(&spectrum, -wmax, dw, t);
            let expect = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!((got.re - expect).abs() < 1e-10 && got.im.abs() < 1e-12);
        }
    }

    #[test]
    fn padded_grid_shape() {
        let samples = vec![c(1.0, 0.0); 10];
        let spec = padded_spectrum(&samples, 0.0, 0.2, 4);
        assert_eq!(spec.omega.len(), 41);
        assert_eq!(spec.omega.len(), spec.values.len());
        // symmetric, uniform, Nyquist at pi/step
        let last = *spec.omega.last().unwrap();
        assert!((last - std::f64::consts::PI / 0.2).abs() < 1e-12);
        assert!((spec.omega[0] + last).abs() < 1e-12);
        let d0 = spec.omega[1] - spec.omega[0];
        for w in spec.omega.windows(2) {
            assert!((w[1] - w[0] - d0).abs() < 1e-12);
        }
    }
}
