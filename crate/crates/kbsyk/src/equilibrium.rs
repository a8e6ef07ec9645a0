//! Thermal SYK Green's functions from the frequency-space Schwinger-Dyson
//! fixed point.
//!
//! The loop iterates, with damped mixing,
//!
//! ```text
//!   A(w)      = -2 Im G_R(w)
//!   n(t)      = \int dw/2pi e^{-iwt} A(w) n_F(w)
//!   Sigma_R(w)= -i J^2 \int_0^inf dt e^{iwt} (n(t)^{q-1} + (n(t)*)^{q-1})
//!   G_R(w)    = 1 / (w - Sigma_R(w))
//! ```
//!
//! and the converged state carries `G^>(w) = -i n_F(-w) A(w)` back to the
//! time domain as pre-quench initial data.

use num_complex::Complex64;

use crate::error::KbError;
use crate::fourier::trapezoid_weight;
use crate::grid::{ContourGreen, TimeLattice, EQUAL_TIME_GREATER};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Internal relative-time resolution of the self-energy transform.
const DT_INTERNAL: f64 = 0.05;

/// Fermi factor `1/(1 + e^{beta w})`, stable for large |beta w|; the
/// `beta = 0` limit is 1/2 for every frequency.
pub fn fermi(beta: f64, omega: f64) -> f64 {
    if beta == 0.0 {
        return 0.5;
    }
    let x = beta * omega;
    if x >= 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumParams {
    /// Inverse temperature; 0 means infinite temperature.
    pub beta: f64,
    pub coupling_j: f64,
    /// Fermion count per interaction vertex; even. 4 is the production case,
    /// 2 has a closed-form spectrum used for validation.
    pub q_body: u32,
    pub omega_max: f64,
    /// Frequency bins (power of two); the grid has `n_omega + 1` points so
    /// that w = 0 sits exactly on a node.
    pub n_omega: usize,
    pub mixing: f64,
    pub tol: f64,
    pub max_iters: usize,
    /// Sampling step of the output `G^>(t)`; must match the two-time lattice
    /// it will seed.
    pub dt_sample: f64,
    /// Half-span of the output time grid.
    pub t_span: f64,
}

impl EquilibriumParams {
    pub fn new(beta: f64, coupling_j: f64, q_body: u32) -> Self {
        let omega_max = if coupling_j > 0.0 { 16.0 * coupling_j } else { 8.0 };
        EquilibriumParams {
            beta,
            coupling_j,
            q_body,
            omega_max,
            n_omega: 4096,
            mixing: 0.3,
            tol: 1e-10,
            max_iters: 4000,
            dt_sample: 0.1,
            t_span: 120.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.beta < 0.0 {
            errs.push(format!("beta must be >= 0, got {}", self.beta));
        }
        if self.coupling_j < 0.0 {
            errs.push(format!("coupling_j must be >= 0, got {}", self.coupling_j));
        }
        if self.q_body % 2 != 0 || self.q_body < 2 {
            errs.push(format!("q_body must be even and >= 2, got {}", self.q_body));
        }
        if !self.n_omega.is_power_of_two() {
            errs.push(format!("n_omega must be a power of two, got {}", self.n_omega));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            errs.push(format!("mixing must be in (0, 1], got {}", self.mixing));
        }
        if !(self.omega_max > 0.0) || !(self.tol > 0.0) || !(self.dt_sample > 0.0) {
            errs.push("omega_max, tol, dt_sample must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(KbError::Config(errs))
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumState {
    pub params: EquilibriumParams,
    /// Symmetric frequency grid with w = 0 at the center node.
    pub omega: Vec<f64>,
    pub g_retarded_omega: Vec<Complex64>,
    /// Spectral function `A(w) = -2 Im G_R(w)`.
    pub spectral: Vec<f64>,
    /// `G^>(t)` on `t = -t_span ..= t_span`, step `dt_sample`, normalized so
    /// the equal-time anticommutator is exact.
    pub g_greater_time: Vec<Complex64>,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
}

impl EquilibriumState {
    pub fn time_index_span(&self) -> usize {
        (self.g_greater_time.len() - 1) / 2
    }

    /// `G^>(k * dt_sample)` by signed index.
    pub fn greater_time_at(&self, k: i64) -> Complex64 {
        let c = self.time_index_span() as i64;
        self.g_greater_time[(c + k) as usize]
    }

    /// Spectral sum rule `(1/2pi) \int A(w) dw`.
    pub fn sum_rule(&self) -> f64 {
        let n = self.omega.len();
        let dw = self.omega[1] - self.omega[0];
        let s: f64 = self
            .spectral
            .iter()
            .enumerate()
            .map(|(k, a)| a * trapezoid_weight(k, n))
            .sum();
        s * dw / (2.0 * std::f64::consts::PI)
    }

    /// Detailed-balance residual of the time-domain output, in the bounded
    /// form `max |n_F(w) G>(w) + n_F(-w) G<(w)| / max |G>(w)|` which avoids
    /// the `e^{beta w}` overflow of the raw ratio. Checked on
    /// `|w| <= omega_max / 2`.
    pub fn kms_residual(&self) -> f64 {
        let g_w = self.greater_omega();
        let n = g_w.len();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..n {
            let w = self.omega[k];
            if w.abs() > 0.5 * self.params.omega_max {
                continue;
            }
            let gtr = g_w[k];
            let lsr = -g_w[n - 1 - k]; // G<(w) = -G>(-w)
            let r = fermi(self.params.beta, w) * gtr + fermi(self.params.beta, -w) * lsr;
            worst = worst.max(r.norm());
            scale = scale.max(gtr.norm());
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }

    /// `G^>(w)` by full-line transform of the stored `G^>(t)`.
    pub fn greater_omega(&self) -> Vec<Complex64> {
        let dt = self.params.dt_sample;
        let t0 = -(self.time_index_span() as f64) * dt;
        self.omega
            .iter()
            .map(|&w| crate::fourier::line_transform(&self.g_greater_time, t0, dt, w))
            .collect()
    }
}

/// Prefactor of the conformal propagator, `4 pi J^2 b^4 = 1`.
pub fn conformal_prefactor(coupling_j: f64) -> f64 {
    (4.0 * std::f64::consts::PI * coupling_j * coupling_j).powf(-0.25)
}

/// Conformal thermal retarded Green's function,
/// `i G_R(t) = 2 b cos(pi/q) (pi / (beta sinh(pi t / beta)))^{2/q}` for
/// `t > 0`; returns the real value of `i G_R(t)` (zero for `t <= 0`).
/// The closed form diverges at `t = 0`; callers regularize by sampling the
/// first node at half a step.
pub fn conformal_seed(beta: f64, coupling_j: f64, q_body: u32, t: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(KbError::Domain(
            "conformal seed undefined at beta = 0; use the Lorentzian seed".into(),
        ));
    }
    if !(coupling_j > 0.0) {
        return Err(KbError::Domain("conformal seed requires J > 0".into()));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let pi = std::f64::consts::PI;
    let b = conformal_prefactor(coupling_j);
    let q = q_body as f64;
    let arg = pi / (beta * (pi * t / beta).sinh());
    Ok(2.0 * b * (pi / q).cos() * arg.powf(2.0 / q))
}

fn internal_time_span(beta: f64) -> f64 {
    150.0f64.max(2.5 * beta + 120.0)
}

/// Self-consistent thermal solve. `J = 0` returns the free state directly
/// (all spectral weight in the w = 0 bin, `G^>(t) = -i/2`).
pub fn solve_equilibrium(params: &EquilibriumParams) -> Result<EquilibriumState> {
    params.validate()?;
    if params.coupling_j == 0.0 {
        return Ok(free_state(params));
    }

    let nw = params.n_omega + 1;
    let dw = 2.0 * params.omega_max / params.n_omega as f64;
    let omega: Vec<f64> = (0..nw).map(|k| -params.omega_max + k as f64 * dw).collect();

    let t_span_int = internal_time_span(params.beta);
    let nt = (t_span_int / DT_INTERNAL).ceil() as usize + 1;
    let times: Vec<f64> = (0..nt).map(|j| j as f64 * DT_INTERNAL).collect();

    let nf: Vec<f64> = omega.iter().map(|&w| fermi(params.beta, w)).collect();
    let j2 = params.coupling_j * params.coupling_j;
    let qm1 = (params.q_body - 1) as i32;

    let mut g_r = seed_retarded(params, &omega)?;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    let mut spectral = vec![0.0; nw];
    for iter in 0..params.max_iters {
        iterations = iter + 1;
        for k in 0..nw {
            spectral[k] = -2.0 * g_r[k].im;
        }
        // occupation-weighted transform to relative time
        let coeffs: Vec<f64> = (0..nw)
            .map(|k| {
                spectral[k] * nf[k] * trapezoid_weight(k, nw) * dw / (2.0 * std::f64::consts::PI)
            })
            .collect();
        let n_t = freq_to_time(&coeffs, &omega, &times);
        let f_t: Vec<Complex64> = n_t
            .iter()
            .map(|n| n.powi(qm1) + n.conj().powi(qm1))
            .collect();
        let sigma = sigma_retarded(&f_t, DT_INTERNAL, &omega, j2);

        let mut residual = 0.0f64;
        for k in 0..nw {
            let g_new = Complex64::new(1.0, 0.0) / (omega[k] - sigma[k]);
            residual = residual.max((g_new - g_r[k]).norm());
            g_r[k] = (1.0 - params.mixing) * g_r[k] + params.mixing * g_new;
        }
        history.push(residual);
        if residual < params.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(KbError::NonConvergence {
            iterations,
            residual: *history.last().unwrap_or(&f64::NAN),
            history,
        });
    }

    for k in 0..nw {
        spectral[k] = -2.0 * g_r[k].im;
    }

    // G^>(w) = -i n_F(-w) A(w), transformed back to the time domain
    let coeffs: Vec<f64> = (0..nw)
        .map(|k| {
            spectral[k] * fermi(params.beta, -omega[k]) * trapezoid_weight(k, nw) * dw
                / (2.0 * std::f64::consts::PI)
        })
        .collect();
    let span = (params.t_span / params.dt_sample).round() as i64;
    let out_times: Vec<f64> = (-span..=span).map(|k| k as f64 * params.dt_sample).collect();
    let mut g_time: Vec<Complex64> = freq_to_time(&coeffs, &omega, &out_times)
        .into_iter()
        .map(|v| -I * v)
        .collect();

    // quadrature leakage rescaled so the equal-time anticommutator is exact
    let center = span as usize;
    let g0 = g_time[center];
    if g0.im < -0.25 {
        let scale = 0.5 / (-g0.im);
        for v in g_time.iter_mut() {
            *v *= scale;
        }
    }
    g_time[center] = EQUAL_TIME_GREATER;

    let final_residual = *history.last().unwrap();
    Ok(EquilibriumState {
        params: params.clone(),
        omega,
        g_retarded_omega: g_r,
        spectral,
        g_greater_time: g_time,
        iterations,
        final_residual,
        residual_history: history,
    })
}

fn seed_retarded(params: &EquilibriumParams, omega: &[f64]) -> Result<Vec<Complex64>> {
    if params.beta > 0.0 && params.q_body == 4 {
        // transform of the conformal closed form; first node regularized at
        // half a step
        let nt = (internal_time_span(params.beta) / DT_INTERNAL).ceil() as usize + 1;
        let g_t: Vec<Complex64> = (0..nt)
            .map(|j| {
                let t = if j == 0 {
                    0.5 * DT_INTERNAL
                } else {
                    j as f64 * DT_INTERNAL
                };
                let v =
                    conformal_seed(params.beta, params.coupling_j, params.q_body, t).unwrap_or(0.0);
                -I * v
            })
            .collect();
        Ok(omega
            .iter()
            .map(|&w| crate::fourier::line_transform(&g_t, 0.0, DT_INTERNAL, w))
            .collect())
    } else {
        // infinite temperature keeps a width of order J
        Ok(omega
            .iter()
            .map(|&w| Complex64::new(1.0, 0.0) / Complex64::new(w, params.coupling_j))
            .collect())
    }
}

/// `sum_k c_k e^{-i w_k t}` for each requested time (real coefficients with
/// the quadrature folded in).
fn freq_to_time(coeffs: &[f64], omega: &[f64], times: &[f64]) -> Vec<Complex64> {
    let dw = omega[1] - omega[0];
    times
        .iter()
        .map(|&t| {
            let mut acc = Complex64::default();
            let step = Complex64::from_polar(1.0, -dw * t);
            let mut phase = Complex64::from_polar(1.0, -omega[0] * t);
            for (k, &c) in coeffs.iter().enumerate() {
                if k > 0 && k % 512 == 0 {
                    phase = Complex64::from_polar(1.0, -omega[k] * t);
                }
                acc += c * phase;
                phase *= step;
            }
            acc
        })
        .collect()
}

/// `Sigma_R(w) = -i J^2 \int_0^inf e^{iwt} F(t) dt` with endpoint-corrected
/// trapezoid quadrature.
fn sigma_retarded(f_t: &[Complex64], dt: f64, omega: &[f64], j2: f64) -> Vec<Complex64> {
    let nt = f_t.len();
    let weighted: Vec<Complex64> = f_t
        .iter()
        .enumerate()
        .map(|(j, v)| v * trapezoid_weight(j, nt))
        .collect();
    let fp0 = (-3.0 * f_t[0] + 4.0 * f_t[1] - f_t[2]) / (2.0 * dt);
    omega
        .iter()
        .map(|&w| {
            let mut acc = Complex64::default();
            let step = Complex64::from_polar(1.0, w * dt);
            let mut phase = Complex64::new(1.0, 0.0);
            for (j, &f) in weighted.iter().enumerate() {
                if j > 0 && j % 512 == 0 {
                    phase = Complex64::from_polar(1.0, w * j as f64 * dt);
                }
                acc += f * phase;
                phase *= step;
            }
            let correction = (Complex64::new(0.0, w) * f_t[0] + fp0) * (dt * dt / 12.0);
            -I * j2 * (acc * dt + correction)
        })
        .collect()
}

fn free_state(params: &EquilibriumParams) -> EquilibriumState {
    let nw = params.n_omega + 1;
    let dw = 2.0 * params.omega_max / params.n_omega as f64;
    let omega: Vec<f64> = (0..nw).map(|k| -params.omega_max + k as f64 * dw).collect();
    let center = nw / 2;
    let mut spectral = vec![0.0; nw];
    spectral[center] = 2.0 * std::f64::consts::PI / dw;
    let g_r: Vec<Complex64> = omega
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            if k == center {
                Complex64::new(0.0, -0.5 * spectral[center])
            } else {
                Complex64::new(1.0 / w, 0.0)
            }
        })
        .collect();
    let span = (params.t_span / params.dt_sample).round() as i64;
    let g_time = vec![EQUAL_TIME_GREATER; (2 * span + 1) as usize];
    EquilibriumState {
        params: params.clone(),
        omega,
        g_retarded_omega: g_r,
        spectral,
        g_greater_time: g_time,
        iterations: 0,
        final_residual: 0.0,
        residual_history: Vec::new(),
    }
}

/// Seed a two-time lattice with the time-translation-invariant equilibrium
/// correlator, `G>(t1,t2) = g>(t1 - t2)`.
pub fn lay_initial_condition(eq: &EquilibriumState, lattice: &TimeLattice) -> Result<ContourGreen> {
    if (eq.params.dt_sample - lattice.delta_t()).abs() > 1e-12 {
        return Err(KbError::Domain(format!(
            "equilibrium sampled at dt = {} cannot seed a lattice with delta_t = {}",
            eq.params.dt_sample,
            lattice.delta_t()
        )));
    }
    let needed = lattice.n_points() as i64 - 1;
    if needed > eq.time_index_span() as i64 {
        return Err(KbError::Domain(format!(
            "equilibrium t_span {} too small for lattice extent {}",
            eq.params.t_span,
            needed as f64 * lattice.delta_t()
        )));
    }
    let n = lattice.n_points();
    let mut g = ContourGreen::from_fn(lattice.clone(), |_, _| Complex64::default());
    for k1 in 0..n {
        for k2 in 0..n {
            g.greater_grid_mut()[[k1, k2]] = eq.greater_time_at(k1 as i64 - k2 as i64);
        }
    }
    g.symmetrize_in_place();
    g.pin_diagonal();
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_prefactor_value() {
        // 4 pi J^2 b^4 = 1 at J = 0.5 gives b = pi^{-1/4}
        let b = conformal_prefactor(0.5);
        assert!((b - std::f64::consts::PI.powf(-0.25)).abs() < 1e-12);
        assert!((b - 0.75113).abs() < 1e-5);
    }

    #[test]
    fn conformal_seed_decays_and_scales() {
        let beta = 2.0;
        let mut prev = f64::INFINITY;
        for k in 1..60 {
            let t = 0.1 * k as f64;
            let v = conformal_seed(beta, 0.5, 4, t).unwrap();
            assert!(v > 0.0 && v < prev, "not monotone at t = {t}");
            prev = v;
        }
        // conformal covariance: seed(beta, t) = lambda^{2/q} seed(lambda beta, lambda t)
        let lambda = 2.0f64;
        for &t in &[0.3, 1.0, 2.7] {
            let lhs = conformal_seed(beta, 0.5, 4, t).unwrap();
            let rhs = lambda.powf(0.5) * conformal_seed(lambda * beta, 0.5, 4, lambda * t).unwrap();
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs());
        }
        assert!(conformal_seed(0.0, 0.5, 4, 1.0).is_err());
    }

    #[test]
    fn free_theory_state() {
        let params = EquilibriumParams::new(1.0, 0.0, 4);
        let st = solve_equilibrium(&params).unwrap();
        assert!((st.sum_rule() - 1.0).abs() < 1e-12);
        for v in &st.g_greater_time {
            assert_eq!(*v, EQUAL_TIME_GREATER);
        }
    }

    #[test]
    fn q2_spectrum_is_semicircle() {
        // q = 2 has the closed-form spectrum A(w) = sqrt(4J^2 - w^2) / J^2,
        // independent of temperature.
        let j = 0.5;
        let mut params = EquilibriumParams::new(1.0, j, 2);
        params.n_omega = 2048;
        params.omega_max = 8.0;
        params.tol = 1e-9;
        let st = solve_equilibrium(&params).unwrap();
        assert!((st.sum_rule() - 1.0).abs() < 1e-3, "sum rule {}", st.sum_rule());
        for (k, &w) in st.omega.iter().enumerate() {
            if w.abs() < 1.8 * j {
                let exact = (4.0 * j * j - w * w).sqrt() / (j * j);
                let got = st.spectral[k];
                assert!(
                    (got - exact).abs() < 0.02 * exact.max(1.0),
                    "w = {w}: {got} vs {exact}"
                );
            }
        }
        // the sqrt band edges make g(t) decay only algebraically, so the
        // finite time window limits the detailed-balance residual here
        assert!(st.kms_residual() < 2e-4, "kms {}", st.kms_residual());
    }

    #[test]
    fn q4_state_sane_and_kms() {
        let mut params = EquilibriumParams::new(1.0, 0.5, 4);
        params.n_omega = 1024;
        params.omega_max = 8.0;
        params.tol = 1e-9;
        let st = solve_equilibrium(&params).unwrap();
        assert!((st.sum_rule() - 1.0).abs() < 1e-3, "sum rule {}", st.sum_rule());
        assert!(st.kms_residual() < 1e-5, "kms {}", st.kms_residual());
        for (k, a) in st.spectral.iter().enumerate() {
            assert!(*a >= -1e-6, "A({}) = {}", st.omega[k], a);
        }
        // residual decreases monotonically once the transient has passed
        let h = &st.residual_history;
        for w in h[10..].windows(2) {
            assert!(w[1] <= w[0] * 1.0001, "residual not monotone: {w:?}");
        }
        assert_eq!(st.greater_time_at(0), EQUAL_TIME_GREATER);
        for k in 1..st.time_index_span() as i64 {
            let a = st.greater_time_at(k);
            let b = st.greater_time_at(-k);
            assert!((a + b.conj()).norm() < 1e-9, "antisymmetry at k = {k}");
        }
    }

    #[test]
    fn infinite_temperature_keeps_finite_width() {
        let mut params = EquilibriumParams::new(0.0, 0.5, 4);
        params.n_omega = 1024;
        params.omega_max = 8.0;
        params.tol = 1e-9;
        let st = solve_equilibrium(&params).unwrap();
        // spectral weight not collapsed into the w = 0 bin
        let center = st.spectral.len() / 2;
        let peak = st.spectral[center];
        let dw = st.omega[1] - st.omega[0];
        assert!(peak * dw / (2.0 * std::f64::consts::PI) < 0.05);
        // half maximum reached at a frequency of order J
        let half = st
            .omega
            .iter()
            .zip(st.spectral.iter())
            .filter(|(w, a)| **w > 0.0 && **a > 0.5 * peak)
            .map(|(w, _)| *w)
            .fold(0.0, f64::max);
        assert!(half > 0.2 && half < 2.0, "half width {half}");
    }

    #[test]
    fn lay_initial_condition_properties() {
        let mut params = EquilibriumParams::new(1.0, 0.5, 4);
        params.n_omega = 1024;
        params.omega_max = 8.0;
        params.tol = 1e-9;
        params.t_span = 30.0;
        let st = solve_equilibrium(&params).unwrap();
        let lattice = TimeLattice::new(0.1, 10.0).unwrap();
        let g = lay_initial_condition(&st, &lattice).unwrap();
        assert_eq!(g.equal_time_residual(), 0.0);
        assert_eq!(g.antisymmetry_residual(), 0.0);
        // time-translation invariance along diagonals
        let v1 = g.greater_at(30, 10);
        let v2 = g.greater_at(130, 110);
        assert!((v1 - v2).norm() < 1e-15);

        let bad = TimeLattice::new(0.2, 10.0).unwrap();
        assert!(lay_initial_condition(&st, &bad).is_err());
        let too_big = TimeLattice::new(0.1, 40.0).unwrap();
        assert!(lay_initial_condition(&st, &too_big).is_err());
    }
}
