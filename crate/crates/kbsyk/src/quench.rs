//! Kadanoff-Baym evolution of an SYK system coupled at t = 0 to one or two
//! SYK thermal baths.
//!
//! The two equations of motion,
//!
//! ```text
//!   +i d/dt1 G>(t1,t2) = \int dt3 [ Sigma_R(t1,t3) G>(t3,t2) + Sigma>(t1,t3) G_A(t3,t2) ]
//!   -i d/dt2 G>(t1,t2) = \int dt3 [ G_R(t1,t3) Sigma>(t3,t2) + G>(t1,t3) Sigma_A(t3,t2) ]
//! ```
//!
//! are iterated as a whole-grid fixed point: every sweep rebuilds the
//! self-energies from the previous grid, integrates both derivative fields
//! from the held pre-quench quadrant with trapezoid steps, averages the two
//! reconstructions, and applies a damped update followed by diagonal pinning
//! and symmetrization. Memory integrals are evaluated as matrix products
//! with trapezoid weights folded into the contracted index; the theta
//! factors inside the retarded/advanced grids (with `theta(0) = 1/2`)
//! reproduce the per-subintegral trapezoid endpoint weights exactly.

use ndarray::linalg::general_mat_mul;
use ndarray::Array2;
use num_complex::Complex64;

use crate::equilibrium::{lay_initial_condition, solve_equilibrium, EquilibriumParams, EquilibriumState};
use crate::error::KbError;
use crate::grid::{advanced_grid, retarded_grid, ContourGreen, TimeLattice};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(-1)^{(n+1)/2}` for odd n: +1 for n = 3, -1 for n = 1.
pub fn bath_power_sign(n_bath: u32) -> f64 {
    if ((n_bath + 1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An SYK bath held in its own thermal state. At leading large-N order the
/// system does not act back on the bath, so the bath correlator is frozen.
#[derive(Debug, Clone)]
pub struct BathSpec {
    pub beta_bath: f64,
    pub coupling_v: f64,
    /// Number of bath fermions in the coupling vertex (odd; 1 or 3).
    pub n_bath: u32,
    pub bath_green: ContourGreen,
}

impl BathSpec {
    pub fn from_equilibrium(
        eq: &EquilibriumState,
        coupling_v: f64,
        n_bath: u32,
        lattice: &TimeLattice,
    ) -> Result<Self> {
        if coupling_v < 0.0 {
            return Err(KbError::Domain(format!("coupling_v must be >= 0, got {coupling_v}")));
        }
        if n_bath % 2 == 0 {
            return Err(KbError::Domain(format!("n_bath must be odd, got {n_bath}")));
        }
        Ok(BathSpec {
            beta_bath: eq.params.beta,
            coupling_v,
            n_bath,
            bath_green: lay_initial_condition(eq, lattice)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct QuenchConfig {
    /// System parameters; `beta` is the initial temperature.
    pub system: EquilibriumParams,
    /// Zero baths means an isolated system; at most two.
    pub baths: Vec<BathSpec>,
    pub lattice: TimeLattice,
    pub fp_tol: f64,
    pub fp_max_sweeps: usize,
    /// Damping of the fixed-point update; halved automatically when a sweep
    /// produces NaN or overflow.
    pub eta: f64,
}

impl QuenchConfig {
    pub fn new(system: EquilibriumParams, baths: Vec<BathSpec>, lattice: TimeLattice) -> Self {
        QuenchConfig {
            system,
            baths,
            lattice,
            fp_tol: 1e-8,
            fp_max_sweeps: 4000,
            eta: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(KbError::Config(mut e)) = self.system.validate() {
            errs.append(&mut e);
        }
        if self.system.q_body != 4 {
            errs.push(format!(
                "quench evolution implements the q = 4 self-energy; got q = {}",
                self.system.q_body
            ));
        }
        if self.baths.len() > 2 {
            errs.push(format!("at most two baths supported, got {}", self.baths.len()));
        }
        for (i, b) in self.baths.iter().enumerate() {
            if b.bath_green.lattice() != &self.lattice {
                errs.push(format!("bath {i} lives on a different lattice"));
            }
        }
        if (self.system.dt_sample - self.lattice.delta_t()).abs() > 1e-12 {
            errs.push("system dt_sample must equal lattice delta_t".into());
        }
        if !(self.fp_tol > 0.0) || !(self.eta > 0.0 && self.eta <= 1.0) {
            errs.push("fp_tol must be positive and eta in (0, 1]".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(KbError::Config(errs))
        }
    }
}

/// Both self-energy components at a single lattice point,
/// `Sigma^≷ = -J^2 (G^≷)^3 - sum_baths V^2 (-1)^{(n+1)/2} theta(t1) theta(t2) (G_psi^≷)^n`.
pub fn assemble_self_energy(
    g_chi: &ContourGreen,
    cfg: &QuenchConfig,
    t1: f64,
    t2: f64,
) -> Result<(Complex64, Complex64)> {
    let k1 = cfg.lattice.index_of(t1)?;
    let k2 = cfg.lattice.index_of(t2)?;
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let g = g_chi.greater_at(k1, k2);
    let l = g_chi.lesser_at(k1, k2);
    let mut sg = -j2 * g * g * g;
    let mut sl = -j2 * l * l * l;
    let th = theta_quench(&cfg.lattice, k1) * theta_quench(&cfg.lattice, k2);
    if th > 0.0 {
        for bath in &cfg.baths {
            let v2 = bath.coupling_v * bath.coupling_v;
            let sign = bath_power_sign(bath.n_bath);
            let bg = bath.bath_green.greater_at(k1, k2).powu(bath.n_bath);
            let bl = bath.bath_green.lesser_at(k1, k2).powu(bath.n_bath);
            sg -= v2 * sign * th * bg;
            sl -= v2 * sign * th * bl;
        }
    }
    Ok((sg, sl))
}

/// `theta(t_k)` with the midpoint convention at the quench time.
#[inline]
fn theta_quench(lattice: &TimeLattice, k: usize) -> f64 {
    let k0 = lattice.quench_index();
    if k > k0 {
        1.0
    } else if k == k0 {
        0.5
    } else {
        0.0
    }
}

/// Precomputed bath contributions to `Sigma^>`; frozen across sweeps.
fn bath_sigma_grid(cfg: &QuenchConfig) -> Array2<Complex64> {
    let n = cfg.lattice.n_points();
    let mut out = Array2::from_elem((n, n), ZERO);
    for bath in &cfg.baths {
        let v2 = bath.coupling_v * bath.coupling_v;
        if v2 == 0.0 {
            continue;
        }
        let sign = bath_power_sign(bath.n_bath);
        let gb = bath.bath_green.greater_grid();
        for i in 0..n {
            let ti = theta_quench(&cfg.lattice, i);
            if ti == 0.0 {
                continue;
            }
            for j in 0..n {
                let th = ti * theta_quench(&cfg.lattice, j);
                if th > 0.0 {
                    out[[i, j]] -= v2 * sign * th * gb[[i, j]].powu(bath.n_bath);
                }
            }
        }
    }
    out
}

/// Trapezoid weights (including `delta_t`) over the full window.
pub(crate) fn window_weights(lattice: &TimeLattice) -> Vec<f64> {
    let n = lattice.n_points();
    (0..n)
        .map(|k| crate::fourier::trapezoid_weight(k, n) * lattice.delta_t())
        .collect()
}

fn col_scaled(src: &Array2<Complex64>, w: &[f64]) -> Array2<Complex64> {
    let mut out = src.clone();
    col_scale_in_place(&mut out, w);
    out
}

fn col_scale_in_place(a: &mut Array2<Complex64>, w: &[f64]) {
    for mut row in a.rows_mut() {
        for (v, &wk) in row.iter_mut().zip(w.iter()) {
            *v *= wk;
        }
    }
}

/// Derivative fields implied by the two equations of motion:
/// `D1 = d/dt1 G>` and `D2 = d/dt2 G>` evaluated from the memory integrals
/// of the current grid.
fn derivative_fields(
    g: &Array2<Complex64>,
    bath_gtr: &Array2<Complex64>,
    j2: f64,
    weights: &[f64],
) -> (Array2<Complex64>, Array2<Complex64>) {
    let n = g.nrows();
    let mut sigma_gtr = Array2::from_elem((n, n), ZERO);
    ndarray::Zip::from(&mut sigma_gtr)
        .and(g)
        .and(bath_gtr)
        .for_each(|s, &gv, &bv| *s = -j2 * gv * gv * gv + bv);

    let sigma_r = retarded_grid(&sigma_gtr);
    let sigma_a = advanced_grid(&sigma_gtr);
    let g_r = retarded_grid(g);
    let g_a = advanced_grid(g);

    // fold the quadrature into the contracted index of each left factor
    let sigma_r_w = col_scaled(&sigma_r, weights);
    let sigma_gtr_w = col_scaled(&sigma_gtr, weights);
    let g_r_w = col_scaled(&g_r, weights);
    let g_w = col_scaled(g, weights);

    let mut i1 = Array2::from_elem((n, n), ZERO);
    general_mat_mul(ONE, &sigma_r_w, g, ZERO, &mut i1);
    general_mat_mul(ONE, &sigma_gtr_w, &g_a, ONE, &mut i1);
    let mut i2 = Array2::from_elem((n, n), ZERO);
    general_mat_mul(ONE, &g_r_w, &sigma_gtr, ZERO, &mut i2);
    general_mat_mul(ONE, &g_w, &sigma_a, ONE, &mut i2);

    i1.mapv_inplace(|v| -I * v);
    i2.mapv_inplace(|v| I * v);
    (i1, i2)
}

/// Local difference update: one trapezoid step from the previous sweep's
/// neighbor toward the t1 = 0 row / t2 = 0 column anchors; the quadrant
/// t1,t2 > 0 averages the two routes. Information propagates one cell per
/// sweep, which keeps the iteration stable at large windows where a
/// whole-window reconstruction would amplify the update.
pub(crate) fn march_update(
    g: &Array2<Complex64>,
    d1: &Array2<Complex64>,
    d2: &Array2<Complex64>,
    k0: usize,
    dt: f64,
    g_new: &mut Array2<Complex64>,
) {
    let n = g.nrows();
    g_new.assign(g);
    for i in k0 + 1..n {
        for j in 0..n {
            g_new[[i, j]] = g[[i - 1, j]] + 0.5 * dt * (d1[[i - 1, j]] + d1[[i, j]]);
        }
    }
    for j in k0 + 1..n {
        for i in 0..n {
            let cand2 = g[[i, j - 1]] + 0.5 * dt * (d2[[i, j - 1]] + d2[[i, j]]);
            if i > k0 {
                g_new[[i, j]] = 0.5 * (g_new[[i, j]] + cand2);
            } else {
                g_new[[i, j]] = cand2;
            }
        }
    }
}

/// Defect of the discretized equations of motion at every evolved lattice
/// point (`t1 > 0` or `t2 > 0`): the larger of the two equation residuals,
/// comparing central finite differences (one-sided second order at the
/// window edges) against the trapezoid memory integrals. The held pre-quench
/// quadrant is reported as zero.
pub fn kb_residual(g_chi: &ContourGreen, cfg: &QuenchConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    let n = cfg.lattice.n_points();
    let k0 = cfg.lattice.quench_index();
    let dt = cfg.lattice.delta_t();
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let bath_gtr = bath_sigma_grid(cfg);
    let weights = window_weights(&cfg.lattice);
    let g = g_chi.greater_grid();
    let (d1, d2) = derivative_fields(g, &bath_gtr, j2, &weights);

    let diff = |a: Complex64, b: Complex64| (a - b) / (2.0 * dt);
    let mut res = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i <= k0 && j <= k0 {
                continue;
            }
            // d/dt1 at fixed t2
            let num1 = if i == 0 {
                (-3.0 * g[[0, j]] + 4.0 * g[[1, j]] - g[[2, j]]) / (2.0 * dt)
            } else if i == n - 1 {
                (3.0 * g[[n - 1, j]] - 4.0 * g[[n - 2, j]] + g[[n - 3, j]]) / (2.0 * dt)
            } else {
                diff(g[[i + 1, j]], g[[i - 1, j]])
            };
            let num2 = if j == 0 {
                (-3.0 * g[[i, 0]] + 4.0 * g[[i, 1]] - g[[i, 2]]) / (2.0 * dt)
            } else if j == n - 1 {
                (3.0 * g[[i, n - 1]] - 4.0 * g[[i, n - 2]] + g[[i, n - 3]]) / (2.0 * dt)
            } else {
                diff(g[[i, j + 1]], g[[i, j - 1]])
            };
            let r1 = (num1 - d1[[i, j]]).norm();
            let r2 = (num2 - d2[[i, j]]).norm();
            res[[i, j]] = r1.max(r2);
        }
    }
    Ok(res)
}

/// Outcome of a fixed-point evolution with its convergence diagnostics.
#[derive(Debug, Clone)]
pub struct QuenchRun {
    pub green: ContourGreen,
    pub sweeps: usize,
    pub final_update: f64,
    pub update_history: Vec<f64>,
    pub eta_used: f64,
    /// Largest diagonal drift removed by pinning during the final sweep.
    pub diagonal_drift: f64,
}

/// Full pipeline: thermal solve of the system state, equilibrium layout,
/// then the whole-grid fixed point.
pub fn evolve_quench(cfg: &QuenchConfig) -> Result<ContourGreen> {
    Ok(evolve_quench_detailed(cfg)?.green)
}

pub fn evolve_quench_detailed(cfg: &QuenchConfig) -> Result<QuenchRun> {
    cfg.validate()?;
    let eq = solve_equilibrium(&cfg.system)?;
    let g0 = lay_initial_condition(&eq, &cfg.lattice)?;
    evolve_from_initial(cfg, g0)
}

/// Fixed-point iteration from a caller-supplied initial grid (used by scans
/// that reuse one equilibrium solve across many couplings).
pub fn evolve_from_initial(cfg: &QuenchConfig, initial: ContourGreen) -> Result<QuenchRun> {
    cfg.validate()?;
    if initial.lattice() != &cfg.lattice {
        return Err(KbError::Domain("initial grid lattice mismatch".into()));
    }
    let n = cfg.lattice.n_points();
    let k0 = cfg.lattice.quench_index();
    let dt = cfg.lattice.delta_t();
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let bath_gtr = bath_sigma_grid(cfg);
    let weights = window_weights(&cfg.lattice);

    let mut green = initial;
    green.symmetrize_in_place();
    green.pin_diagonal();

    let mut eta = cfg.eta;
    let mut history = Vec::new();
    let mut diagonal_drift;
    let mut sweeps = 0;

    let mut g_new = Array2::from_elem((n, n), ZERO);
    while sweeps < cfg.fp_max_sweeps {
        sweeps += 1;
        let backup = green.clone();
        let g = green.greater_grid();
        let (d1, d2) = derivative_fields(g, &bath_gtr, j2, &weights);

        march_update(g, &d1, &d2, k0, dt, &mut g_new);

        // the pinned equal-time diagonal keeps an O(dt^2) static mismatch
        // with the trapezoid reconstruction; it is excluded from the update
        // norm and reported separately as the diagonal drift
        let mut norm = 0.0f64;
        let mut diag_mismatch = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i > k0 || j > k0 {
                    let d = (g_new[[i, j]] - g[[i, j]]).norm();
                    if i == j {
                        diag_mismatch = diag_mismatch.max(d);
                    } else {
                        norm = norm.max(d);
                    }
                }
            }
        }

        if !norm.is_finite() {
            eta *= 0.5;
            if eta < 1e-3 {
                return Err(KbError::Divergence { eta });
            }
            green = backup;
            continue;
        }
        history.push(norm);

        let mut post_amp = 0.0f64;
        {
            let gm = green.greater_grid_mut();
            for i in 0..n {
                for j in 0..n {
                    if i > k0 || j > k0 {
                        let cur = gm[[i, j]];
                        let next = cur + eta * (g_new[[i, j]] - cur);
                        gm[[i, j]] = next;
                        post_amp = post_amp.max(next.norm());
                    }
                }
            }
        }
        if !post_amp.is_finite() || post_amp > 4.0 {
            eta *= 0.5;
            if eta < 1e-3 {
                return Err(KbError::Divergence { eta });
            }
            green = backup;
            continue;
        }
        diagonal_drift = diag_mismatch;
        green.pin_diagonal();
        green.symmetrize_in_place();

        if norm < cfg.fp_tol {
            return Ok(QuenchRun {
                green,
                sweeps,
                final_update: norm,
                update_history: history,
                eta_used: eta,
                diagonal_drift,
            });
        }
    }
    Err(KbError::NonConvergence {
        iterations: sweeps,
        residual: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

/// Causal two-time predictor-corrector, the cross-check mode for the
/// whole-grid fixed point. Marches row by row above the quench, filling the
/// mirrored column by antisymmetry after each row.
pub fn evolve_quench_stepped(cfg: &QuenchConfig) -> Result<ContourGreen> {
    cfg.validate()?;
    let eq = solve_equilibrium(&cfg.system)?;
    let g0 = lay_initial_condition(&eq, &cfg.lattice)?;
    evolve_stepped_from_initial(cfg, g0)
}

pub fn evolve_stepped_from_initial(cfg: &QuenchConfig, initial: ContourGreen) -> Result<ContourGreen> {
    let n = cfg.lattice.n_points();
    let k0 = cfg.lattice.quench_index();
    let dt = cfg.lattice.delta_t();
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let bath_gtr = bath_sigma_grid(cfg);
    let weights = window_weights(&cfg.lattice);

    let mut green = initial;
    green.symmetrize_in_place();
    green.pin_diagonal();

    let mut sigma = Array2::from_elem((n, n), ZERO);
    let update_sigma_row = |sigma: &mut Array2<Complex64>, g: &Array2<Complex64>, i: usize| {
        for j in 0..n {
            let gv = g[[i, j]];
            sigma[[i, j]] = -j2 * gv * gv * gv + bath_gtr[[i, j]];
            let gw = g[[j, i]];
            sigma[[j, i]] = -j2 * gw * gw * gw + bath_gtr[[j, i]];
        }
    };
    {
        let g = green.greater_grid();
        for i in 0..n {
            for j in 0..n {
                let gv = g[[i, j]];
                sigma[[i, j]] = -j2 * gv * gv * gv + bath_gtr[[i, j]];
            }
        }
    }

    // D1[i,j] = -i sum_k w_k [Sigma_R(i,k) G>(k,j) + Sigma>(i,k) G_A(k,j)]
    let d1_row = |g: &Array2<Complex64>, sigma: &Array2<Complex64>, i: usize, j: usize| {
        let mut acc = ZERO;
        for k in 0..n {
            let th_ik = crate::grid::theta_step(i, k);
            let sig_r = th_ik * (sigma[[i, k]] + sigma[[k, i]]);
            let g_a = -crate::grid::theta_step(j, k) * (g[[j, k]] + g[[k, j]]);
            acc += weights[k] * (sig_r * g[[k, j]] + sigma[[i, k]] * g_a);
        }
        -I * acc
    };

    for m in k0 + 1..n {
        // predictor: Euler from row m-1
        let prev: Vec<Complex64> = (0..m)
            .map(|j| {
                let g = green.greater_grid();
                g[[m - 1, j]] + dt * d1_row(g, &sigma, m - 1, j)
            })
            .collect();
        {
            let gm = green.greater_grid_mut();
            for (j, v) in prev.iter().enumerate() {
                gm[[m, j]] = *v;
                gm[[j, m]] = -v.conj();
            }
            gm[[m, m]] = crate::grid::EQUAL_TIME_GREATER;
        }
        update_sigma_row(&mut sigma, green.greater_grid(), m);
        // two corrector passes with the trapezoid step
        for _ in 0..2 {
            let corrected: Vec<Complex64> = (0..m)
                .map(|j| {
                    let g = green.greater_grid();
                    g[[m - 1, j]]
                        + 0.5 * dt * (d1_row(g, &sigma, m - 1, j) + d1_row(g, &sigma, m, j))
                })
                .collect();
            let gm = green.greater_grid_mut();
            for (j, v) in corrected.iter().enumerate() {
                gm[[m, j]] = *v;
                gm[[j, m]] = -v.conj();
            }
            gm[[m, m]] = crate::grid::EQUAL_TIME_GREATER;
            update_sigma_row(&mut sigma, green.greater_grid(), m);
        }
    }
    Ok(green)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EQUAL_TIME_GREATER;

    fn eq_params(beta: f64, j: f64, lattice: &TimeLattice) -> EquilibriumParams {
        let mut p = EquilibriumParams::new(beta, j, 4);
        p.n_omega = 1024;
        p.omega_max = 8.0;
        p.tol = 1e-9;
        p.dt_sample = lattice.delta_t();
        p.t_span = 2.0 * lattice.lambda_t() + 1.0;
        p
    }

    #[test]
    fn bath_sign_values() {
        assert_eq!(bath_power_sign(3), 1.0);
        assert_eq!(bath_power_sign(1), -1.0);
        assert_eq!(bath_power_sign(5), -1.0);
    }

    #[test]
    fn self_energy_isolated_and_gated() {
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let sys = eq_params(1.0, 0.5, &lattice);
        let bath_eq = solve_equilibrium(&eq_params(0.5, 0.5, &lattice)).unwrap();
        let bath = BathSpec::from_equilibrium(&bath_eq, 0.4, 3, &lattice).unwrap();
        let cfg = QuenchConfig::new(sys.clone(), vec![bath], lattice.clone());
        let eq = solve_equilibrium(&sys).unwrap();
        let g = lay_initial_condition(&eq, &lattice).unwrap();

        // pre-quench arguments: bath term exactly zero regardless of V
        let (sg, _) = assemble_self_energy(&g, &cfg, -1.0, 2.0).unwrap();
        let gv = g.derive_components(-1.0, 2.0).unwrap().greater;
        let expect = -0.25 * gv * gv * gv;
        assert!((sg - expect).norm() < 1e-15);

        // V = 0 config: pure -J^2 G^3 at any point
        let mut cfg0 = cfg.clone();
        cfg0.baths.clear();
        let (sg0, sl0) = assemble_self_energy(&g, &cfg0, 1.0, 1.0).unwrap();
        let c = g.derive_components(1.0, 1.0).unwrap();
        assert!((sg0 + 0.25 * c.greater * c.greater * c.greater).norm() < 1e-15);
        assert!((sl0 + 0.25 * c.lesser * c.lesser * c.lesser).norm() < 1e-15);
    }

    #[test]
    fn self_energy_pointwise_oracle() {
        // independent scalar evaluation of the full formula at one point,
        // using raw grid values only
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let sys = eq_params(2.4, 0.5, &lattice);
        let bath_eq = solve_equilibrium(&eq_params(0.5, 0.5, &lattice)).unwrap();
        let bath = BathSpec::from_equilibrium(&bath_eq, 0.525, 3, &lattice).unwrap();
        let cfg = QuenchConfig::new(sys.clone(), vec![bath.clone()], lattice.clone());
        let eq = solve_equilibrium(&sys).unwrap();
        let g = lay_initial_condition(&eq, &lattice).unwrap();

        let (t1, t2) = (1.0, 1.0);
        let k1 = lattice.index_of(t1).unwrap();
        let k2 = lattice.index_of(t2).unwrap();
        let gc = g.greater_grid()[[k1, k2]];
        let gpsi = bath.bath_green.greater_grid()[[k1, k2]];
        let oracle = Complex64::new(-0.25, 0.0) * gc * gc * gc
            - Complex64::new(0.525 * 0.525, 0.0) * gpsi * gpsi * gpsi;
        let (sg, _) = assemble_self_energy(&g, &cfg, t1, t2).unwrap();
        assert!((sg - oracle).norm() < 1e-14, "{sg} vs {oracle}");
    }

    #[test]
    fn residual_zero_for_free_theory() {
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let mut sys = eq_params(1.0, 0.0, &lattice);
        sys.coupling_j = 0.0;
        let cfg = QuenchConfig::new(sys, vec![], lattice.clone());
        let g = ContourGreen::free(lattice);
        let res = kb_residual(&g, &cfg).unwrap();
        let max = res.iter().fold(0.0f64, |a, &b| a.max(b));
        assert_eq!(max, 0.0);
    }

    #[test]
    fn equilibrium_residual_second_order() {
        // The isolated equilibrium state solves the equations of motion up to
        // discretization; halving dt must shrink the defect by roughly 4.
        // Measured over the post-quench quadrant, where a full window of
        // memory history is available; points with t1 or t2 near the window
        // bottom carry a dt-independent truncation error instead.
        let j = 0.5;
        let run = |dt: f64| {
            let lattice = TimeLattice::new(dt, 10.0).unwrap();
            let mut sys = eq_params(0.5, j, &lattice);
            sys.n_omega = 2048;
            let cfg = QuenchConfig::new(sys.clone(), vec![], lattice.clone());
            let eq = solve_equilibrium(&sys).unwrap();
            let g = lay_initial_condition(&eq, &lattice).unwrap();
            let res = kb_residual(&g, &cfg).unwrap();
            let n = lattice.n_points();
            let k0 = lattice.quench_index();
            let mut max = 0.0f64;
            for i in k0 + 1..n - 2 {
                for j in k0 + 1..n - 2 {
                    max = max.max(res[[i, j]]);
                }
            }
            max
        };
        let coarse = run(0.1);
        let fine = run(0.05);
        let factor = coarse / fine;
        assert!(
            (3.0..=5.0).contains(&factor),
            "refinement factor {factor} (coarse {coarse:.3e}, fine {fine:.3e})"
        );
    }

    #[test]
    fn isolated_evolution_stays_time_translation_invariant() {
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let sys = eq_params(1.0, 0.5, &lattice);
        let cfg = QuenchConfig::new(sys, vec![], lattice.clone());
        let run = evolve_quench_detailed(&cfg).unwrap();
        let g = run.green;
        assert!(g.antisymmetry_residual() < 1e-12);
        assert_eq!(g.equal_time_residual(), 0.0);
        // compare two equal separations far apart in center time; agreement
        // is limited by the accumulated O(dt^2) drift of the trapezoid
        // reconstruction, not by fp_tol
        let n = lattice.n_points();
        let v1 = g.greater_at(n / 4 + 8, n / 4);
        let v2 = g.greater_at(3 * n / 4 + 8, 3 * n / 4);
        assert!(
            (v1 - v2).norm() < 5e-3,
            "TTI violated: {:?} vs {:?}",
            v1,
            v2
        );
    }

    #[test]
    fn bath_quench_holds_prequench_quadrant() {
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let sys = eq_params(2.4, 0.5, &lattice);
        let bath_eq = solve_equilibrium(&eq_params(0.5, 0.5, &lattice)).unwrap();
        let bath = BathSpec::from_equilibrium(&bath_eq, 0.5, 3, &lattice).unwrap();
        let cfg = QuenchConfig::new(sys.clone(), vec![bath], lattice.clone());
        let eq = solve_equilibrium(&sys).unwrap();
        let g0 = lay_initial_condition(&eq, &lattice).unwrap();
        let run = evolve_from_initial(&cfg, g0.clone()).unwrap();
        let k0 = lattice.quench_index();
        let mut held_dev = 0.0f64;
        for i in 0..k0 {
            for j in 0..k0 {
                held_dev = held_dev.max((run.green.greater_at(i, j) - g0.greater_at(i, j)).norm());
            }
        }
        assert_eq!(held_dev, 0.0);
        assert!(run.green.antisymmetry_residual() < 1e-12);
        // the coupling actually changed the post-quench quadrant
        let mut changed = 0.0f64;
        for i in k0..lattice.n_points() {
            for j in k0..lattice.n_points() {
                changed = changed.max((run.green.greater_at(i, j) - g0.greater_at(i, j)).norm());
            }
        }
        assert!(changed > 1e-3, "quench had no effect: {changed}");
    }

    #[test]
    fn stepped_mode_agrees_with_fixed_point() {
        let lattice = TimeLattice::new(0.1, 3.0).unwrap();
        let sys = eq_params(1.2, 0.5, &lattice);
        let bath_eq = solve_equilibrium(&eq_params(0.5, 0.5, &lattice)).unwrap();
        let bath = BathSpec::from_equilibrium(&bath_eq, 0.4, 3, &lattice).unwrap();
        let cfg = QuenchConfig::new(sys.clone(), vec![bath], lattice.clone());
        let eq = solve_equilibrium(&sys).unwrap();
        let g0 = lay_initial_condition(&eq, &lattice).unwrap();
        let fixed = evolve_from_initial(&cfg, g0.clone()).unwrap().green;
        let stepped = evolve_stepped_from_initial(&cfg, g0).unwrap();
        let mut dev = 0.0f64;
        for (a, b) in fixed.greater_grid().iter().zip(stepped.greater_grid().iter()) {
            dev = dev.max((a - b).norm());
        }
        // both are second-order discretizations of the same equations
        assert!(dev < 5e-3, "fixed point vs stepped deviation {dev}");
    }

    #[test]
    fn free_system_stays_free() {
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let mut sys = eq_params(1.0, 0.0, &lattice);
        sys.coupling_j = 0.0;
        let cfg = QuenchConfig::new(sys, vec![], lattice.clone());
        let run = evolve_quench_detailed(&cfg).unwrap();
        for v in run.green.greater_grid().iter() {
            assert_eq!(*v, EQUAL_TIME_GREATER);
        }
        assert_eq!(run.sweeps, 1);
    }
}
