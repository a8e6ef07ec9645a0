//! Kadanoff-Baym evolution of the Lindbladian SYK model (linear jump
//! operators `L_i = sqrt(mu) psi_i`) in the vectorized-Liouvillian picture.
//!
//! Two bookkeeping conventions are implemented. The primary one stores the
//! contour components with the i-twist of the doubled-space fields:
//!
//! ```text
//!   G^<(t1,t2)  = -G^>(t2,t1)
//!   G^{++}      =  i (theta(t1-t2) G^> + theta(t2-t1) G^<)
//!   G^{--}      = -i (theta(t2-t1) G^> + theta(t1-t2) G^<)
//!   G^>(t1,t2)  =  (G^>(t2,t1))^*          (note the sign flip relative to
//!                                           the bath-coupled convention)
//! ```
//!
//! with the real dissipation kernel
//! `Sigma_ab = -i^q J^2 s_ab G_ab^{q-1} + theta(t1)theta(t2) mu eps_ab delta(t1-t2)`.
//! The alternative convention keeps the plain contour components and carries
//! the dissipator as `i mu s_ab eps_ab delta`, with an alpha-signed time
//! derivative; both produce the same physics and are cross-checked on small
//! grids. Thermal initial data maps into the primary convention through
//! `G_l^{++} = G_i^{++}`, `G_l^{+-} = -i G_i^{+-}`, `G_l^{-+} = -i G_i^{-+}`,
//! `G_l^{--} = -G_i^{--}`.

use ndarray::linalg::general_mat_mul;
use ndarray::Array2;
use num_complex::Complex64;

use crate::equilibrium::{lay_initial_condition, solve_equilibrium, EquilibriumParams};
use crate::error::KbError;
use crate::grid::{theta_step, ContourGreen, TimeLattice};
use crate::quench::march_update;
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Equal-time value of `G_l^{-+}`: the thermal `-i/2` times the `-i` of the
/// component mapping.
pub const EQUAL_TIME_LIOUVILLIAN: Complex64 = Complex64::new(-0.5, 0.0);

/// Contour branch index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourSign {
    Plus,
    Minus,
}

/// Which dissipator bookkeeping the evolution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DissipatorConvention {
    /// Real `mu eps_ab delta` kernel on i-twisted components (primary).
    #[default]
    RealKernel,
    /// `i mu s_ab eps_ab delta` kernel on plain contour components with an
    /// alpha-signed derivative.
    ImaginaryKernel,
}

#[derive(Debug, Clone)]
pub struct LindbladConfig {
    /// System parameters; `beta` is the initial temperature.
    pub system: EquilibriumParams,
    /// Dissipation rate, `>= 0`.
    pub mu: f64,
    pub lattice: TimeLattice,
    pub fp_tol: f64,
    pub fp_max_sweeps: usize,
    pub eta: f64,
    pub convention: DissipatorConvention,
}

impl LindbladConfig {
    pub fn new(system: EquilibriumParams, mu: f64, lattice: TimeLattice) -> Self {
        LindbladConfig {
            system,
            mu,
            lattice,
            fp_tol: 1e-8,
            fp_max_sweeps: 4000,
            eta: 0.5,
            convention: DissipatorConvention::RealKernel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if let Err(KbError::Config(mut e)) = self.system.validate() {
            errs.append(&mut e);
        }
        if self.mu < 0.0 {
            errs.push(format!("mu must be >= 0, got {}", self.mu));
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

/// All four contour components in the i-twisted convention. Only `-+` is
/// independent; the others are rebuilt from it after every sweep.
#[derive(Debug, Clone)]
pub struct LiouvillianGreen {
    lattice: TimeLattice,
    pp: Array2<Complex64>,
    pm: Array2<Complex64>,
    mp: Array2<Complex64>,
    mm: Array2<Complex64>,
}

impl LiouvillianGreen {
    /// Populate every component from the greater (`-+`) grid via the
    /// convention's internal relations.
    pub fn from_greater(lattice: TimeLattice, mp: Array2<Complex64>) -> Self {
        let n = lattice.n_points();
        let mut l = LiouvillianGreen {
            lattice,
            pp: Array2::from_elem((n, n), ZERO),
            pm: Array2::from_elem((n, n), ZERO),
            mp,
            mm: Array2::from_elem((n, n), ZERO),
        };
        l.rebuild_dependent();
        l
    }

    pub fn lattice(&self) -> &TimeLattice {
        &self.lattice
    }

    pub fn component(&self, alpha: ContourSign, beta: ContourSign) -> &Array2<Complex64> {
        use ContourSign::*;
        match (alpha, beta) {
            (Plus, Plus) => &self.pp,
            (Plus, Minus) => &self.pm,
            (Minus, Plus) => &self.mp,
            (Minus, Minus) => &self.mm,
        }
    }

    /// The greater component `G_l^{-+}`.
    pub fn greater(&self) -> &Array2<Complex64> {
        &self.mp
    }

    fn rebuild_dependent(&mut self) {
        let n = self.lattice.n_points();
        for i in 0..n {
            for j in 0..n {
                let gtr = self.mp[[i, j]];
                let lsr = -self.mp[[j, i]];
                self.pm[[i, j]] = lsr;
                let t_ij = theta_step(i, j);
                let t_ji = theta_step(j, i);
                self.pp[[i, j]] = I * (t_ij * gtr + t_ji * lsr);
                self.mm[[i, j]] = -I * (t_ji * gtr + t_ij * lsr);
            }
        }
    }

    /// Enforce `G^>(t1,t2) = (G^>(t2,t1))^*`, pin the equal-time value and
    /// rebuild the dependent components.
    pub fn enforce_symmetry(&mut self) {
        let n = self.lattice.n_points();
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (self.mp[[i, j]] + self.mp[[j, i]].conj());
                self.mp[[i, j]] = s;
                self.mp[[j, i]] = s.conj();
            }
        }
        for k in 0..n {
            self.mp[[k, k]] = EQUAL_TIME_LIOUVILLIAN;
        }
        self.rebuild_dependent();
    }

    /// `max |G^>(t1,t2) - conj(G^>(t2,t1))|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.lattice.n_points();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.mp[[i, j]] - self.mp[[j, i]].conj()).norm());
            }
        }
        worst
    }
}

/// Thermal initial data mapped into the i-twisted convention.
pub fn map_initial_condition(g_i: &ContourGreen) -> LiouvillianGreen {
    let mp = g_i.greater_grid().mapv(|v| -I * v);
    LiouvillianGreen::from_greater(g_i.lattice().clone(), mp)
}

/// Inverse of [`map_initial_condition`]: back to the plain contour
/// convention, `G_i^> = i G_l^{-+}`.
pub fn unmap_to_contour(l: &LiouvillianGreen) -> Result<ContourGreen> {
    let g = l.mp.mapv(|v| I * v);
    let mut out = ContourGreen::new(l.lattice.clone(), g)?;
    out.symmetrize_in_place();
    Ok(out)
}

fn sign_table(alpha: ContourSign, beta: ContourSign) -> (f64, f64) {
    // (s_ab, eps_ab); s_{+-} = s_{-+} = -(-1)^{q/2} is applied by the caller
    use ContourSign::*;
    match (alpha, beta) {
        (Plus, Plus) => (1.0, 0.0),
        (Minus, Minus) => (1.0, 0.0),
        (Plus, Minus) => (f64::NAN, 1.0),
        (Minus, Plus) => (f64::NAN, -1.0),
    }
}

/// `Sigma_ab(t1,t2)` of the primary convention at one lattice point, with
/// the Dirac delta represented as `1/delta_t` on the diagonal cell (exact
/// unit weight under the trapezoid quadrature in use).
pub fn lindblad_self_energy(
    green: &LiouvillianGreen,
    cfg: &LindbladConfig,
    alpha: ContourSign,
    beta: ContourSign,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    let k1 = cfg.lattice.index_of(t1)?;
    let k2 = cfg.lattice.index_of(t2)?;
    let q = cfg.system.q_body;
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let iq = if (q / 2) % 2 == 0 { 1.0 } else { -1.0 }; // i^q for even q
    let s_offdiag = -iq; // s_{+-} = s_{-+} = -(-1)^{q/2}
    let (s_diag, eps) = sign_table(alpha, beta);
    let s = if s_diag.is_nan() { s_offdiag } else { s_diag };
    let g = green.component(alpha, beta)[[k1, k2]];
    let mut sigma = -iq * j2 * s * g.powu(q - 1);
    if eps != 0.0 && k1 == k2 {
        let k0 = cfg.lattice.quench_index();
        let th = |k: usize| -> f64 {
            if k > k0 {
                1.0
            } else if k == k0 {
                0.5
            } else {
                0.0
            }
        };
        sigma += th(k1) * th(k2) * cfg.mu * eps / cfg.lattice.delta_t();
    }
    Ok(sigma)
}

#[derive(Debug, Clone)]
pub struct LindbladRun {
    pub green: LiouvillianGreen,
    pub sweeps: usize,
    pub final_update: f64,
    pub update_history: Vec<f64>,
    pub eta_used: f64,
}

/// Thermal solve, mapping, and the whole-grid fixed point of the `-+`
/// component equation with gamma-summed memory integrals. The integration
/// over t3 is explicitly bounded by `max(t1,t2)`, where the two gamma terms
/// cancel identically.
pub fn evolve_lindblad(cfg: &LindbladConfig) -> Result<LiouvillianGreen> {
    Ok(evolve_lindblad_detailed(cfg)?.green)
}

pub fn evolve_lindblad_detailed(cfg: &LindbladConfig) -> Result<LindbladRun> {
    cfg.validate()?;
    let eq = solve_equilibrium(&cfg.system)?;
    let g0 = lay_initial_condition(&eq, &cfg.lattice)?;
    match cfg.convention {
        DissipatorConvention::RealKernel => evolve_real_kernel(cfg, map_initial_condition(&g0)),
        DissipatorConvention::ImaginaryKernel => {
            let run = evolve_imaginary_kernel(cfg, g0)?;
            Ok(LindbladRun {
                green: map_initial_condition(&run.0),
                sweeps: run.1,
                final_update: run.2,
                update_history: run.3,
                eta_used: run.4,
            })
        }
    }
}

fn quench_theta(lattice: &TimeLattice, k: usize) -> f64 {
    let k0 = lattice.quench_index();
    if k > k0 {
        1.0
    } else if k == k0 {
        0.5
    } else {
        0.0
    }
}

/// Masked matrix products implementing the t3 <= max(t1, t2) bound: the
/// lower-masked left factors are exact for t1 >= t2, the upper-masked right
/// factors for t1 <= t2 (they agree on the diagonal).
fn bounded_convolution(
    sig_mp: &Array2<Complex64>,
    sig_mm: &Array2<Complex64>,
    pp: &Array2<Complex64>,
    mp: &Array2<Complex64>,
    weights: &[f64],
) -> Array2<Complex64> {
    let n = sig_mp.nrows();
    let mask_low = |src: &Array2<Complex64>| {
        let mut out = src.clone();
        for i in 0..n {
            for k in 0..n {
                let w = if k <= i { weights[k] } else { 0.0 };
                out[[i, k]] *= w;
            }
        }
        out
    };
    let mask_high = |src: &Array2<Complex64>| {
        let mut out = src.clone();
        for k in 0..n {
            for j in 0..n {
                if k > j {
                    out[[k, j]] = ZERO;
                }
            }
        }
        out
    };
    let sig_mp_lo = mask_low(sig_mp);
    let sig_mm_lo = mask_low(sig_mm);
    let mut i_lo = Array2::from_elem((n, n), ZERO);
    general_mat_mul(ONE, &sig_mp_lo, pp, ZERO, &mut i_lo);
    general_mat_mul(ONE, &sig_mm_lo, mp, ONE, &mut i_lo);

    let mut sig_mp_w = sig_mp.clone();
    let mut sig_mm_w = sig_mm.clone();
    for i in 0..n {
        for k in 0..n {
            sig_mp_w[[i, k]] *= weights[k];
            sig_mm_w[[i, k]] *= weights[k];
        }
    }
    let pp_hi = mask_high(pp);
    let mp_hi = mask_high(mp);
    let mut i_hi = Array2::from_elem((n, n), ZERO);
    general_mat_mul(ONE, &sig_mp_w, &pp_hi, ZERO, &mut i_hi);
    general_mat_mul(ONE, &sig_mm_w, &mp_hi, ONE, &mut i_hi);

    let mut out = i_hi;
    for i in 0..n {
        for j in 0..n {
            if i >= j {
                out[[i, j]] = i_lo[[i, j]];
            }
        }
    }
    out
}

fn evolve_real_kernel(cfg: &LindbladConfig, initial: LiouvillianGreen) -> Result<LindbladRun> {
    let n = cfg.lattice.n_points();
    let k0 = cfg.lattice.quench_index();
    let dt = cfg.lattice.delta_t();
    let q = cfg.system.q_body;
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let iq = if (q / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let weights = crate::quench::window_weights(&cfg.lattice);

    let mut green = initial;
    green.enforce_symmetry();

    let mut eta = cfg.eta;
    let mut history = Vec::new();
    let mut sweeps = 0;
    let mut g_new = Array2::from_elem((n, n), ZERO);

    while sweeps < cfg.fp_max_sweeps {
        sweeps += 1;
        let backup = green.clone();

        // Sigma_{-+} = -i^q J^2 s_{-+} G_{-+}^{q-1} - theta theta mu delta/dt;
        // the prefactor -i^q s_{-+} = (i^q)^2 = +1 for every even q.
        // Sigma_{--} = -i^q J^2 G_{--}^{q-1}
        let mut sig_mp = green.mp.mapv(|v| j2 * v.powu(q - 1));
        for k in 0..n {
            let th = quench_theta(&cfg.lattice, k);
            sig_mp[[k, k]] -= th * th * cfg.mu / dt;
        }
        let sig_mm = green.mm.mapv(|v| -iq * j2 * v.powu(q - 1));

        let conv = bounded_convolution(&sig_mp, &sig_mm, &green.pp, &green.mp, &weights);
        let d1 = conv.mapv(|v| -I * v);
        let mut d2 = Array2::from_elem((n, n), ZERO);
        for i in 0..n {
            for j in 0..n {
                d2[[i, j]] = d1[[j, i]].conj();
            }
        }

        march_update(&green.mp, &d1, &d2, k0, dt, &mut g_new);

        let mut norm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if (i > k0 || j > k0) && i != j {
                    norm = norm.max((g_new[[i, j]] - green.mp[[i, j]]).norm());
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
        for i in 0..n {
            for j in 0..n {
                if i > k0 || j > k0 {
                    let cur = green.mp[[i, j]];
                    let next = cur + eta * (g_new[[i, j]] - cur);
                    green.mp[[i, j]] = next;
                    post_amp = post_amp.max(next.norm());
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
        green.enforce_symmetry();

        if norm < cfg.fp_tol {
            return Ok(LindbladRun {
                green,
                sweeps,
                final_update: norm,
                update_history: history,
                eta_used: eta,
            });
        }
    }
    Err(KbError::NonConvergence {
        iterations: sweeps,
        residual: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

/// Alternative bookkeeping: plain contour components, dissipator
/// `i mu s_ab eps_ab delta`, derivative carrying the branch sign. Returns
/// the plain-convention greater function plus diagnostics.
fn evolve_imaginary_kernel(
    cfg: &LindbladConfig,
    initial: ContourGreen,
) -> Result<(ContourGreen, usize, f64, Vec<f64>, f64)> {
    let n = cfg.lattice.n_points();
    let k0 = cfg.lattice.quench_index();
    let dt = cfg.lattice.delta_t();
    let q = cfg.system.q_body;
    let j2 = cfg.system.coupling_j * cfg.system.coupling_j;
    let iq = if (q / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let weights = crate::quench::window_weights(&cfg.lattice);

    let mut green = initial;
    green.symmetrize_in_place();
    green.pin_diagonal();

    let mut eta = cfg.eta;
    let mut history = Vec::new();
    let mut sweeps = 0;
    let mut g_new = Array2::from_elem((n, n), ZERO);

    while sweeps < cfg.fp_max_sweeps {
        sweeps += 1;
        let backup = green.clone();
        let g = green.greater_grid();

        // plain components
        let mut pp = Array2::from_elem((n, n), ZERO);
        let mut mm = Array2::from_elem((n, n), ZERO);
        for i in 0..n {
            for j in 0..n {
                let gtr = g[[i, j]];
                let lsr = -g[[j, i]];
                let t_ij = theta_step(i, j);
                let t_ji = theta_step(j, i);
                pp[[i, j]] = t_ij * gtr + t_ji * lsr;
                mm[[i, j]] = t_ji * gtr + t_ij * lsr;
            }
        }
        // Sigma_{-+} = -i^q s_{-+} J^2 G^{q-1} + i mu s_{-+} eps_{-+} delta
        //            = J^2 G^{q-1} + i mu i^q delta-term
        let mut sig_mp = g.mapv(|v| j2 * v.powu(q - 1));
        for k in 0..n {
            let th = quench_theta(&cfg.lattice, k);
            // s_{-+} eps_{-+} = (-i^q)(-1) = i^q
            sig_mp[[k, k]] += Complex64::new(0.0, th * th * cfg.mu * iq / dt);
        }
        let sig_mm = mm.mapv(|v| -iq * j2 * v.powu(q - 1));

        let conv = bounded_convolution(&sig_mp, &sig_mm, &pp, g, &weights);
        // -i alpha d/dt1 with alpha = -: d/dt1 G^> = +i * conv... the
        // branch sign flips the i of the bath-coupled form
        let d1 = conv.mapv(|v| I * v);
        let mut d2 = Array2::from_elem((n, n), ZERO);
        for i in 0..n {
            for j in 0..n {
                d2[[i, j]] = -d1[[j, i]].conj();
            }
        }

        march_update(g, &d1, &d2, k0, dt, &mut g_new);

        let mut norm = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if (i > k0 || j > k0) && i != j {
                    norm = norm.max((g_new[[i, j]] - g[[i, j]]).norm());
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
        green.pin_diagonal();
        green.symmetrize_in_place();

        if norm < cfg.fp_tol {
            let final_update = norm;
            return Ok((green, sweeps, final_update, history, eta));
        }
    }
    Err(KbError::NonConvergence {
        iterations: sweeps,
        residual: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{beta_trace, FitConfig};
    use crate::quench::{evolve_from_initial, QuenchConfig};

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
    fn mapping_multipliers_and_involution() {
        let lattice = TimeLattice::new(0.1, 2.0).unwrap();
        let g = ContourGreen::free(lattice.clone());
        let l = map_initial_condition(&g);
        // free G_i^{-+} = -i/2 maps to -1/2
        assert_eq!(l.greater()[[5, 5]], EQUAL_TIME_LIOUVILLIAN);
        // G^{++}: identity on the time-ordered component
        let c = g.derive_components(0.5, -0.5).unwrap();
        let k1 = lattice.index_of(0.5).unwrap();
        let k2 = lattice.index_of(-0.5).unwrap();
        let tij = theta_step(k1, k2);
        let tji = theta_step(k2, k1);
        let gi_pp = tij * c.greater + tji * c.lesser;
        assert!((l.component(ContourSign::Plus, ContourSign::Plus)[[k1, k2]] - gi_pp).norm() < 1e-15);
        // inverse mapping recovers the input exactly
        let back = unmap_to_contour(&l).unwrap();
        for (a, b) in g.greater_grid().iter().zip(back.greater_grid().iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        // mapped symmetry holds
        assert_eq!(l.symmetry_residual(), 0.0);
    }

    #[test]
    fn self_energy_pointwise_oracle() {
        let lattice = TimeLattice::new(0.1, 2.0).unwrap();
        let sys = eq_params(1.0, 0.5, &lattice);
        let eq = solve_equilibrium(&sys).unwrap();
        let g0 = lay_initial_condition(&eq, &lattice).unwrap();
        let l = map_initial_condition(&g0);
        let mut cfg = LindbladConfig::new(sys, 0.3, lattice.clone());
        cfg.system.q_body = 4;

        // alpha = beta: no dissipative term even on the diagonal
        let s_pp = lindblad_self_energy(&l, &cfg, ContourSign::Plus, ContourSign::Plus, 1.0, 1.0)
            .unwrap();
        let k = lattice.index_of(1.0).unwrap();
        let gpp = l.component(ContourSign::Plus, ContourSign::Plus)[[k, k]];
        let oracle_pp = -Complex64::new(0.25, 0.0) * gpp * gpp * gpp; // -i^4 J^2 s_{++} G^3
        assert!((s_pp - oracle_pp).norm() < 1e-15);

        // q = 4 gives s_{+-} = -1; dissipative delta on the diagonal cell
        let s_pm = lindblad_self_energy(&l, &cfg, ContourSign::Plus, ContourSign::Minus, 1.0, 1.0)
            .unwrap();
        let gpm = l.component(ContourSign::Plus, ContourSign::Minus)[[k, k]];
        let oracle_pm = Complex64::new(0.25, 0.0) * gpm * gpm * gpm
            + Complex64::new(0.3 / 0.1, 0.0);
        assert!((s_pm - oracle_pm).norm() < 1e-12, "{s_pm} vs {oracle_pm}");

        // off-diagonal times: no delta
        let s_mp = lindblad_self_energy(&l, &cfg, ContourSign::Minus, ContourSign::Plus, 1.0, 0.5)
            .unwrap();
        let k2 = lattice.index_of(0.5).unwrap();
        let gmp = l.greater()[[k, k2]];
        assert!((s_mp - Complex64::new(0.25, 0.0) * gmp * gmp * gmp).norm() < 1e-15);
    }

    #[test]
    fn mu_zero_matches_isolated_evolution() {
        let lattice = TimeLattice::new(0.1, 3.0).unwrap();
        let sys = eq_params(1.0, 0.5, &lattice);
        let lcfg = LindbladConfig::new(sys.clone(), 0.0, lattice.clone());
        let lrun = evolve_lindblad_detailed(&lcfg).unwrap();
        let unmapped = unmap_to_contour(&lrun.green).unwrap();

        let qcfg = QuenchConfig::new(sys.clone(), vec![], lattice.clone());
        let eq = solve_equilibrium(&sys).unwrap();
        let g0 = lay_initial_condition(&eq, &lattice).unwrap();
        let qrun = evolve_from_initial(&qcfg, g0).unwrap();

        let mut dev = 0.0f64;
        for (a, b) in unmapped
            .greater_grid()
            .iter()
            .zip(qrun.green.greater_grid().iter())
        {
            dev = dev.max((a - b).norm());
        }
        assert!(dev < 10.0 * lcfg.fp_tol, "deviation {dev}");
    }

    #[test]
    fn dissipation_heats_toward_infinite_temperature() {
        let lattice = TimeLattice::new(0.1, 8.0).unwrap();
        let sys = eq_params(1.0, 0.5, &lattice);
        let cfg = LindbladConfig::new(sys, 0.5, lattice.clone());
        let run = evolve_lindblad_detailed(&cfg).unwrap();
        assert_eq!(run.green.symmetry_residual(), 0.0);
        // the thermal content decays in center time: beta(t) -> 0
        let g = unmap_to_contour(&run.green).unwrap();
        let (beta_early, _) = crate::observables::effective_beta_fdt(&g, 1.0).unwrap();
        let (beta_late, _) = crate::observables::effective_beta_fdt(&g, 5.0).unwrap();
        assert!(
            beta_late.abs() < 0.5 * beta_early.abs(),
            "no heating: beta(1) = {beta_early}, beta(5) = {beta_late}"
        );
        assert!(beta_early < 0.9, "already heated at t = 1: {beta_early}");
    }

    #[test]
    fn conventions_agree_on_effective_temperature() {
        let lattice = TimeLattice::new(0.1, 8.0).unwrap();
        let sys = eq_params(1.0, 0.5, &lattice);
        let mut cfg = LindbladConfig::new(sys, 0.3, lattice.clone());
        let run_real = evolve_lindblad_detailed(&cfg).unwrap();
        cfg.convention = DissipatorConvention::ImaginaryKernel;
        let run_imag = evolve_lindblad_detailed(&cfg).unwrap();

        let fit = FitConfig::default();
        let g_real = unmap_to_contour(&run_real.green).unwrap();
        let g_imag = unmap_to_contour(&run_imag.green).unwrap();
        let tr_real = beta_trace(&g_real, 0.5, 4, &fit);
        let tr_imag = beta_trace(&g_imag, 0.5, 4, &fit);
        let mut compared = 0;
        for i in 0..tr_real.len() {
            if tr_real.reliable[i] && tr_imag.reliable[i] {
                let a = tr_real.beta_fdt[i];
                let b = tr_imag.beta_fdt[i];
                assert!(
                    (a - b).abs() < 0.05 * a.abs().max(0.2),
                    "t = {}: {a} vs {b}",
                    tr_real.times[i]
                );
                compared += 1;
            }
        }
        assert!(compared > 3, "too few reliable samples: {compared}");
    }
}
