//! Effective temperatures, total energy, Mpemba-crossing detection and
//! coupling-threshold scans.
//!
//! Two effective-temperature definitions are extracted from the low-frequency
//! fluctuation-dissipation ratio of time-resolved slices:
//!
//! - `beta(t) = 2 Im G_K(w,t) / (w Im G_R(w,t)) |_{w->0}` from the diagonal
//!   (Wigner) slice with its half-line transform, and
//! - `beta'(t) = -Im G_K(w,t) / (w Im G_R(w,t)) |_{w->0}` from the corner
//!   slice with its full-line transform.
//!
//! Both reduce to the thermodynamic `beta` in equilibrium. The `w -> 0`
//! limit is realized as a linear extrapolation from the smallest positive
//! frequencies of the zero-padded spectra, with a weighted tanh fit of the
//! full fluctuation-dissipation form as a fallback when the extrapolation
//! residual is large (oscillating or negative-temperature transients).

use num_complex::Complex64;

use crate::error::KbError;
use crate::grid::{ContourGreen, KeldyshSlice, TimeSlices};
use crate::quench::{evolve_from_initial, QuenchConfig};
use crate::Result;

/// Knobs of the low-frequency fit.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Number of smallest positive frequencies for the linear extrapolation.
    pub fit_points: usize,
    /// Frequency window of the tanh fallback fit.
    pub tanh_omega_max: f64,
    /// Relative extrapolation residual above which the fallback engages.
    pub fallback_threshold: f64,
    /// Retarded slices must decay below this fraction of their head value
    /// within the window, otherwise the spectrum is unresolved.
    pub decay_threshold: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            fit_points: 4,
            tanh_omega_max: 2.0,
            fallback_threshold: 0.05,
            // a degenerate (free-like) spectrum sits at tail/peak = 1;
            // truncated thermal windows reach ~0.5 and still fit fine
            decay_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SliceKind {
    Wigner,
    Corner,
}

/// Effective inverse temperature from the Wigner slice at center time `t`.
/// Returns `(beta, fit_quality)`.
pub fn effective_beta_fdt(green: &ContourGreen, t: f64) -> Result<(f64, f64)> {
    effective_beta_fdt_cfg(green, t, &FitConfig::default())
}

pub fn effective_beta_fdt_cfg(
    green: &ContourGreen,
    t: f64,
    cfg: &FitConfig,
) -> Result<(f64, f64)> {
    let slices = green.wigner_time_slices(t, f64::INFINITY)?;
    check_decay(&slices, cfg)?;
    let spec = slices.spectrum(t);
    fit_beta(&spec, SliceKind::Wigner, cfg)
}

/// Effective inverse temperature from the causal corner slice at time `t`.
pub fn effective_beta_corner(green: &ContourGreen, t: f64) -> Result<(f64, f64)> {
    effective_beta_corner_cfg(green, t, &FitConfig::default())
}

pub fn effective_beta_corner_cfg(
    green: &ContourGreen,
    t: f64,
    cfg: &FitConfig,
) -> Result<(f64, f64)> {
    let slices = green.corner_time_slices(t, f64::INFINITY)?;
    check_decay(&slices, cfg)?;
    let spec = slices.spectrum(t);
    fit_beta(&spec, SliceKind::Corner, cfg)
}

/// Degenerate-spectrum guard: a retarded slice that has not decayed within
/// the window (free theory, or a window too short for the state) carries its
/// spectral weight in the unresolved w = 0 bin and admits no slope.
fn check_decay(slices: &TimeSlices, cfg: &FitConfig) -> Result<()> {
    // peak against the largest-|t'| quarter; corner slices have retarded
    // support only at t' >= 0, so the peak sits mid-array there
    let n = slices.retarded.len();
    let quarter = (n / 4).max(1);
    let peak = slices.retarded.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tail = slices
        .retarded
        .iter()
        .skip(n - quarter)
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if peak == 0.0 || tail > cfg.decay_threshold * peak {
        return Err(KbError::UndefinedTemperature(format!(
            "retarded slice does not decay within the window (tail/peak = {:.3})",
            tail / peak
        )));
    }
    Ok(())
}

/// Fluctuation-dissipation ratio `r(w)` normalized so `r -> beta` as
/// `w -> 0` for a thermal state.
fn fdt_ratio(slice: &KeldyshSlice, kind: SliceKind, k: usize) -> f64 {
    let w = slice.omega[k];
    let im_k = slice.g_keldysh[k].im;
    let im_r = slice.g_retarded[k].im;
    match kind {
        SliceKind::Wigner => 2.0 * im_k / (w * im_r),
        SliceKind::Corner => -im_k / (w * im_r),
    }
}

fn fit_beta(slice: &KeldyshSlice, kind: SliceKind, cfg: &FitConfig) -> Result<(f64, f64)> {
    let scale = slice
        .g_retarded
        .iter()
        .map(|v| v.im.abs())
        .fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(KbError::UndefinedTemperature(
            "retarded spectrum vanishes".into(),
        ));
    }
    // the smallest positive frequencies with usable dissipative signal
    let noise_floor = 1e-9 * scale;
    let mut idx: Vec<usize> = (0..slice.omega.len())
        .filter(|&k| slice.omega[k] > 0.0)
        .collect();
    idx.sort_by(|&a, &b| slice.omega[a].partial_cmp(&slice.omega[b]).unwrap());
    let fit_idx: Vec<usize> = idx.iter().copied().take(cfg.fit_points).collect();
    if fit_idx.is_empty()
        || fit_idx
            .iter()
            .all(|&k| slice.g_retarded[k].im.abs() < noise_floor)
    {
        return Err(KbError::UndefinedTemperature(
            "no dissipative signal at the fit frequencies".into(),
        ));
    }

    // linear extrapolation r(w) = a + c w to w = 0
    let m = fit_idx.len() as f64;
    let (mut sw, mut sr, mut sww, mut swr) = (0.0, 0.0, 0.0, 0.0);
    for &k in &fit_idx {
        let w = slice.omega[k];
        let r = fdt_ratio(slice, kind, k);
        sw += w;
        sr += r;
        sww += w * w;
        swr += w * r;
    }
    let denom = m * sww - sw * sw;
    let slope = (m * swr - sw * sr) / denom;
    let beta_lin = (sr - slope * sw) / m;
    let mut quality = 0.0;
    for &k in &fit_idx {
        let w = slice.omega[k];
        let r = fdt_ratio(slice, kind, k);
        let res = r - (beta_lin + slope * w);
        quality += res * res;
    }
    quality = (quality / m).sqrt();

    if quality <= cfg.fallback_threshold * beta_lin.abs().max(0.5) {
        return Ok((beta_lin, quality));
    }

    // weighted fit of Im G_K / Im G_R against the full tanh form
    let mut ws = Vec::new();
    let mut ys = Vec::new();
    let mut weights = Vec::new();
    for &k in &idx {
        let w = slice.omega[k];
        if w > cfg.tanh_omega_max {
            break;
        }
        let im_r = slice.g_retarded[k].im;
        if im_r.abs() < noise_floor {
            continue;
        }
        let y = match kind {
            SliceKind::Wigner => slice.g_keldysh[k].im / im_r,
            SliceKind::Corner => -slice.g_keldysh[k].im / (2.0 * im_r),
        };
        ws.push(w);
        ys.push(y);
        weights.push(im_r.abs());
    }
    if ws.len() < 2 {
        return Ok((beta_lin, quality));
    }
    let objective = |beta: f64| -> f64 {
        let mut s = 0.0;
        let mut wsum = 0.0;
        for ((&w, &y), &wt) in ws.iter().zip(ys.iter()).zip(weights.iter()) {
            let d = y - (0.5 * beta * w).tanh();
            s += wt * d * d;
            wsum += wt;
        }
        s / wsum
    };
    let beta_fit = golden_min(objective, -100.0, 100.0, 1e-6);
    let mut q2 = 0.0;
    for &k in &fit_idx {
        let w = slice.omega[k];
        let r = fdt_ratio(slice, kind, k);
        let model = 2.0 * (0.5 * beta_fit * w).tanh() / w;
        q2 += (r - model) * (r - model);
    }
    q2 = (q2 / m).sqrt();
    Ok((beta_fit, q2))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    // coarse bracketing pass guards against local minima of the tanh misfit
    let mut best = a;
    let mut best_v = f64::INFINITY;
    let coarse = 200;
    for i in 0..=coarse {
        let x = a + (b - a) * i as f64 / coarse as f64;
        let v = f(x);
        if v < best_v {
            best_v = v;
            best = x;
        }
    }
    let span = (b - a) / coarse as f64;
    a = best - span;
    b = best + span;
    let phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Total energy `E(t) = (i J^2 / 4) \int_{-L}^{t} dt' (G>(t,t')^4 - G<(t,t')^4)`
/// by trapezoid quadrature; the imaginary residue must stay below tolerance
/// or the stored grid violates the Majorana conventions.
pub fn total_energy(green: &ContourGreen, coupling_j: f64, t: f64) -> Result<f64> {
    let lat = green.lattice();
    let k = lat.index_of(t)?;
    let dt = lat.delta_t();
    let mut acc = Complex64::default();
    for k3 in 0..=k {
        let w = if k3 == 0 || k3 == k { 0.5 } else { 1.0 };
        let gtr = green.greater_at(k, k3);
        let lsr = green.lesser_at(k, k3);
        acc += w * (gtr.powu(4) - lsr.powu(4));
    }
    let e = Complex64::new(0.0, 0.25 * coupling_j * coupling_j) * acc * dt;
    if e.im.abs() > 1e-8 * e.re.abs().max(1.0) {
        return Err(KbError::ConventionViolation(format!(
            "energy integrand left an imaginary residue {:.3e}",
            e.im
        )));
    }
    Ok(e.re)
}

/// Effective-temperature trajectories with quality and reliability flags.
#[derive(Debug, Clone)]
pub struct BetaTrace {
    pub times: Vec<f64>,
    pub beta_fdt: Vec<f64>,
    pub beta_corner: Vec<f64>,
    pub energy: Vec<f64>,
    /// Residual of the primary (Wigner) low-frequency fit.
    pub fit_quality: Vec<f64>,
    /// False within `lambda_t / 5` of the window edge, where the transform
    /// loses support, and wherever an extraction failed.
    pub reliable: Vec<bool>,
}

impl BetaTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Sample the post-quench trajectories every `stride` lattice steps.
pub fn beta_trace(
    green: &ContourGreen,
    coupling_j: f64,
    stride: usize,
    cfg: &FitConfig,
) -> BetaTrace {
    let lat = green.lattice();
    let k0 = lat.quench_index();
    let n = lat.n_points();
    let edge = lat.lambda_t() - lat.lambda_t() / 5.0;
    let mut trace = BetaTrace {
        times: Vec::new(),
        beta_fdt: Vec::new(),
        beta_corner: Vec::new(),
        energy: Vec::new(),
        fit_quality: Vec::new(),
        reliable: Vec::new(),
    };
    let mut k = k0 + stride;
    while k < n {
        let t = lat.time(k);
        let fdt = effective_beta_fdt_cfg(green, t, cfg);
        let corner = effective_beta_corner_cfg(green, t, cfg);
        let energy = total_energy(green, coupling_j, t).unwrap_or(f64::NAN);
        let mut reliable = t <= edge;
        let (bf, q) = match fdt {
            Ok(v) => v,
            Err(_) => {
                reliable = false;
                (f64::NAN, f64::NAN)
            }
        };
        let bc = match corner {
            Ok((v, _)) => v,
            Err(_) => {
                reliable = false;
                f64::NAN
            }
        };
        trace.times.push(t);
        trace.beta_fdt.push(bf);
        trace.beta_corner.push(bc);
        trace.energy.push(energy);
        trace.fit_quality.push(q);
        trace.reliable.push(reliable);
        k += stride;
    }
    trace
}

/// Crossing statistics of two trajectories.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CrossingReport {
    pub crossing_times: Vec<f64>,
    /// Crossing count mod 2.
    pub parity: u32,
    /// Closest approach of the two trajectories when no crossing was found
    /// (0 otherwise).
    pub min_separation: f64,
}

/// Sign-change detection on `d(t) = a.beta_fdt - b.beta_fdt` with a
/// hysteresis deadband: a crossing counts only when `|d|` exceeded the
/// deadband on both flanks, which keeps numerical chatter out of the parity
/// statistics. Crossing times are linearly interpolated.
pub fn detect_crossings(
    a: &BetaTrace,
    b: &BetaTrace,
    window: (f64, f64),
    deadband: f64,
) -> Result<CrossingReport> {
    if a.times.len() != b.times.len()
        || a.times
            .iter()
            .zip(b.times.iter())
            .any(|(x, y)| (x - y).abs() > 1e-9)
    {
        return Err(KbError::Domain(
            "traces live on different time grids".into(),
        ));
    }
    if deadband < 0.0 {
        return Err(KbError::Domain("deadband must be >= 0".into()));
    }
    let mut ts = Vec::new();
    let mut ds = Vec::new();
    for i in 0..a.times.len() {
        let t = a.times[i];
        if t < window.0 || t > window.1 || !a.reliable[i] || !b.reliable[i] {
            continue;
        }
        let d = a.beta_fdt[i] - b.beta_fdt[i];
        if d.is_finite() {
            ts.push(t);
            ds.push(d);
        }
    }
    let mut crossings = Vec::new();
    let mut armed: Option<(f64, usize)> = None; // (sign, index of last armed sample)
    let mut min_sep = f64::INFINITY;
    for i in 0..ds.len() {
        min_sep = min_sep.min(ds[i].abs());
        if ds[i].abs() <= deadband {
            continue;
        }
        let sign = ds[i].signum();
        if let Some((prev_sign, prev_idx)) = armed {
            if sign != prev_sign {
                // locate the interpolated zero between the armed samples
                let mut tc = 0.5 * (ts[prev_idx] + ts[i]);
                for j in prev_idx..i {
                    if ds[j].signum() != ds[j + 1].signum() {
                        let f = ds[j] / (ds[j] - ds[j + 1]);
                        tc = ts[j] + f * (ts[j + 1] - ts[j]);
                        break;
                    }
                }
                crossings.push(tc);
            }
        }
        armed = Some((sign, i));
    }
    let min_separation = if crossings.is_empty() {
        if min_sep.is_finite() {
            min_sep
        } else {
            f64::NAN
        }
    } else {
        0.0
    };
    Ok(CrossingReport {
        parity: (crossings.len() % 2) as u32,
        crossing_times: crossings,
        min_separation,
    })
}

/// Deadband from the per-point noise of the fits: three times the median
/// fit residual over the window, floored to keep it meaningful when the
/// fits are nearly exact.
pub fn auto_deadband(a: &BetaTrace, b: &BetaTrace, window: (f64, f64)) -> f64 {
    let mut qs: Vec<f64> = a
        .fit_quality
        .iter()
        .chain(b.fit_quality.iter())
        .zip(a.times.iter().chain(b.times.iter()))
        .filter(|(q, t)| q.is_finite() && **t >= window.0 && **t <= window.1)
        .map(|(q, _)| *q)
        .collect();
    if qs.is_empty() {
        return 1e-3;
    }
    qs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    (3.0 * qs[qs.len() / 2]).max(1e-3)
}

/// Result of a coupling-threshold bisection.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScanOutcome {
    pub v_threshold: f64,
    /// Every probed coupling with its crossing count.
    pub probes: Vec<(f64, usize)>,
}

/// Bisection for the smallest coupling with Mpemba crossings: both bath
/// couplings are scaled together, each probe runs the full evolution for the
/// two initial temperatures and counts crossings of the primary traces.
pub fn threshold_scan(
    base_cfg: &QuenchConfig,
    beta_pair: (f64, f64),
    v_range: (f64, f64),
    bisect_tol: f64,
) -> Result<f64> {
    Ok(threshold_scan_detailed(base_cfg, beta_pair, v_range, bisect_tol, 5)?.v_threshold)
}

pub fn threshold_scan_detailed(
    base_cfg: &QuenchConfig,
    beta_pair: (f64, f64),
    v_range: (f64, f64),
    bisect_tol: f64,
    stride: usize,
) -> Result<ScanOutcome> {
    if base_cfg.baths.is_empty() {
        return Err(KbError::Domain("threshold scan needs at least one bath".into()));
    }
    if !(v_range.0 < v_range.1) || !(bisect_tol > 0.0) {
        return Err(KbError::Domain("invalid bracket or tolerance".into()));
    }
    // one equilibrium solve per initial temperature, reused by every probe
    let mut initials = Vec::new();
    for &beta in &[beta_pair.0, beta_pair.1] {
        let mut params = base_cfg.system.clone();
        params.beta = beta;
        let eq = crate::equilibrium::solve_equilibrium(&params)?;
        initials.push((
            params,
            crate::equilibrium::lay_initial_condition(&eq, &base_cfg.lattice)?,
        ));
    }
    let lambda = base_cfg.lattice.lambda_t();
    let window = (0.0, lambda - lambda / 5.0);
    let fit_cfg = FitConfig::default();

    let mut probes = Vec::new();
    let probe = |v: f64, probes: &mut Vec<(f64, usize)>| -> Result<usize> {
        let mut traces = Vec::new();
        for (params, g0) in &initials {
            let mut cfg = base_cfg.clone();
            cfg.system = params.clone();
            for b in cfg.baths.iter_mut() {
                b.coupling_v = v;
            }
            let run = evolve_from_initial(&cfg, g0.clone())?;
            traces.push(beta_trace(
                &run.green,
                cfg.system.coupling_j,
                stride,
                &fit_cfg,
            ));
        }
        let deadband = auto_deadband(&traces[0], &traces[1], window);
        let report = detect_crossings(&traces[0], &traces[1], window, deadband)?;
        let count = report.crossing_times.len();
        probes.push((v, count));
        Ok(count)
    };

    let lo_count = probe(v_range.0, &mut probes)?;
    let hi_count = probe(v_range.1, &mut probes)?;
    if lo_count > 0 || hi_count == 0 {
        return Err(KbError::Bracket(format!(
            "crossing status does not bracket a threshold: {} at V = {}, {} at V = {}",
            lo_count, v_range.0, hi_count, v_range.1
        )));
    }
    let (mut lo, mut hi) = v_range;
    while hi - lo > bisect_tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut probes)? > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ScanOutcome {
        v_threshold: 0.5 * (lo + hi),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{lay_initial_condition, solve_equilibrium, EquilibriumParams};
    use crate::grid::TimeLattice;

    fn thermal_grid(beta: f64, lambda: f64) -> ContourGreen {
        let lattice = TimeLattice::new(0.1, lambda).unwrap();
        let mut p = EquilibriumParams::new(beta, 0.5, 4);
        p.n_omega = 2048;
        p.omega_max = 8.0;
        p.tol = 1e-10;
        p.dt_sample = 0.1;
        p.t_span = 2.0 * lambda + 1.0;
        let eq = solve_equilibrium(&p).unwrap();
        lay_initial_condition(&eq, &lattice).unwrap()
    }

    #[test]
    fn recovers_thermal_beta() {
        // the corner slice reaches only into the past of its center time, so
        // it needs t + lambda_t to cover the correlator decay
        let g = thermal_grid(1.0, 15.0);
        let (beta, q) = effective_beta_fdt(&g, 2.0).unwrap();
        assert!((beta - 1.0).abs() < 0.02, "beta_fdt = {beta}, quality {q}");
        let (beta_c, _) = effective_beta_corner(&g, 2.0).unwrap();
        assert!((beta_c - 1.0).abs() < 0.02, "beta_corner = {beta_c}");
        // the two definitions agree in equilibrium
        assert!((beta - beta_c).abs() / beta.abs() < 0.03);
    }

    #[test]
    fn infinite_temperature_reads_zero() {
        let g = thermal_grid(0.0, 10.0);
        let (beta, _) = effective_beta_fdt(&g, 0.0).unwrap();
        assert!(beta.abs() < 0.05, "beta = {beta}");
    }

    #[test]
    fn free_theory_is_degenerate() {
        let lattice = TimeLattice::new(0.1, 10.0).unwrap();
        let g = ContourGreen::free(lattice);
        assert!(matches!(
            effective_beta_fdt(&g, 0.0),
            Err(KbError::UndefinedTemperature(_))
        ));
        assert!(matches!(
            effective_beta_corner(&g, 0.0),
            Err(KbError::UndefinedTemperature(_))
        ));
    }

    #[test]
    fn energy_zero_for_free_coupling() {
        let lattice = TimeLattice::new(0.1, 5.0).unwrap();
        let g = ContourGreen::free(lattice);
        assert_eq!(total_energy(&g, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_constant_in_equilibrium() {
        let g = thermal_grid(1.0, 10.0);
        let e1 = total_energy(&g, 0.5, 2.0).unwrap();
        let e2 = total_energy(&g, 0.5, 6.0).unwrap();
        assert!(
            (e1 - e2).abs() < 2e-3 * e1.abs().max(1e-3),
            "E(2) = {e1}, E(6) = {e2}"
        );
    }

    fn synthetic_trace(times: &[f64], beta: impl Fn(f64) -> f64) -> BetaTrace {
        BetaTrace {
            times: times.to_vec(),
            beta_fdt: times.iter().map(|&t| beta(t)).collect(),
            beta_corner: times.iter().map(|&t| beta(t)).collect(),
            energy: vec![0.0; times.len()],
            fit_quality: vec![1e-4; times.len()],
            reliable: vec![true; times.len()],
        }
    }

    #[test]
    fn crossings_constant_offset() {
        let times: Vec<f64> = (1..100).map(|k| 0.1 * k as f64).collect();
        let a = synthetic_trace(&times, |_| 2.0);
        let b = synthetic_trace(&times, |_| 1.0);
        let rep = detect_crossings(&a, &b, (0.0, 10.0), 0.01).unwrap();
        assert!(rep.crossing_times.is_empty());
        assert_eq!(rep.parity, 0);
        assert!((rep.min_separation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossings_linear_interpolation() {
        let times: Vec<f64> = (1..=100).map(|k| 0.1 * k as f64).collect();
        let a = synthetic_trace(&times, |t| t - 5.0);
        let b = synthetic_trace(&times, |_| 0.0);
        let rep = detect_crossings(&a, &b, (0.0, 10.0), 0.01).unwrap();
        assert_eq!(rep.crossing_times.len(), 1);
        assert!((rep.crossing_times[0] - 5.0).abs() < 1e-9);
        assert_eq!(rep.parity, 1);
        assert_eq!(rep.min_separation, 0.0);
    }

    #[test]
    fn crossings_swap_antisymmetric() {
        let times: Vec<f64> = (1..=200).map(|k| 0.05 * k as f64).collect();
        let a = synthetic_trace(&times, |t| (t * 1.3).sin() * (1.0 + 0.1 * t));
        let b = synthetic_trace(&times, |t| 0.3 * (t - 4.0));
        let r1 = detect_crossings(&a, &b, (0.0, 10.0), 0.02).unwrap();
        let r2 = detect_crossings(&b, &a, (0.0, 10.0), 0.02).unwrap();
        assert_eq!(r1.crossing_times, r2.crossing_times);
        assert!(!r1.crossing_times.is_empty());
    }

    #[test]
    fn deadband_suppresses_chatter() {
        let times: Vec<f64> = (1..=100).map(|k| 0.1 * k as f64).collect();
        // oscillation of amplitude 0.005 around zero: chatter, not crossings
        let a = synthetic_trace(&times, |t| 0.005 * (8.0 * t).sin());
        let b = synthetic_trace(&times, |_| 0.0);
        let rep = detect_crossings(&a, &b, (0.0, 10.0), 0.02).unwrap();
        assert!(rep.crossing_times.is_empty());
        let rep2 = detect_crossings(&a, &b, (0.0, 10.0), 1e-4).unwrap();
        assert!(rep2.crossing_times.len() > 10);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let t1: Vec<f64> = (1..10).map(|k| 0.1 * k as f64).collect();
        let t2: Vec<f64> = (1..10).map(|k| 0.11 * k as f64).collect();
        let a = synthetic_trace(&t1, |_| 1.0);
        let b = synthetic_trace(&t2, |_| 0.0);
        assert!(detect_crossings(&a, &b, (0.0, 1.0), 0.01).is_err());
    }
}
