//! Two-time contour Green's functions on a uniform lattice.
//!
//! Only the greater component `G>(t1,t2)` is stored. For Majorana fermions
//! every other Keldysh component follows from it:
//!
//! - `G<(t1,t2) = -G>(t2,t1)`
//! - `G_R(t1,t2) = theta(t1-t2) (G> - G<)`
//! - `G_A(t1,t2) = theta(t2-t1) (G< - G>)`
//! - `G_K(t1,t2) = G> + G<`
//!
//! with `theta(0) = 1/2` everywhere. Thermal-descended states additionally
//! satisfy `G< = conj(G>)`, which coincides with the antisymmetry relation
//! `G>(t1,t2) = -conj(G>(t2,t1))` enforced by [`ContourGreen::symmetrize`].

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::KbError;
use crate::fourier::padded_spectrum;
use crate::Result;

/// Equal-time value of the greater function for `{chi_i, chi_j} = delta_ij`.
pub const EQUAL_TIME_GREATER: Complex64 = Complex64::new(0.0, -0.5);

/// Zero-padding factor for slice spectra.
pub const SPECTRUM_PAD: usize = 4;

/// Heaviside step with the symmetric midpoint convention `theta(0) = 1/2`,
/// expressed on lattice indices.
#[inline]
pub fn theta_step(a: usize, b: usize) -> f64 {
    use std::cmp::Ordering::*;
    match a.cmp(&b) {
        Greater => 1.0,
        Equal => 0.5,
        Less => 0.0,
    }
}

/// Uniform two-time lattice, `t_k = -lambda_t + k * delta_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLattice {
    delta_t: f64,
    lambda_t: f64,
    n_points: usize,
}

impl TimeLattice {
    pub fn new(delta_t: f64, lambda_t: f64) -> Result<Self> {
        if !(delta_t > 0.0) || !(lambda_t > 0.0) {
            return Err(KbError::Domain(format!(
                "lattice requires delta_t > 0 and lambda_t > 0, got {delta_t}, {lambda_t}"
            )));
        }
        let ratio = 2.0 * lambda_t / delta_t;
        let n = ratio.round() as usize;
        if (ratio - n as f64).abs() > 1e-9 * ratio.max(1.0) {
            return Err(KbError::Domain(format!(
                "2*lambda_t/delta_t = {ratio} is not an integer"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(KbError::Domain(format!(
                "n_points = {n} must be even and at least 4"
            )));
        }
        Ok(TimeLattice {
            delta_t,
            lambda_t,
            n_points: n,
        })
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda_t
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Index of t = 0; quench self-energies switch on above it.
    pub fn quench_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn time(&self, k: usize) -> f64 {
        -self.lambda_t + k as f64 * self.delta_t
    }

    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t + self.lambda_t) / self.delta_t;
        let k = x.round();
        if (x - k).abs() > 1e-6 || k < 0.0 || k as usize >= self.n_points {
            return Err(KbError::Domain(format!(
                "t = {t} is not on the lattice (window [{}, {}], step {})",
                -self.lambda_t,
                self.time(self.n_points - 1),
                self.delta_t
            )));
        }
        Ok(k as usize)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|k| self.time(k))
    }
}

/// All five Keldysh components of a two-time Green's function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub greater: Complex64,
    pub lesser: Complex64,
    pub retarded: Complex64,
    pub advanced: Complex64,
    pub keldysh: Complex64,
}

/// Greater Green's function on a two-time lattice.
#[derive(Debug, Clone)]
pub struct ContourGreen {
    lattice: TimeLattice,
    g_greater: Array2<Complex64>,
}

impl ContourGreen {
    pub fn new(lattice: TimeLattice, g_greater: Array2<Complex64>) -> Result<Self> {
        let n = lattice.n_points();
        if g_greater.dim() != (n, n) {
            return Err(KbError::Domain(format!(
                "grid shape {:?} does not match lattice n_points {}",
                g_greater.dim(),
                n
            )));
        }
        Ok(ContourGreen { lattice, g_greater })
    }

    /// Free-theory grid, `G> = -i/2` everywhere.
    pub fn free(lattice: TimeLattice) -> Self {
        let n = lattice.n_points();
        ContourGreen {
            lattice,
            g_greater: Array2::from_elem((n, n), EQUAL_TIME_GREATER),
        }
    }

    pub fn from_fn(lattice: TimeLattice, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let n = lattice.n_points();
        let g = Array2::from_shape_fn((n, n), |(i, j)| f(lattice.time(i), lattice.time(j)));
        ContourGreen { lattice, g_greater: g }
    }

    pub fn lattice(&self) -> &TimeLattice {
        &self.lattice
    }

    pub fn greater_grid(&self) -> &Array2<Complex64> {
        &self.g_greater
    }

    pub fn greater_grid_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.g_greater
    }

    #[inline]
    pub fn greater_at(&self, k1: usize, k2: usize) -> Complex64 {
        self.g_greater[[k1, k2]]
    }

    #[inline]
    pub fn lesser_at(&self, k1: usize, k2: usize) -> Complex64 {
        -self.g_greater[[k2, k1]]
    }

    /// Greater, lesser, retarded, advanced and Keldysh values at one lattice
    /// point (`theta(0) = 1/2` at equal times).
    pub fn derive_components(&self, t1: f64, t2: f64) -> Result<Components> {
        let k1 = self.lattice.index_of(t1)?;
        let k2 = self.lattice.index_of(t2)?;
        let greater = self.greater_at(k1, k2);
        let lesser = self.lesser_at(k1, k2);
        Ok(Components {
            greater,
            lesser,
            retarded: theta_step(k1, k2) * (greater - lesser),
            advanced: theta_step(k2, k1) * (lesser - greater),
            keldysh: greater + lesser,
        })
    }

    /// Enforced Majorana antisymmetry: `g <- (g - conj(g^T)) / 2`.
    pub fn symmetrize(&self) -> Self {
        let mut out = self.clone();
        out.symmetrize_in_place();
        out
    }

    pub fn symmetrize_in_place(&mut self) {
        let n = self.lattice.n_points();
        for i in 0..n {
            for j in 0..=i {
                let a = self.g_greater[[i, j]];
                let b = self.g_greater[[j, i]];
                let s = 0.5 * (a - b.conj());
                self.g_greater[[i, j]] = s;
                self.g_greater[[j, i]] = -s.conj();
            }
        }
    }

    /// Pin the equal-time diagonal to `-i/2` (the conserved anticommutator).
    pub fn pin_diagonal(&mut self) {
        let n = self.lattice.n_points();
        for k in 0..n {
            self.g_greater[[k, k]] = EQUAL_TIME_GREATER;
        }
    }

    /// `max |g(t1,t2) + conj(g(t2,t1))|` over the grid.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.lattice.n_points();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                let r = (self.g_greater[[i, j]] + self.g_greater[[j, i]].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    /// `max_t |g(t,t) + i/2|`.
    pub fn equal_time_residual(&self) -> f64 {
        (0..self.lattice.n_points())
            .map(|k| (self.g_greater[[k, k]] - EQUAL_TIME_GREATER).norm())
            .fold(0.0, f64::max)
    }

    /// Time-resolved spectral data from the diagonal (Wigner) slice at center
    /// time `t`: half-line transform over relative time `t' >= 0`, sampled at
    /// even multiples of `delta_t` so both arguments stay on-lattice.
    pub fn wigner_slice(&self, t: f64) -> Result<KeldyshSlice> {
        self.wigner_slice_windowed(t, f64::INFINITY)
    }

    pub fn wigner_slice_windowed(&self, t: f64, max_relative_time: f64) -> Result<KeldyshSlice> {
        let slices = self.wigner_time_slices(t, max_relative_time)?;
        Ok(slices.spectrum(t))
    }

    /// Raw half-line retarded/Keldysh slices in relative time (step `2 dt`).
    pub fn wigner_time_slices(&self, t: f64, max_relative_time: f64) -> Result<TimeSlices> {
        let k = self.lattice.index_of(t)?;
        let n = self.lattice.n_points();
        let dt = self.lattice.delta_t();
        let mut m_max = k.min(n - 1 - k);
        m_max = m_max.min((max_relative_time / (2.0 * dt)).floor() as usize);
        if m_max < 2 {
            return Err(KbError::InsufficientWindow(format!(
                "wigner slice at t = {t} has only {m_max} relative-time steps"
            )));
        }
        let mut retarded = Vec::with_capacity(m_max + 1);
        let mut keldysh = Vec::with_capacity(m_max + 1);
        for m in 0..=m_max {
            let gtr = self.greater_at(k + m, k - m);
            let lsr = self.lesser_at(k + m, k - m);
            // the m = 0 entry is the one-sided limit R(0+); the trapezoid
            // half-weight of the transform then yields the correct boundary
            // term of the half-line integral
            retarded.push(gtr - lsr);
            keldysh.push(gtr + lsr);
        }
        Ok(TimeSlices {
            t_start: 0.0,
            step: 2.0 * dt,
            retarded,
            keldysh,
        })
    }

    /// Spectral data from the corner slice at time `t`: both branches of the
    /// slice reach only into the past of `t`, and the transform runs over the
    /// full relative-time line.
    pub fn corner_slice(&self, t: f64) -> Result<KeldyshSlice> {
        self.corner_slice_windowed(t, f64::INFINITY)
    }

    pub fn corner_slice_windowed(&self, t: f64, max_relative_time: f64) -> Result<KeldyshSlice> {
        let slices = self.corner_time_slices(t, max_relative_time)?;
        Ok(slices.spectrum(t))
    }

    /// Raw corner slices over `t' = -M dt ..= M dt` (step `dt`).
    pub fn corner_time_slices(&self, t: f64, max_relative_time: f64) -> Result<TimeSlices> {
        let k = self.lattice.index_of(t)?;
        let dt = self.lattice.delta_t();
        let mut m_max = k;
        m_max = m_max.min((max_relative_time / dt).floor() as usize);
        if m_max < 2 {
            return Err(KbError::InsufficientWindow(format!(
                "corner slice at t = {t} has only {m_max} relative-time steps"
            )));
        }
        let len = 2 * m_max + 1;
        let mut gtr = vec![Complex64::default(); len];
        let mut lsr = vec![Complex64::default(); len];
        for j in -(m_max as i64)..=(m_max as i64) {
            let idx = (j + m_max as i64) as usize;
            if j > 0 {
                gtr[idx] = self.greater_at(k - j as usize, k);
                lsr[idx] = self.lesser_at(k - j as usize, k);
            } else {
                let kj = (k as i64 + j) as usize;
                gtr[idx] = self.greater_at(k, kj);
                lsr[idx] = self.lesser_at(k, kj);
            }
        }
        let mut retarded = Vec::with_capacity(len);
        let mut keldysh = Vec::with_capacity(len);
        for (idx, (&g, &l)) in gtr.iter().zip(lsr.iter()).enumerate() {
            let j = idx as i64 - m_max as i64;
            let th = if j > 0 {
                1.0
            } else if j == 0 {
                0.5
            } else {
                0.0
            };
            retarded.push(th * (g - l));
            keldysh.push(g + l);
        }
        Ok(TimeSlices {
            t_start: -(m_max as f64) * dt,
            step: dt,
            retarded,
            keldysh,
        })
    }
}

/// Retarded/Keldysh slices in relative time, before transformation.
#[derive(Debug, Clone)]
pub struct TimeSlices {
    pub t_start: f64,
    pub step: f64,
    pub retarded: Vec<Complex64>,
    pub keldysh: Vec<Complex64>,
}

impl TimeSlices {
    pub fn spectrum(&self, center_time: f64) -> KeldyshSlice {
        let r = padded_spectrum(&self.retarded, self.t_start, self.step, SPECTRUM_PAD);
        let k = padded_spectrum(&self.keldysh, self.t_start, self.step, SPECTRUM_PAD);
        KeldyshSlice {
            center_time,
            omega: r.omega,
            g_retarded: r.values,
            g_keldysh: k.values,
        }
    }
}

/// Retarded and Keldysh correlators over a uniform frequency grid at a fixed
/// center time.
#[derive(Debug, Clone)]
pub struct KeldyshSlice {
    pub center_time: f64,
    pub omega: Vec<f64>,
    pub g_retarded: Vec<Complex64>,
    pub g_keldysh: Vec<Complex64>,
}

/// `-g^T` viewed as a grid: `G<(k1,k2) = -g(k2,k1)`.
pub fn lesser_grid(g: &Array2<Complex64>) -> Array2<Complex64> {
    let n = g.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| -g[[j, i]])
}

/// Retarded grid `theta(t1-t2) (G> - G<)` with `theta(0) = 1/2`.
pub fn retarded_grid(g: &Array2<Complex64>) -> Array2<Complex64> {
    let n = g.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        theta_step(i, j) * (g[[i, j]] + g[[j, i]])
    })
}

/// Advanced grid `theta(t2-t1) (G< - G>)`.
pub fn advanced_grid(g: &Array2<Complex64>) -> Array2<Complex64> {
    let n = g.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| {
        -theta_step(j, i) * (g[[j, i]] + g[[i, j]])
    })
}
