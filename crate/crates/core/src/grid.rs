//! Uniform coordinate lattice, its conjugate momentum lattice, and sampled
//! wavefunctions.
//!
//! The momentum spacing is `delta_p = pi hbar / (N delta_q)`, half the usual
//! DFT spacing. The Wigner correlation variable `x` is sampled at even
//! multiples of `delta_q`, so this is the spacing on which the Wigner
//! function comes out naturally; wavefunctions use the same lattice so no
//! module ever resamples.

use std::f64::consts::PI;
use std::fmt;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Plan;

/// Amplitudes larger than this at either end of the lattice trigger a warning.
pub const EDGE_WARNING: f64 = 1e-8;

/// States used as analytic inputs must be smaller than this at the lattice edges.
pub const EDGE_CONTRACT: f64 = 1e-12;

const GRID_RTOL: f64 = 1e-12;

/// A uniform lattice `q_j = q_min + j delta_q`, `j in [0, n)`, together with
/// the momentum lattice `p_k = (k - n/2) delta_p` and the value of hbar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    q_min: f64,
    delta_q: f64,
    n_points: usize,
    hbar: f64,
}

/// Builds the lattice spanning `[q_min, q_max)` with `n_points` samples and
/// `hbar = 1`.
///
/// ```
/// let grid = wignerlab::make_grid(-10.0, 10.0, 256).unwrap();
/// assert_eq!(grid.delta_q(), 0.078125);
/// assert!((grid.delta_p() - std::f64::consts::PI / 20.0).abs() < 1e-15);
/// assert!(wignerlab::make_grid(0.0, 1.0, 7).is_err());
/// ```
pub fn make_grid(q_min: f64, q_max: f64, n_points: usize) -> Result<Grid> {
    if !(q_min.is_finite() && q_max.is_finite()) || q_max <= q_min {
        return Err(Error::InvalidGrid(format!(
            "need q_max > q_min, got [{q_min}, {q_max}]"
        )));
    }
    Grid::from_parts(q_min, (q_max - q_min) / n_points as f64, n_points, 1.0)
}

impl Grid {
    pub fn from_parts(q_min: f64, delta_q: f64, n_points: usize, hbar: f64) -> Result<Grid> {
        if n_points < 8 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and at least 8, got {n_points}"
            )));
        }
        if !(delta_q.is_finite() && delta_q > 0.0) || !q_min.is_finite() {
            return Err(Error::InvalidGrid(format!("bad spacing {delta_q}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Grid {
            q_min,
            delta_q,
            n_points,
            hbar,
        })
    }

    /// Same lattice with a different value of hbar.
    pub fn with_hbar(self, hbar: f64) -> Result<Grid> {
        Grid::from_parts(self.q_min, self.delta_q, self.n_points, hbar)
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_min + self.delta_q * self.n_points as f64
    }

    pub fn delta_q(&self) -> f64 {
        self.delta_q
    }

    pub fn delta_p(&self) -> f64 {
        PI * self.hbar / (self.n_points as f64 * self.delta_q)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Planck's constant `h = 2 pi hbar`.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    pub fn q(&self, j: usize) -> f64 {
        self.q_min + j as f64 * self.delta_q
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.n_points / 2) as f64) * self.delta_p()
    }

    pub fn q_values(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n_points, |j| self.q(j))
    }

    pub fn p_values(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.n_points, |k| self.p(k))
    }

    /// Largest representable momentum magnitude, `pi hbar / (2 delta_q)`.
    pub fn p_max(&self) -> f64 {
        0.5 * PI * self.hbar / self.delta_q
    }

    /// Index of the momentum origin (always on the lattice).
    pub fn p_origin(&self) -> usize {
        self.n_points / 2
    }

    /// Index of `q = 0`, if it is a lattice point.
    pub fn q_origin(&self) -> Option<usize> {
        let x = -self.q_min / self.delta_q;
        let j = x.round();
        ((x - j).abs() < 1e-9 && j >= 0.0 && j < self.n_points as f64).then_some(j as usize)
    }

    pub(crate) fn q_origin_or_err(&self) -> Result<usize> {
        self.q_origin().ok_or(Error::OriginOffLattice)
    }

    /// Lattice index closest to `q`, clamped to the grid.
    pub fn nearest_q_index(&self, q: f64) -> usize {
        let x = ((q - self.q_min) / self.delta_q).round();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Converts a coordinate shift to a whole number of lattice cells.
    pub(crate) fn q_steps(&self, shift: f64) -> Result<i64> {
        lattice_steps(shift, self.delta_q)
    }

    pub(crate) fn p_steps(&self, shift: f64) -> Result<i64> {
        lattice_steps(shift, self.delta_p())
    }

    /// True when both grids describe the same lattice (relative tolerance 1e-12).
    pub fn matches(&self, other: &Grid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= GRID_RTOL * a.abs().max(b.abs()).max(1.0);
        self.n_points == other.n_points
            && close(self.q_min, other.q_min)
            && close(self.delta_q, other.delta_q)
            && close(self.hbar, other.hbar)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn lattice_steps(shift: f64, spacing: f64) -> Result<i64> {
    let x = shift / spacing;
    let n = x.round();
    if (x - n).abs() > 1e-9 {
        return Err(Error::OffsetOffLattice {
            value: shift,
            spacing,
        });
    }
    Ok(n as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Position => "position",
            Representation::Momentum => "momentum",
        })
    }
}

/// Complex amplitudes sampled on a [`Grid`], in either representation.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Array1<Complex64>,
    representation: Representation,
}

impl WaveFunction {
    pub fn new(
        grid: Grid,
        amplitudes: Array1<Complex64>,
        representation: Representation,
    ) -> Result<WaveFunction> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                found: amplitudes.len(),
            });
        }
        Ok(WaveFunction {
            grid,
            amplitudes,
            representation,
        })
    }

    /// Samples `f(q)` on the coordinate lattice.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Grid, f: F) -> WaveFunction {
        let amplitudes = Array1::from_shape_fn(grid.n_points(), |j| f(grid.q(j)));
        WaveFunction {
            grid,
            amplitudes,
            representation: Representation::Position,
        }
    }

    /// Samples `f(p)` on the momentum lattice.
    pub fn from_momentum_fn<F: Fn(f64) -> Complex64>(grid: Grid, f: F) -> WaveFunction {
        let amplitudes = Array1::from_shape_fn(grid.n_points(), |k| f(grid.p(k)));
        WaveFunction {
            grid,
            amplitudes,
            representation: Representation::Momentum,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amplitudes
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    /// Coordinate (or momentum) value of sample `i`.
    pub fn abscissa(&self, i: usize) -> f64 {
        match self.representation {
            Representation::Position => self.grid.q(i),
            Representation::Momentum => self.grid.p(i),
        }
    }

    /// Quadrature weight of one sample.
    pub fn weight(&self) -> f64 {
        match self.representation {
            Representation::Position => self.grid.delta_q(),
            Representation::Momentum => self.grid.delta_p(),
        }
    }

    /// `sum |psi_j|^2 delta`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.weight()
    }

    /// Largest magnitude among the two end samples.
    pub fn edge_amplitude(&self) -> f64 {
        let n = self.amplitudes.len();
        self.amplitudes[0].norm().max(self.amplitudes[n - 1].norm())
    }

    pub fn scaled(&self, factor: Complex64) -> WaveFunction {
        WaveFunction {
            grid: self.grid,
            amplitudes: self.amplitudes.mapv(|z| z * factor),
            representation: self.representation,
        }
    }

    pub(crate) fn require(&self, representation: Representation) -> Result<()> {
        if self.representation == representation {
            Ok(())
        } else {
            Err(Error::WrongRepresentation {
                expected: representation,
                found: self.representation,
            })
        }
    }

    pub(crate) fn warn_if_edges_populated(&self) {
        let edge = self.edge_amplitude();
        if edge > EDGE_WARNING {
            log::warn!(
                "amplitude {edge:e} at the grid edge; expect wraparound artifacts, enlarge the grid"
            );
        }
    }
}

/// Rescales to unit quadrature norm.
pub fn normalize(psi: &WaveFunction) -> Result<WaveFunction> {
    let norm = psi.norm_sqr().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroNorm);
    }
    Ok(psi.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// `sum conj(a_j) b_j delta`.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    a.grid.check_same(&b.grid)?;
    if a.representation != b.representation {
        return Err(Error::WrongRepresentation {
            expected: a.representation,
            found: b.representation,
        });
    }
    let sum: Complex64 = a
        .amplitudes
        .iter()
        .zip(b.amplitudes.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(sum * a.weight())
}

/// Momentum amplitudes `h^{-1/2} sum_j psi_j exp(-i p_k q_j / hbar) delta_q`
/// on the momentum lattice.
///
/// With `delta_p delta_q = pi hbar / N` the kernel is a DFT of length `2N`
/// over the zero-padded samples; only the central `N` frequencies lie on the
/// lattice. Every state whose momentum content fits `[-p_max, p_max)` is
/// transformed to spectral accuracy.
pub fn fourier_transform(psi: &WaveFunction) -> Result<WaveFunction> {
    psi.require(Representation::Position)?;
    let grid = psi.grid;
    let n = grid.n_points();
    let m = 2 * n;
    let plan = Plan::new(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(psi.amplitudes.as_slice().expect("contiguous"));
    plan.forward(&mut buf);
    let scale = grid.delta_q() / grid.h().sqrt();
    let phase_step = grid.delta_p() * grid.q_min() / grid.hbar();
    let amplitudes = Array1::from_shape_fn(n, |k| {
        let s = k as i64 - (n / 2) as i64;
        let phase = Complex64::from_polar(1.0, -(s as f64) * phase_step);
        buf[s.rem_euclid(m as i64) as usize] * phase * scale
    });
    Ok(WaveFunction {
        grid,
        amplitudes,
        representation: Representation::Momentum,
    })
}

/// Inverse of [`fourier_transform`]:
/// `psi_j = h^{-1/2} sum_k phi_k exp(i p_k q_j / hbar) delta_p`.
pub fn inverse_fourier_transform(phi: &WaveFunction) -> Result<WaveFunction> {
    phi.require(Representation::Momentum)?;
    let grid = phi.grid;
    let n = grid.n_points();
    let m = 2 * n;
    let plan = Plan::new(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let phase_step = grid.delta_p() * grid.q_min() / grid.hbar();
    for (k, z) in phi.amplitudes.iter().enumerate() {
        let s = k as i64 - (n / 2) as i64;
        buf[s.rem_euclid(m as i64) as usize] =
            z * Complex64::from_polar(1.0, s as f64 * phase_step);
    }
    plan.inverse(&mut buf);
    let scale = grid.delta_p() / grid.h().sqrt();
    let amplitudes = Array1::from_shape_fn(n, |j| buf[j] * scale);
    Ok(WaveFunction {
        grid,
        amplitudes,
        representation: Representation::Position,
    })
}
