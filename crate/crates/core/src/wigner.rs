//! The Wigner distribution on the phase-space lattice and the calculus built
//! on it: marginals, expectation values, overlaps, purity, and recovery of
//! the wavefunction.
//!
//! For each coordinate sample `q_j` the correlation
//! `c_j(m) = conj(psi(q_j - m dq)) psi(q_j + m dq)` is formed for every lattice
//! offset `m` (zero beyond the grid edge) and transformed over `m`:
//!
//! ```text
//! W(q_j, p_k) = (2 dq / h) sum_m c_j(m) exp(-2 i p_k m dq / hbar)
//! ```
//!
//! which is the Riemann sum of the defining integral over `x = 2 m dq`.

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, Representation, WaveFunction};
use crate::spectral::{self, Plan};

/// States whose squared norm deviates from 1 by more than this are rejected.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Purity threshold above which a distribution counts as a pure state.
pub const PURE_THRESHOLD: f64 = 1.0 - 1e-6;

/// Minimum `|psi(0)|` accepted by [`recover_wavefunction`].
pub const REFERENCE_MIN: f64 = 1e-6;

/// A real distribution over the `q x p` lattice, indexed `[q_index, p_index]`.
#[derive(Clone, Debug)]
pub struct WignerFunction {
    grid: Grid,
    values: Array2<f64>,
}

impl WignerFunction {
    pub fn new(grid: Grid, values: Array2<f64>) -> Result<WignerFunction> {
        let n = grid.n_points();
        if values.dim() != (n, n) {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        Ok(WignerFunction { grid, values })
    }

    /// Evaluates `f(q, p)` on every lattice point.
    pub fn from_fn<F: Fn(f64, f64) -> f64 + Sync>(grid: Grid, f: F) -> WignerFunction {
        let n = grid.n_points();
        let mut values = Array2::zeros((n, n));
        values
            .axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(j, mut row)| {
                let q = grid.q(j);
                for (k, v) in row.iter_mut().enumerate() {
                    *v = f(q, grid.p(k));
                }
            });
        WignerFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn cell_area(&self) -> f64 {
        self.grid.delta_q() * self.grid.delta_p()
    }

    /// `sum W dq dp`.
    pub fn mass(&self) -> f64 {
        self.values.sum() * self.cell_area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &WignerFunction) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Rescaled to unit mass.
    pub fn normalized(&self) -> Result<WignerFunction> {
        let mass = self.mass();
        if !(mass.abs() > 0.0 && mass.is_finite()) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(1.0 / mass))
    }

    pub fn scaled(&self, factor: f64) -> WignerFunction {
        WignerFunction {
            grid: self.grid,
            values: &self.values * factor,
        }
    }

    /// Cyclic shift by a whole number of momentum cells.
    pub(crate) fn shifted_p(&self, steps: i64) -> WignerFunction {
        let n = self.grid.n_points() as i64;
        let values = Array2::from_shape_fn(self.values.dim(), |(j, k)| {
            self.values[(j, (k as i64 - steps).rem_euclid(n) as usize)]
        });
        WignerFunction {
            grid: self.grid,
            values,
        }
    }

    /// Shift by a whole number of coordinate cells, zero-filled.
    pub(crate) fn shifted_q(&self, steps: i64) -> WignerFunction {
        let n = self.grid.n_points() as i64;
        let values = Array2::from_shape_fn(self.values.dim(), |(j, k)| {
            let src = j as i64 - steps;
            if (0..n).contains(&src) {
                self.values[(src as usize, k)]
            } else {
                0.0
            }
        });
        WignerFunction {
            grid: self.grid,
            values,
        }
    }
}

/// Complex matrix `<q_a| rho |q_b>` sampled on the coordinate lattice, so that
/// `trace * dq = 1`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    grid: Grid,
    entries: Array2<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12 max abs) and unit trace (1e-10).
    pub fn new(grid: Grid, entries: Array2<Complex64>) -> Result<DensityMatrix> {
        let n = grid.n_points();
        if entries.dim() != (n, n) {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let mut deviation: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                deviation = deviation.max((entries[(a, b)] - entries[(b, a)].conj()).norm());
            }
        }
        if deviation > 1e-12 {
            return Err(Error::NotHermitian(deviation));
        }
        let trace: f64 = entries.diag().iter().map(|z| z.re).sum::<f64>() * grid.delta_q();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidTrace(trace));
        }
        Ok(DensityMatrix { grid, entries })
    }

    /// `|psi><psi|` for a normalized position-space state.
    pub fn pure(psi: &WaveFunction) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&[(1.0, psi.clone())])
    }

    /// `sum_i w_i |psi_i><psi_i|`; weights must sum to one.
    pub fn mixture(components: &[(f64, WaveFunction)]) -> Result<DensityMatrix> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let grid = *first.1.grid();
        let n = grid.n_points();
        let mut entries = Array2::<Complex64>::zeros((n, n));
        for (weight, psi) in components {
            psi.require(Representation::Position)?;
            grid.check_same(psi.grid())?;
            check_normalized(psi)?;
            let amps = psi.amplitudes();
            for a in 0..n {
                for b in 0..n {
                    entries[(a, b)] += amps[a] * amps[b].conj() * *weight;
                }
            }
        }
        DensityMatrix::new(grid, entries)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Whether the smallest eigenvalue of `rho dq` is at least `-tol`
    /// (Cholesky factorization of `rho dq + tol I`).
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let n = self.grid.n_points();
        let dq = self.grid.delta_q();
        let mut l = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.entries[(i, j)] * dq;
                if i == j {
                    sum += tol;
                }
                for k in 0..j {
                    sum -= l[(i, k)] * l[(j, k)].conj();
                }
                if i == j {
                    if sum.re <= 0.0 {
                        return false;
                    }
                    l[(i, i)] = Complex64::new(sum.re.sqrt(), 0.0);
                } else {
                    l[(i, j)] = sum / l[(j, j)].re;
                }
            }
        }
        true
    }
}

fn check_normalized(psi: &WaveFunction) -> Result<()> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        Err(Error::NotNormalized(norm))
    } else {
        Ok(())
    }
}

/// Fourier transforms the lattice correlation `corr(j, m)` over `m`.
fn transform_correlation<C>(grid: &Grid, corr: C) -> WignerFunction
where
    C: Fn(usize, usize, usize) -> Complex64 + Sync,
{
    let n = grid.n_points();
    let plan = Plan::new(n);
    let scale = 2.0 * grid.delta_q() / grid.h();
    let mut values = Array2::<f64>::zeros((n, n));
    let residue = values
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(j, mut row)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let reach = j.min(n - 1 - j);
            buf[0] = corr(j, j, j);
            for m in 1..=reach {
                buf[m] = corr(j, j + m, j - m);
                buf[n - m] = corr(j, j - m, j + m);
            }
            plan.forward(&mut buf);
            let mut residue: f64 = 0.0;
            // p_k = (k - n/2) dp  <=>  FFT bin (k + n/2) mod n
            for (k, v) in row.iter_mut().enumerate() {
                let z = buf[(k + n / 2) % n] * scale;
                residue = residue.max(z.im.abs());
                *v = z.re;
            }
            residue
        })
        .reduce(|| 0.0, f64::max);
    let w = WignerFunction {
        grid: *grid,
        values,
    };
    let magnitude = w.values.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    debug_assert!(
        residue <= 1e-10 * magnitude,
        "imaginary residue {residue:e} in Wigner transform"
    );
    w
}

/// Wigner function of any position-space amplitude array, without the
/// normalization check (filter devices are not unit-norm).
pub(crate) fn wdf_unchecked(psi: &WaveFunction) -> Result<WignerFunction> {
    psi.require(Representation::Position)?;
    psi.warn_if_edges_populated();
    let amps = psi.amplitudes();
    // corr(j, plus, minus) = conj(psi[minus]) * psi[plus]
    Ok(transform_correlation(psi.grid(), |_, plus, minus| {
        amps[minus].conj() * amps[plus]
    }))
}

/// Wigner function of a normalized position-space wavefunction.
pub fn wdf_from_wavefunction(psi: &WaveFunction) -> Result<WignerFunction> {
    psi.require(Representation::Position)?;
    check_normalized(psi)?;
    wdf_unchecked(psi)
}

/// Wigner function of a density matrix, from `<q + x/2| rho |q - x/2>`.
pub fn wdf_from_density(rho: &DensityMatrix) -> WignerFunction {
    let e = &rho.entries;
    transform_correlation(&rho.grid, |_, plus, minus| e[(plus, minus)])
}

/// Inverse of the correlation transform: `c_j(m)` for `m in [-n/2, n/2)`,
/// stored at FFT position `m mod n`.
fn correlations(w: &WignerFunction) -> Array2<Complex64> {
    let grid = w.grid;
    let n = grid.n_points();
    let plan = Plan::new(n);
    let dp = grid.delta_p();
    let mut out = Array2::<Complex64>::zeros((n, n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(j, mut row)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for k in 0..n {
                buf[(k + n / 2) % n] = Complex64::new(w.values[(j, k)], 0.0);
            }
            plan.inverse(&mut buf);
            for (m, v) in row.iter_mut().enumerate() {
                *v = buf[m] * dp;
            }
        });
    out
}

/// Recovers the pure state from its Wigner function, up to a global phase
/// fixed by making `psi` real and positive at the lattice point nearest
/// `q = 0`.
///
/// The lattice correlation links `q_j - m dq` to `q_j + m dq`, i.e. only
/// samples of equal index parity. Samples with the reference's parity come
/// straight from `psi(q_n) conj(psi(q_ref)) = c_{(n+ref)/2}((n-ref)/2)`; the
/// other half are band-limited interpolants of those, which is exact for
/// states whose momentum content fits the lattice.
pub fn recover_wavefunction(w: &WignerFunction) -> Result<WaveFunction> {
    let p = purity(w);
    if p < PURE_THRESHOLD {
        return Err(Error::NotPure(p));
    }
    let grid = w.grid;
    let n = grid.n_points();
    let corr = correlations(w);
    let reference = grid.nearest_q_index(0.0);
    let ref_sqr = corr[(reference, 0)].re;
    let ref_amp = ref_sqr.max(0.0).sqrt();
    if ref_amp < REFERENCE_MIN {
        return Err(Error::ReferenceTooSmall(ref_amp));
    }

    let start = reference % 2;
    let same: Vec<Complex64> = (start..n)
        .step_by(2)
        .map(|idx| {
            let j = (idx + reference) / 2;
            let m = (idx as i64 - reference as i64) / 2;
            corr[(j, m.rem_euclid(n as i64) as usize)] / ref_amp
        })
        .collect();
    let between = half_sample_shift(&same);

    let mut amps = Array1::<Complex64>::zeros(n);
    for (i, z) in same.iter().enumerate() {
        amps[start + 2 * i] = *z;
    }
    for (i, z) in between.iter().enumerate() {
        // between[i] sits at index start + 2i + 1; the last one wraps to 0
        let idx = start + 2 * i + 1;
        if idx < n {
            amps[idx] = *z;
        } else if start == 1 {
            amps[0] = *z;
        }
    }
    let psi = WaveFunction::new(grid, amps, Representation::Position)?;
    crate::grid::normalize(&psi)
}

/// Values halfway between consecutive samples of a periodic band-limited
/// sequence.
fn half_sample_shift(samples: &[Complex64]) -> Vec<Complex64> {
    let len = samples.len();
    let plan = Plan::new(len);
    let mut buf = samples.to_vec();
    plan.forward(&mut buf);
    for (f, z) in buf.iter_mut().enumerate() {
        if spectral::is_nyquist(f, len) {
            *z *= 0.0;
        } else {
            let s = spectral::signed_index(f, len) as f64;
            *z *= Complex64::from_polar(1.0, std::f64::consts::PI * s / len as f64);
        }
    }
    plan.inverse(&mut buf);
    buf.iter().map(|z| z / len as f64).collect()
}

/// `|psi(q_j)|^2 = sum_k W(q_j, p_k) dp`.
pub fn marginal_q(w: &WignerFunction) -> Array1<f64> {
    w.values.sum_axis(Axis(1)) * w.grid.delta_p()
}

/// `|phi(p_k)|^2 = sum_j W(q_j, p_k) dq`.
pub fn marginal_p(w: &WignerFunction) -> Array1<f64> {
    w.values.sum_axis(Axis(0)) * w.grid.delta_q()
}

/// Phase-space average of a symbol `A(q, p)`.
///
/// This equals the quantum expectation value of the operator only when `A` is
/// its Weyl symbol; polynomials in `q` alone or `p` alone, and sums of them,
/// qualify.
pub fn expectation<F: Fn(f64, f64) -> f64 + Sync>(w: &WignerFunction, symbol: F) -> f64 {
    let grid = w.grid;
    let total: f64 = w
        .values
        .axis_iter(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(j, row)| {
            let q = grid.q(j);
            row.iter()
                .enumerate()
                .map(|(k, v)| symbol(q, grid.p(k)) * v)
                .sum::<f64>()
        })
        .sum();
    total * w.cell_area()
}

/// First and second moments of a distribution.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Moments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
    pub cov_qp: f64,
}

pub fn moments(w: &WignerFunction) -> Moments {
    let mq = marginal_q(w);
    let mp = marginal_p(w);
    let grid = w.grid;
    let dq = grid.delta_q();
    let dp = grid.delta_p();
    let q = grid.q_values();
    let p = grid.p_values();
    let mean_q = (&mq * &q).sum() * dq;
    let mean_p = (&mp * &p).sum() * dp;
    let var_q = (&mq * &q.mapv(|x| (x - mean_q).powi(2))).sum() * dq;
    let var_p = (&mp * &p.mapv(|x| (x - mean_p).powi(2))).sum() * dp;
    let cov_qp = expectation(w, |x, y| (x - mean_q) * (y - mean_p));
    Moments {
        mean_q,
        mean_p,
        var_q,
        var_p,
        cov_qp,
    }
}

/// `Delta q * Delta p` from the phase-space moments.
pub fn uncertainty_product(w: &WignerFunction) -> Result<f64> {
    let m = moments(w);
    for var in [m.var_q, m.var_p] {
        if var < 0.0 {
            return Err(Error::NegativeVariance(var));
        }
    }
    Ok((m.var_q * m.var_p).sqrt())
}

/// Transition probability `h sum W1 W2 dq dp`.
pub fn overlap_probability(w1: &WignerFunction, w2: &WignerFunction) -> Result<f64> {
    w1.grid.check_same(&w2.grid)?;
    let dot: f64 = w1
        .values
        .iter()
        .zip(w2.values.iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(w1.grid.h() * dot * w1.cell_area())
}

/// `h sum W^2 dq dp`; one for pure states.
pub fn purity(w: &WignerFunction) -> f64 {
    w.grid.h() * w.values.iter().map(|v| v * v).sum::<f64>() * w.cell_area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        make_grid(-12.0, 12.0, 256).unwrap()
    }

    fn gaussian(grid: Grid, q0: f64, c: f64, p0: f64) -> WaveFunction {
        let norm = (PI * q0 * q0).powf(-0.25);
        WaveFunction::from_fn(grid, |q| {
            Complex64::from_polar(
                norm * (-(q - c).powi(2) / (2.0 * q0 * q0)).exp(),
                p0 * q / grid.hbar(),
            )
        })
    }

    #[test]
    fn gaussian_peak() {
        let w = wdf_from_wavefunction(&gaussian(grid(), 1.0, 0.0, 0.0)).unwrap();
        let (j, k) = (128, 128);
        assert!((w.values()[(j, k)] - 1.0 / PI).abs() < 1e-12);
        assert!((w.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_unnormalized() {
        let g = grid();
        let zero = WaveFunction::new(g, Array1::zeros(256), Representation::Position).unwrap();
        assert!(matches!(
            wdf_from_wavefunction(&zero),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn density_agrees_with_pure_state() {
        let psi = gaussian(grid(), 0.9, 0.5, 1.0);
        let a = wdf_from_wavefunction(&psi).unwrap();
        let b = wdf_from_density(&DensityMatrix::pure(&psi).unwrap());
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn mixture_has_no_interference() {
        let g = grid();
        let left = gaussian(g, 1.0, -4.0, 0.0);
        let right = gaussian(g, 1.0, 4.0, 0.0);
        let rho = DensityMatrix::mixture(&[(0.5, left.clone()), (0.5, right.clone())]).unwrap();
        let w = wdf_from_density(&rho);
        let wl = wdf_from_wavefunction(&left).unwrap();
        let wr = wdf_from_wavefunction(&right).unwrap();
        let expected = WignerFunction::new(g, (wl.values() + wr.values()) * 0.5).unwrap();
        assert!(w.max_abs_diff(&expected) < 1e-12);
        // no fringes at the origin
        assert!(w.values()[(128, 128)].abs() < 1e-6);
        assert!((purity(&w) - 0.5).abs() < 1e-8);
        assert!(rho.is_positive_semidefinite(1e-10));
    }

    #[test]
    fn two_point_diagonal_is_flat_in_p() {
        let g = make_grid(-4.0, 4.0, 32).unwrap();
        let mut e = Array2::<Complex64>::zeros((32, 32));
        let v = 0.5 / g.delta_q();
        e[(10, 10)] = Complex64::new(v, 0.0);
        e[(20, 20)] = Complex64::new(v, 0.0);
        let w = wdf_from_density(&DensityMatrix::new(g, e).unwrap());
        let expected = 2.0 * g.delta_q() / g.h() * v;
        for k in 0..32 {
            assert!((w.values()[(10, k)] - expected).abs() < 1e-14);
            assert!((w.values()[(20, k)] - expected).abs() < 1e-14);
            assert!(w.values()[(15, k)].abs() < 1e-14);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let g = make_grid(-4.0, 4.0, 16).unwrap();
        let mut e = Array2::<Complex64>::zeros((16, 16));
        e[(3, 3)] = Complex64::new(1.0 / g.delta_q(), 0.0);
        e[(3, 4)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(g, e),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn gaussian_moments() {
        let q0 = 1.3;
        let w = wdf_from_wavefunction(&gaussian(grid(), q0, 0.0, 0.0)).unwrap();
        assert!((expectation(&w, |_, _| 1.0) - 1.0).abs() < 1e-8);
        assert!((expectation(&w, |q, _| q * q) - q0 * q0 / 2.0).abs() < 1e-8);
        assert!((expectation(&w, |_, p| p * p) - 1.0 / (2.0 * q0 * q0)).abs() < 1e-8);
        assert!((uncertainty_product(&w).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn negative_variance_is_reported() {
        let g = make_grid(-4.0, 4.0, 16).unwrap();
        let mut v = Array2::zeros((16, 16));
        // negative weight far out, positive at the centre: <q^2> < 0
        v[(0, 8)] = -1.0;
        v[(8, 8)] = 2.0;
        let w = WignerFunction::new(g, v).unwrap();
        assert!(matches!(
            uncertainty_product(&w),
            Err(Error::NegativeVariance(_))
        ));
    }

    #[test]
    fn recovery_round_trip() {
        let psi = gaussian(grid(), 1.1, 0.7, -1.3);
        let w = wdf_from_wavefunction(&psi).unwrap();
        let back = recover_wavefunction(&w).unwrap();
        let phase = psi.amplitudes()[128] / psi.amplitudes()[128].norm();
        let err = back
            .amplitudes()
            .iter()
            .zip(psi.amplitudes().iter())
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "recovery error {err}");
    }

    #[test]
    fn recovery_rejects_mixed_and_odd() {
        let g = grid();
        let left = gaussian(g, 1.0, -4.0, 0.0);
        let right = gaussian(g, 1.0, 4.0, 0.0);
        let rho = DensityMatrix::mixture(&[(0.5, left.clone()), (0.5, right.clone())]).unwrap();
        assert!(matches!(
            recover_wavefunction(&wdf_from_density(&rho)),
            Err(Error::NotPure(_))
        ));
        let odd = WaveFunction::from_fn(g, |q| {
            left.amplitudes()[g.nearest_q_index(q)] - right.amplitudes()[g.nearest_q_index(q)]
        });
        let odd = crate::grid::normalize(&odd).unwrap();
        assert!(matches!(
            recover_wavefunction(&wdf_from_wavefunction(&odd).unwrap()),
            Err(Error::ReferenceTooSmall(_))
        ));
    }
}
