//! FFT plumbing shared by the transforms, filters and propagators.
//!
//! Lattice axes are either periodic (the momentum axis, which is the DFT dual
//! of the correlation offsets) or zero-extended (the coordinate axis). The
//! helpers here make that distinction explicit.

use std::sync::Arc;

use ndarray::{Array2, ArrayViewMut1, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plan {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// `X_f = sum_k x_k exp(-2 pi i f k / n)`.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Unnormalized inverse, `x_k = sum_f X_f exp(+2 pi i f k / n)`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

/// Real-to-complex plan for filtering real lanes by a per-bin factor.
#[derive(Clone)]
pub(crate) struct RealPlan {
    n: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl RealPlan {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = RealFftPlanner::new();
        RealPlan {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Number of non-negative frequency bins, `n/2 + 1`.
    pub(crate) fn bins(&self) -> usize {
        self.n / 2 + 1
    }

    /// Multiplies bin `f` of the lane's spectrum by `factor[f]` (already
    /// divided by `n`) and transforms back. The DC and Nyquist factors must
    /// be real.
    pub(crate) fn filter(&self, lane: &mut [f64], buffers: &mut RealBuffers, factor: &[Complex64]) {
        let RealBuffers { spectrum, scratch } = buffers;
        self.forward
            .process_with_scratch(lane, spectrum, scratch)
            .expect("buffers sized by the plan");
        for (z, f) in spectrum.iter_mut().zip(factor) {
            *z *= f;
        }
        let last = spectrum.len() - 1;
        spectrum[0].im = 0.0;
        spectrum[last].im = 0.0;
        self.inverse
            .process_with_scratch(spectrum, lane, scratch)
            .expect("buffers sized by the plan");
    }

    pub(crate) fn buffers(&self) -> RealBuffers {
        let len = self
            .forward
            .get_scratch_len()
            .max(self.inverse.get_scratch_len());
        RealBuffers {
            spectrum: self.forward.make_output_vec(),
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }
}

pub(crate) struct RealBuffers {
    spectrum: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Filters every real lane along `axis` with `plan`, lane `i` by
/// `factors.row(i)`.
pub(crate) fn filter_real_lanes(
    arr: &mut Array2<f64>,
    axis: Axis,
    plan: &RealPlan,
    factors: &Array2<Complex64>,
) {
    let other = Axis(1 - axis.index());
    arr.axis_iter_mut(other)
        .into_par_iter()
        .enumerate()
        .for_each_init(
            || (plan.buffers(), vec![0.0; plan.n]),
            |(buffers, staging), (i, mut lane)| {
                let factor = factors.row(i);
                let factor = factor.as_slice().expect("standard layout");
                if let Some(slice) = lane.as_slice_mut() {
                    plan.filter(slice, buffers, factor);
                } else {
                    staging
                        .iter_mut()
                        .zip(lane.iter())
                        .for_each(|(d, s)| *d = *s);
                    plan.filter(staging, buffers, factor);
                    lane.iter_mut()
                        .zip(staging.iter())
                        .for_each(|(d, s)| *d = *s);
                }
            },
        );
}

/// Signed frequency index of FFT bin `f` for a transform of length `n`.
/// The Nyquist bin of an even transform maps to `-n/2`.
pub(crate) fn signed_index(f: usize, n: usize) -> i64 {
    if f < n.div_ceil(2) {
        f as i64
    } else {
        f as i64 - n as i64
    }
}

pub(crate) fn is_nyquist(f: usize, n: usize) -> bool {
    n.is_multiple_of(2) && f == n / 2
}

/// Runs `op(lane_index, lane)` on every lane along `axis`, in parallel.
/// Non-contiguous lanes are staged through a scratch buffer.
pub(crate) fn for_each_lane<F>(arr: &mut Array2<Complex64>, axis: Axis, op: F)
where
    F: Fn(usize, &mut [Complex64]) + Sync,
{
    let other = Axis(1 - axis.index());
    arr.axis_iter_mut(other)
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut lane): (usize, ArrayViewMut1<Complex64>)| {
            if let Some(slice) = lane.as_slice_mut() {
                op(i, slice);
            } else {
                let mut buf = lane.to_vec();
                op(i, &mut buf);
                lane.iter_mut().zip(buf).for_each(|(dst, src)| *dst = src);
            }
        });
}

pub(crate) fn to_complex(arr: &Array2<f64>) -> Array2<Complex64> {
    arr.mapv(|x| Complex64::new(x, 0.0))
}

/// Spectral derivatives of the given orders along `axis` with sample spacing
/// `spacing`. The lanes are treated as periodic. Odd orders drop the Nyquist
/// bin so that real input stays real.
pub(crate) fn derivatives(
    arr: &Array2<f64>,
    axis: Axis,
    spacing: f64,
    orders: &[u32],
) -> Vec<Array2<f64>> {
    let n = arr.len_of(axis);
    let plan = Plan::new(n);
    let mut spectrum = to_complex(arr);
    for_each_lane(&mut spectrum, axis, |_, buf| plan.forward(buf));
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    orders
        .iter()
        .map(|&order| {
            let mut work = spectrum.clone();
            for_each_lane(&mut work, axis, |_, buf| {
                for (f, x) in buf.iter_mut().enumerate() {
                    let k = signed_index(f, n) as f64 * dk;
                    if order % 2 == 1 && is_nyquist(f, n) {
                        *x = Complex64::new(0.0, 0.0);
                    } else {
                        *x *= Complex64::new(0.0, k).powu(order);
                    }
                }
                plan.inverse(buf);
            });
            work.mapv(|z| z.re / n as f64)
        })
        .collect()
}

/// `out[j, k] = sum_k' a[j, k'] b[j, (k - k' + n/2) mod n]`: circular
/// convolution along axis 1, where `b` is indexed by displacement with its
/// origin at column `n/2`.
pub(crate) fn circular_convolve_columns(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (rows, n) = a.dim();
    let plan = Plan::new(n);
    let mut fa = to_complex(a);
    let mut fb = to_complex(b);
    for_each_lane(&mut fa, Axis(1), |_, buf| plan.forward(buf));
    for_each_lane(&mut fb, Axis(1), |_, buf| plan.forward(buf));
    fa.zip_mut_with(&fb, |x, y| *x *= *y);
    for_each_lane(&mut fa, Axis(1), |_, buf| plan.inverse(buf));
    let scale = 1.0 / n as f64;
    Array2::from_shape_fn((rows, n), |(j, k)| fa[(j, (k + n / 2) % n)].re * scale)
}

/// `out[j, k] = sum_j' a[j', k] b[j - j' + origin, k]`, with both operands
/// zero outside their rows (aperiodic convolution along axis 0). `b` is
/// indexed by displacement with its origin at row `origin`.
pub(crate) fn linear_convolve_rows(a: &Array2<f64>, b: &Array2<f64>, origin: usize) -> Array2<f64> {
    let (n, cols) = a.dim();
    let padded = 2 * n;
    let plan = Plan::new(padded);
    let pad = |m: &Array2<f64>| {
        let mut out = Array2::<Complex64>::zeros((padded, cols));
        out.slice_mut(ndarray::s![..n, ..]).assign(&to_complex(m));
        out
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    for_each_lane(&mut fa, Axis(0), |_, buf| plan.forward(buf));
    for_each_lane(&mut fb, Axis(0), |_, buf| plan.forward(buf));
    fa.zip_mut_with(&fb, |x, y| *x *= *y);
    for_each_lane(&mut fa, Axis(0), |_, buf| plan.inverse(buf));
    let scale = 1.0 / padded as f64;
    Array2::from_shape_fn((n, cols), |(j, k)| fa[(j + origin, k)].re * scale)
}

/// Both of the above at once: aperiodic along axis 0 (origin row `origin`),
/// circular along axis 1 (origin column `n/2`).
pub(crate) fn convolve_2d(a: &Array2<f64>, b: &Array2<f64>, origin: usize) -> Array2<f64> {
    let (n, cols) = a.dim();
    let padded = 2 * n;
    let row_plan = Plan::new(padded);
    let col_plan = Plan::new(cols);
    let transform = |m: &Array2<f64>| {
        let mut out = Array2::<Complex64>::zeros((padded, cols));
        out.slice_mut(ndarray::s![..n, ..]).assign(&to_complex(m));
        for_each_lane(&mut out, Axis(1), |_, buf| col_plan.forward(buf));
        for_each_lane(&mut out, Axis(0), |_, buf| row_plan.forward(buf));
        out
    };
    let mut fa = transform(a);
    let fb = transform(b);
    fa.zip_mut_with(&fb, |x, y| *x *= *y);
    for_each_lane(&mut fa, Axis(0), |_, buf| row_plan.inverse(buf));
    for_each_lane(&mut fa, Axis(1), |_, buf| col_plan.inverse(buf));
    let scale = 1.0 / (padded * cols) as f64;
    Array2::from_shape_fn((n, cols), |(j, k)| {
        fa[(j + origin, (k + cols / 2) % cols)].re * scale
    })
}
