//! Time evolution of the Wigner function under the Moyal equation
//!
//! ```text
//! dW/dt = -(p/m) dW/dq + V'(q) dW/dp
//!         + sum_{n>=1} (-1)^n (hbar/2)^{2n} / (2n+1)! V^{(2n+1)}(q) d^{2n+1}W/dp^{2n+1}
//! ```
//!
//! for polynomial potentials, where the series is finite. A split-step
//! Schrödinger propagator is provided as an independent check.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Representation, WaveFunction};
use crate::spectral::{self, is_nyquist, signed_index, Plan, RealPlan};
use crate::wigner::WignerFunction;

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

/// Mass drift at which propagation aborts.
pub const MASS_DRIFT_LIMIT: f64 = 1e-4;

/// Amplitude at the grid edge at which the split-step propagator aborts.
pub const EDGE_BREACH: f64 = 1e-6;

/// `V(q) = sum_k c_k q^k` and the particle mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub coefficients: Vec<f64>,
    pub mass: f64,
}

impl PotentialSpec {
    pub fn new(coefficients: Vec<f64>, mass: f64) -> Result<PotentialSpec> {
        let v = PotentialSpec { coefficients, mass };
        v.validate()?;
        Ok(v)
    }

    pub fn free(mass: f64) -> PotentialSpec {
        PotentialSpec {
            coefficients: vec![],
            mass,
        }
    }

    /// `m omega^2 q^2 / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> PotentialSpec {
        PotentialSpec {
            coefficients: vec![0.0, 0.0, 0.5 * mass * omega * omega],
            mass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite potential coefficient".into(),
            ));
        }
        if self.degree() > MAX_DEGREE {
            return Err(Error::InvalidParameter(format!(
                "potential degree {} exceeds {MAX_DEGREE}",
                self.degree()
            )));
        }
        Ok(())
    }

    /// Index of the highest non-zero coefficient (0 for a constant).
    pub fn degree(&self) -> usize {
        self.coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    /// Series order needed to sum the quantum corrections exactly.
    pub fn required_series_order(&self) -> usize {
        self.degree().saturating_sub(1) / 2
    }

    pub fn value(&self, q: f64) -> f64 {
        self.derivative(0, q)
    }

    /// `d^order V / dq^order` at `q`.
    pub fn derivative(&self, order: usize, q: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(order)
            .rev()
            .fold(0.0, |acc, (k, &c)| {
                let falling: f64 = ((k - order + 1)..=k).map(|x| x as f64).product();
                acc * q + c * falling
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Fourth-order symmetric composition of the exact free-streaming and
    /// potential sub-flows. Unconditionally stable.
    #[default]
    Split4,
    /// Classic Runge-Kutta on [`moyal_rhs`]; needs `dt` below
    /// [`rk4_stability_bound`].
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Largest `n` kept in the quantum series; 0 gives classical Liouville
    /// transport.
    #[serde(default = "full_series")]
    pub series_order: usize,
    #[serde(default)]
    pub stepper: Stepper,
}

fn full_series() -> usize {
    (MAX_DEGREE - 1) / 2
}

impl EvolutionConfig {
    /// Full quantum series and the default stepper.
    pub fn new(dt: f64, n_steps: usize) -> EvolutionConfig {
        EvolutionConfig {
            dt,
            n_steps,
            series_order: full_series(),
            stepper: Stepper::default(),
        }
    }

    /// Steps of at most `dt_max` that land exactly on `t`.
    pub fn for_duration(t: f64, dt_max: f64) -> Result<EvolutionConfig> {
        if !(t >= 0.0 && dt_max > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need t >= 0 and dt > 0, got t = {t}, dt = {dt_max}"
            )));
        }
        let n_steps = (t / dt_max).round().max(1.0) as usize;
        Ok(EvolutionConfig::new(
            t / n_steps as f64,
            if t == 0.0 { 0 } else { n_steps },
        ))
    }

    pub fn with_series_order(mut self, order: usize) -> EvolutionConfig {
        self.series_order = order;
        self
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> EvolutionConfig {
        self.stepper = stepper;
        self
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Coefficient of `V^{(2n+1)} d^{2n+1}W/dp^{2n+1}` in the Moyal series.
fn series_coefficient(n: usize, hbar: f64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let factorial: f64 = (1..=(2 * n + 1)).map(|x| x as f64).product();
    sign * (hbar / 2.0).powi(2 * n as i32) / factorial
}

fn effective_order(v: &PotentialSpec, series_order: usize) -> usize {
    let needed = v.required_series_order();
    if series_order < needed {
        log::warn!(
            "series order {series_order} drops quantum terms up to n = {needed} of a degree-{} potential",
            v.degree()
        );
    }
    series_order.min(needed)
}

/// `dW/dt` from the Moyal equation, with spectral derivatives in `q` and `p`.
pub fn moyal_rhs(
    w: &WignerFunction,
    v: &PotentialSpec,
    series_order: usize,
) -> Result<Array2<f64>> {
    v.validate()?;
    let order = effective_order(v, series_order);
    let grid = *w.grid();
    let dq_w = spectral::derivatives(w.values(), Axis(0), grid.delta_q(), &[1]).remove(0);
    let p_orders: Vec<u32> = (0..=order).map(|n| 2 * n as u32 + 1).collect();
    let dp_w = spectral::derivatives(w.values(), Axis(1), grid.delta_p(), &p_orders);
    let hbar = grid.hbar();
    let mass = v.mass;
    let n = grid.n_points();
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        let q = grid.q(j);
        let factors: Vec<f64> = (0..=order)
            .map(|s| series_coefficient(s, hbar) * v.derivative(2 * s + 1, q))
            .collect();
        for k in 0..n {
            let mut value = -(grid.p(k) / mass) * dq_w[(j, k)];
            for (s, f) in factors.iter().enumerate() {
                value += f * dp_w[s][(j, k)];
            }
            out[(j, k)] = value;
        }
    }
    Ok(out)
}

/// Largest `dt` accepted by [`Stepper::Rk4`]:
/// `0.5 min(m dq / p_max, dp / L)`, where `L` bounds the potential term's
/// rate `sum_n (hbar/2)^{2n} s^{2n} |V^{(2n+1)}(q)| / (2n+1)!` at the highest
/// resolved frequency `s = pi / dp`.
pub fn rk4_stability_bound(grid: &Grid, v: &PotentialSpec, series_order: usize) -> f64 {
    let order = series_order.min(v.required_series_order());
    let s_max = PI / grid.delta_p();
    let hbar = grid.hbar();
    let rate = (0..grid.n_points())
        .map(|j| {
            let q = grid.q(j);
            (0..=order)
                .map(|n| {
                    series_coefficient(n, hbar).abs()
                        * s_max.powi(2 * n as i32)
                        * v.derivative(2 * n + 1, q).abs()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let transport = v.mass * grid.delta_q() / grid.p_max();
    let potential = if rate > 0.0 {
        grid.delta_p() / rate
    } else {
        f64::INFINITY
    };
    0.5 * transport.min(potential)
}

/// Evolves `w` for `cfg.n_steps` steps of `cfg.dt`.
///
/// Aborts with [`Error::MassDrift`] if the mass moves by more than `1e-4`.
pub fn propagate(
    w: &WignerFunction,
    v: &PotentialSpec,
    cfg: &EvolutionConfig,
) -> Result<WignerFunction> {
    propagate_with(w, v, cfg, 0, |_, _| Ok(()))
}

/// As [`propagate`], calling `observe(step, w)` after every `every` steps
/// (never when `every` is 0).
pub fn propagate_with<F>(
    w: &WignerFunction,
    v: &PotentialSpec,
    cfg: &EvolutionConfig,
    every: usize,
    mut observe: F,
) -> Result<WignerFunction>
where
    F: FnMut(usize, &WignerFunction) -> Result<()>,
{
    v.validate()?;
    cfg.validate()?;
    let grid = *w.grid();
    let order = effective_order(v, cfg.series_order);
    let mass0 = w.mass();
    let check = |step: usize, state: &WignerFunction| -> Result<()> {
        let drift = (state.mass() - mass0).abs();
        if drift > MASS_DRIFT_LIMIT || !drift.is_finite() {
            Err(Error::MassDrift { step, drift })
        } else {
            Ok(())
        }
    };
    match cfg.stepper {
        Stepper::Rk4 => {
            let bound = rk4_stability_bound(&grid, v, order);
            if cfg.dt > bound {
                return Err(Error::StabilityBound { dt: cfg.dt, bound });
            }
            let mut state = w.clone();
            for step in 1..=cfg.n_steps {
                state = rk4_step(&state, v, order, cfg.dt)?;
                check(step, &state)?;
                if every > 0 && step % every == 0 {
                    observe(step, &state)?;
                }
            }
            Ok(state)
        }
        Stepper::Split4 => {
            let flow = SplitFlow::new(&grid, v, order, cfg.dt);
            let mut work = w.values().clone();
            let mut owed = Owed::Nothing;
            for step in 1..=cfg.n_steps {
                owed = flow.step(&mut work, owed);
                let want_state = every > 0 && step % every == 0;
                if want_state || step == cfg.n_steps || step % 64 == 0 {
                    owed = flow.settle(&mut work, owed);
                    let state = WignerFunction::new(grid, work.clone())?;
                    check(step, &state)?;
                    if want_state {
                        observe(step, &state)?;
                    }
                }
            }
            WignerFunction::new(grid, work)
        }
    }
}

fn rk4_step(
    w: &WignerFunction,
    v: &PotentialSpec,
    order: usize,
    dt: f64,
) -> Result<WignerFunction> {
    let grid = *w.grid();
    let at = |base: &WignerFunction, k: &Array2<f64>, h: f64| {
        WignerFunction::new(grid, base.values() + &(k * h))
    };
    let k1 = moyal_rhs(w, v, order)?;
    let k2 = moyal_rhs(&at(w, &k1, dt / 2.0)?, v, order)?;
    let k3 = moyal_rhs(&at(w, &k2, dt / 2.0)?, v, order)?;
    let k4 = moyal_rhs(&at(w, &k3, dt)?, v, order)?;
    let incr = (k1 + &(k2 * 2.0) + &(k3 * 2.0) + &k4) * (dt / 6.0);
    WignerFunction::new(grid, w.values() + &incr)
}

/// The Yoshida triple-jump composition of Strang steps, with adjacent
/// free-streaming substeps merged across step boundaries.
struct SplitFlow {
    q_plan: RealPlan,
    p_plan: RealPlan,
    /// Free-streaming factors `[p-column][q-frequency]` for `w1 dt / 2`,
    /// `(w0 + w1) dt / 2` and `w1 dt`.
    drift_half: Array2<Complex64>,
    drift_middle: Array2<Complex64>,
    drift_merged: Array2<Complex64>,
    /// Potential factors `[q-row][p-frequency]` for `w1 dt` and `w0 dt`.
    kick_w1: Array2<Complex64>,
    kick_w0: Array2<Complex64>,
}

/// Whether a free-streaming substep is still owed at the end of a step.
#[derive(Clone, Copy, PartialEq)]
enum Owed {
    Nothing,
    HalfDrift,
}

impl SplitFlow {
    fn new(grid: &Grid, v: &PotentialSpec, order: usize, dt: f64) -> SplitFlow {
        let cbrt2 = 2f64.cbrt();
        let w1 = 1.0 / (2.0 - cbrt2);
        let w0 = -cbrt2 / (2.0 - cbrt2);
        let n = grid.n_points();
        let plan = RealPlan::new(n);
        let bins = plan.bins();
        let scale = 1.0 / n as f64;
        // the Nyquist bin keeps only the cosine of its phase so that real
        // lanes stay real
        let factor = |phase: f64, f: usize| {
            if is_nyquist(f, n) {
                Complex64::new(phase.cos() * scale, 0.0)
            } else {
                Complex64::from_polar(scale, phase)
            }
        };
        let dk = 2.0 * PI / (n as f64 * grid.delta_q());
        let drift = |tau: f64| {
            Array2::from_shape_fn((n, bins), |(k, f)| {
                factor(-(f as f64) * dk * grid.p(k) * tau / v.mass, f)
            })
        };
        // d/dp -> i s turns the whole series into the phase
        // tau s sum_n (hbar/2)^{2n} s^{2n} V^{(2n+1)}(q) / (2n+1)!
        let ds = 2.0 * PI / (n as f64 * grid.delta_p());
        let rate = Array2::from_shape_fn((n, bins), |(j, f)| {
            let s = f as f64 * ds;
            let q = grid.q(j);
            s * (0..=order)
                .map(|m| {
                    series_coefficient(m, grid.hbar()).abs()
                        * s.powi(2 * m as i32)
                        * v.derivative(2 * m + 1, q)
                })
                .sum::<f64>()
        });
        let kick =
            |tau: f64| Array2::from_shape_fn((n, bins), |(j, f)| factor(tau * rate[(j, f)], f));
        SplitFlow {
            q_plan: plan.clone(),
            p_plan: plan,
            drift_half: drift(0.5 * w1 * dt),
            drift_middle: drift(0.5 * (w0 + w1) * dt),
            drift_merged: drift(w1 * dt),
            kick_w1: kick(w1 * dt),
            kick_w0: kick(w0 * dt),
        }
    }

    /// Free streaming `W(q, p) -> W(q - p tau / m, p)` along every column.
    fn drift(&self, work: &mut Array2<f64>, table: &Array2<Complex64>) {
        spectral::filter_real_lanes(work, Axis(0), &self.q_plan, table);
    }

    fn kick(&self, work: &mut Array2<f64>, table: &Array2<Complex64>) {
        spectral::filter_real_lanes(work, Axis(1), &self.p_plan, table);
    }

    /// One full step, leaving its final half drift owed.
    fn step(&self, work: &mut Array2<f64>, owed: Owed) -> Owed {
        let first = match owed {
            Owed::Nothing => &self.drift_half,
            Owed::HalfDrift => &self.drift_merged,
        };
        self.drift(work, first);
        self.kick(work, &self.kick_w1);
        self.drift(work, &self.drift_middle);
        self.kick(work, &self.kick_w0);
        self.drift(work, &self.drift_middle);
        self.kick(work, &self.kick_w1);
        Owed::HalfDrift
    }

    fn settle(&self, work: &mut Array2<f64>, owed: Owed) -> Owed {
        if owed == Owed::HalfDrift {
            self.drift(work, &self.drift_half);
        }
        Owed::Nothing
    }
}

/// Strang-split Schrödinger propagation: half potential kick, free
/// evolution in momentum space, half potential kick.
///
/// Aborts with [`Error::EdgeBreach`] when the amplitude at either grid end
/// exceeds `1e-6`.
pub fn split_step_schrodinger(
    psi: &WaveFunction,
    v: &PotentialSpec,
    cfg: &EvolutionConfig,
) -> Result<WaveFunction> {
    psi.require(Representation::Position)?;
    v.validate()?;
    cfg.validate()?;
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > crate::wigner::NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    let grid = *psi.grid();
    let n = grid.n_points();
    let hbar = grid.hbar();
    let plan = Plan::new(n);
    let half_kick: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -v.value(grid.q(j)) * cfg.dt / (2.0 * hbar)))
        .collect();
    let dk = 2.0 * PI / (n as f64 * grid.delta_q());
    let drift: Vec<Complex64> = (0..n)
        .map(|f| {
            let kappa = signed_index(f, n) as f64 * dk;
            Complex64::from_polar(1.0, -hbar * kappa * kappa * cfg.dt / (2.0 * v.mass)) / n as f64
        })
        .collect();
    let mut amps = psi.amplitudes().to_vec();
    for step in 1..=cfg.n_steps {
        amps.iter_mut().zip(&half_kick).for_each(|(a, k)| *a *= k);
        plan.forward(&mut amps);
        amps.iter_mut().zip(&drift).for_each(|(a, k)| *a *= k);
        plan.inverse(&mut amps);
        amps.iter_mut().zip(&half_kick).for_each(|(a, k)| *a *= k);
        let edge = amps[0].norm().max(amps[n - 1].norm());
        if edge > EDGE_BREACH {
            return Err(Error::EdgeBreach {
                step,
                amplitude: edge,
            });
        }
    }
    WaveFunction::new(grid, amps.into(), Representation::Position)
}
