mod common;

use common::{desk_grid, random_state, rng};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use proptest::prelude::*;
use wignerlab::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn shifted_rows(a: &Array2<f64>, rows: isize) -> Array2<f64> {
    let n = a.nrows() as isize;
    let mut out = Array2::zeros(a.raw_dim());
    for j in 0..n {
        let src = j - rows;
        if (0..n).contains(&src) {
            out.row_mut(j as usize).assign(&a.row(src as usize));
        }
    }
    out
}

fn max_abs(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(config(24))]

    // A boost by m momentum cells rolls W by m columns; a translation by s
    // lattice cells moves it by s rows.
    #[test]
    fn galilean_covariance(seed in any::<u64>(), m in -12i32..=12, shift in -10isize..=10) {
        let g = desk_grid();
        let psi = random_state(&mut rng(seed), &g, 2.0);
        let w = wdf_from_wavefunction(&psi).unwrap();
        let k = m as f64 * g.delta_p();
        let boosted = WaveFunction::from_fn(g, |q| Complex64::from_polar(1.0, k * q / g.hbar()));
        let boosted = WaveFunction::new(
            g,
            psi.amplitudes() * boosted.amplitudes(),
            Representation::Position,
        ).unwrap();
        let wb = wdf_from_wavefunction(&boosted).unwrap();
        let n = g.n_points() as i32;
        let rolled = Array2::from_shape_fn(w.values().raw_dim(), |(j, c)| {
            w.values()[[j, (c as i32 - m).rem_euclid(n) as usize]]
        });
        prop_assert!(max_abs(wb.values(), &rolled) < 1e-10);

        let mut amps = Array1::zeros(g.n_points());
        let n = g.n_points() as isize;
        for j in 0..n {
            let src = j - shift;
            if (0..n).contains(&src) {
                amps[j as usize] = psi.amplitudes()[src as usize];
            }
        }
        let moved = WaveFunction::new(g, amps, Representation::Position).unwrap();
        let wm = wdf_from_wavefunction(&normalize(&moved).unwrap()).unwrap();
        prop_assert!(max_abs(wm.values(), &shifted_rows(w.values(), shift)) < 1e-10);
    }

    #[test]
    fn wigner_is_bounded(seed in any::<u64>()) {
        let g = desk_grid();
        let w = wdf_from_wavefunction(&random_state(&mut rng(seed), &g, 3.0)).unwrap();
        let bound = 2.0 / g.h();
        prop_assert!(w.max_value() <= bound * (1.0 + 1e-12));
        prop_assert!(w.min_value() >= -bound * (1.0 + 1e-12));
        prop_assert!((purity(&w) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn smoothing_is_monotone(seed in any::<u64>(), sq in 0.1f64..0.6, sp in 0.1f64..0.6, grow in 1.1f64..2.0) {
        let g = desk_grid();
        let w = wdf_from_wavefunction(&random_state(&mut rng(seed), &g, 3.0)).unwrap();
        let a = smoothed_minimum(&w, sq, sp).unwrap();
        let b = smoothed_minimum(&w, sq * grow, sp).unwrap();
        let c = smoothed_minimum(&w, sq * grow, sp * grow).unwrap();
        prop_assert!(b >= a - 1e-12, "{a} -> {b}");
        prop_assert!(c >= b - 1e-12, "{b} -> {c}");
    }
}

fn raw_wdf(psi: &WaveFunction) -> WignerFunction {
    wdf_from_wavefunction(&normalize(psi).unwrap())
        .unwrap()
        .scaled(psi.norm_sqr())
}

proptest! {
    #![proptest_config(config(16))]

    // A slit centred between the humps keeps, at the origin, twice the
    // interference damping factor of what a slit on a hump keeps there.
    #[test]
    fn slit_ridge_ratio(qi in 0.8f64..1.2, ratio in 0.8f64..1.5, cells in 40usize..=60) {
        let g = make_grid(-20.0, 20.0, 512).unwrap();
        let qm = qi * ratio;
        let d = cells as f64 * g.delta_q();
        let cat = cat_wavefunction(&CatSpec::new(qi, d), &g).unwrap();
        let at = |slit: f64| {
            let device = gaussian_wavefunction(&GaussianSpec::new(qm).centered_at(slit), &g).unwrap();
            let out = filter_wavefunction(&cat, &FilterSpec::new(FilterKind::Coordinate, device)).unwrap();
            raw_wdf(&out.raw).values()[[g.nearest_q_index(slit), g.p_origin()]]
        };
        let ratio = at(0.0) / at(d);
        let damping = (-d * d / (qi * qi + qm * qm)).exp();
        let overlap = (-d * d / (qi * qi)).exp();
        let expected = 2.0 * (overlap + damping) / (1.0 + overlap.powi(4) + 2.0 * overlap * damping);
        prop_assert!((ratio / expected - 1.0).abs() < 1e-8, "{ratio} vs {expected}");
        // The bound is attained once the humps stop overlapping; allow rounding.
        prop_assert!(ratio <= 2.0 * (damping + overlap) * (1.0 + 1e-9), "{ratio}");
    }
}

#[test]
fn free_evolution_keeps_cat_negativity() {
    let g = desk_grid();
    let spec = CatSpec::new(1.0, 4.0);
    let w0 = wdf_from_wavefunction(&cat_wavefunction(&spec, &g).unwrap()).unwrap();
    let t = 1.0;
    let w = propagate(
        &w0,
        &PotentialSpec::free(1.0),
        &EvolutionConfig::new(0.05, 20),
    )
    .unwrap();
    let hbar = g.hbar();
    let oracle = WignerFunction::from_fn(g, |q, p| spec.wigner(q - p * t, p, hbar));
    assert!(
        w.max_abs_diff(&oracle) < 1e-8,
        "{}",
        w.max_abs_diff(&oracle)
    );
    assert!(
        w.min_value() < -0.8 / std::f64::consts::PI,
        "{} {}",
        w.min_value(),
        w0.min_value()
    );
    assert!((w.min_value() - w0.min_value()).abs() < 1e-3);
}

#[test]
fn evolution_conserves_mass() {
    let g = desk_grid();
    let mut r = rng(40);
    let quartic = PotentialSpec::new(vec![0.0, 0.0, 0.5, 0.0, 0.05], 1.0).unwrap();
    for v in [PotentialSpec::harmonic(1.0, 1.3), quartic] {
        let w0 = wdf_from_wavefunction(&random_state(&mut r, &g, 1.5)).unwrap();
        let w = propagate(&w0, &v, &EvolutionConfig::new(1e-2, 100)).unwrap();
        assert!((w.mass() - w0.mass()).abs() < 1e-10, "{}", w.mass());
    }
}

proptest! {
    #![proptest_config(config(6))]

    // Quadratic potentials have no quantum correction: the classical flow
    // alone is exact.
    #[test]
    fn classical_limit(omega in 0.5f64..1.5, t in 0.2f64..1.5, c in -2.0f64..2.0, k in -2.0f64..2.0) {
        let g = desk_grid();
        let hbar = g.hbar();
        let spec = GaussianSpec::new(1.0).centered_at(c).with_momentum(k);
        let w0 = wdf_from_wavefunction(&gaussian_wavefunction(&spec, &g).unwrap()).unwrap();
        let cfg = EvolutionConfig::for_duration(t, 1e-2).unwrap().with_series_order(0);
        let w = propagate(&w0, &PotentialSpec::harmonic(1.0, omega), &cfg).unwrap();
        let (cos, sin) = ((omega * t).cos(), (omega * t).sin());
        let oracle = WignerFunction::from_fn(g, |q, p| {
            spec.wigner(q * cos - p / omega * sin, p * cos + omega * q * sin, hbar)
        });
        prop_assert!(w.max_abs_diff(&oracle) < 1e-6);
    }
}
