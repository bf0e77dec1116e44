//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{desk_grid, phase_aligned_error, random_filter, random_state, rng};
use ndarray::Array1;
use wignerlab::*;

type Check = std::result::Result<(bool, String), Box<dyn std::error::Error>>;
type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("gaussian oracle", gaussian_oracle),
        ("uncertainty saturation", uncertainty_saturation),
        ("marginals and mass", marginals_and_mass),
        ("cat closed form", cat_closed_form),
        ("filtering commutation", filtering_commutation),
        ("filtered gaussian", filtered_gaussian),
        ("slit scan over cat", slit_scan),
        ("detection", detection),
        ("overlap oracle", overlap_oracle),
        ("moyal evolution", moyal_evolution),
        ("blob diagnostics", blob_diagnostics),
        ("recovery", recovery),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {:<26} {} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            name,
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Wigner function of a state that need not be normalized.
fn raw_wdf(psi: &WaveFunction) -> wignerlab::Result<WignerFunction> {
    if psi.norm_sqr() < 1e-60 {
        return Ok(WignerFunction::from_fn(*psi.grid(), |_, _| 0.0));
    }
    Ok(wdf_from_wavefunction(&normalize(psi)?)?.scaled(psi.norm_sqr()))
}

fn max_diff(a: &Array1<f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn gaussian_oracle() -> Check {
    let g = desk_grid();
    let w = wdf_from_wavefunction(&gaussian_wavefunction(&GaussianSpec::new(1.0), &g)?)?;
    let oracle = WignerFunction::from_fn(g, |q, p| 2.0 / g.h() * (-q * q - p * p).exp());
    let err = w.max_abs_diff(&oracle);
    let peak = (w.max_value() - 1.0 / PI).abs();
    Ok((
        err < 1e-9 && peak < 1e-9,
        format!("max err {err:.2e}, peak err {peak:.2e}"),
    ))
}

fn uncertainty_saturation() -> Check {
    let mut worst: f64 = 0.0;
    for q0 in [0.25, 1.0, 4.0] {
        let g = make_grid(-12.0 * q0, 12.0 * q0, 256)?;
        let w = wdf_from_wavefunction(&gaussian_wavefunction(&GaussianSpec::new(q0), &g)?)?;
        worst = worst.max((uncertainty_product(&w)? - 0.5).abs());
    }
    Ok((worst < 1e-6, format!("max |dq dp - 1/2| {worst:.2e}")))
}

fn marginals_and_mass() -> Check {
    let g = desk_grid();
    let mut r = rng(3);
    let mut states = vec![
        gaussian_wavefunction(
            &GaussianSpec::new(1.0).centered_at(0.5).with_momentum(-1.0),
            &g,
        )?,
        cat_wavefunction(&CatSpec::new(1.0, 4.0), &g)?,
    ];
    states.extend((0..20).map(|_| random_state(&mut r, &g, 3.0)));
    let (mut marg, mut mass): (f64, f64) = (0.0, 0.0);
    for psi in &states {
        let w = wdf_from_wavefunction(psi)?;
        let phi = fourier_transform(psi)?;
        marg = marg
            .max(max_diff(
                &marginal_q(&w),
                psi.amplitudes().iter().map(|z| z.norm_sqr()),
            ))
            .max(max_diff(
                &marginal_p(&w),
                phi.amplitudes().iter().map(|z| z.norm_sqr()),
            ));
        mass = mass.max((w.mass() - 1.0).abs());
    }
    Ok((
        marg < 1e-8 && mass < 1e-8,
        format!(
            "{} states, marginal err {marg:.2e}, mass err {mass:.2e}",
            states.len()
        ),
    ))
}

fn cat_closed_form() -> Check {
    let g = desk_grid();
    let spec = CatSpec::new(1.0, 4.0);
    let w = wdf_from_wavefunction(&cat_wavefunction(&spec, &g)?)?;
    let err = w.max_abs_diff(&cat_wdf_closed_form(&spec, &g)?);
    let k0 = g.p_origin();
    let column = w.values().column(k0);
    let centre = column[g.nearest_q_index(0.0)];
    let outer = column[g.nearest_q_index(4.0)].max(column[g.nearest_q_index(-4.0)]);
    Ok((
        err < 1e-9 && centre > outer,
        format!("max err {err:.2e}, W(0,0) {centre:.4} vs outer {outer:.4}"),
    ))
}

fn filtering_commutation() -> Check {
    let g = desk_grid();
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for kind in [
        FilterKind::Coordinate,
        FilterKind::Momentum,
        FilterKind::GeneralCoordinate,
        FilterKind::GeneralMomentum,
    ] {
        for _ in 0..30 {
            let psi = random_state(&mut r, &g, 2.0);
            let f = random_filter(&mut r, &g, kind);
            let via_phase_space = filter_wdf(&wdf_from_wavefunction(&psi)?, &f)?;
            let via_state = raw_wdf(&filter_wavefunction(&psi, &f)?.raw)?;
            worst = worst.max(via_phase_space.max_abs_diff(&via_state));
        }
    }
    Ok((
        worst < 1e-8,
        format!("4 kinds x 30 pairs, max err {worst:.2e}"),
    ))
}

/// Width of a Gaussian profile `exp(-x^2 / 2w^2)` from the variance of its
/// squared modulus.
fn profile_width(psi: &WaveFunction) -> f64 {
    let n = psi.grid().n_points();
    let weights: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    let mean: f64 = (0..n).map(|i| weights[i] * psi.abscissa(i)).sum::<f64>() / total;
    let var: f64 = (0..n)
        .map(|i| weights[i] * (psi.abscissa(i) - mean).powi(2))
        .sum::<f64>()
        / total;
    (2.0 * var).sqrt()
}

fn filtered_gaussian() -> Check {
    let g = make_grid(-16.0, 16.0, 256)?;
    let (qi, qm) = (2.0, 1.0);
    let input = gaussian_wavefunction(&GaussianSpec::new(qi), &g)?;
    let slit = FilterSpec::new(
        FilterKind::Coordinate,
        gaussian_wavefunction(&GaussianSpec::new(qm), &g)?,
    );
    let out = raw_wdf(&filter_wavefunction(&input, &slit)?.raw)?;
    let err = out.max_abs_diff(&filtered_gaussian_wdf_closed_form(qi, qm, &g)?);

    // Limits: a broad input takes on the shape of the slit, a broad slit
    // leaves the input alone.
    let wide = make_grid(-40.0, 40.0, 8192)?;
    let hbar = wide.hbar();
    let mut width_err: f64 = 0.0;
    for (qi, qm, expect) in [(5.0, 0.05, 0.05), (0.05, 5.0, 0.05)] {
        let input = gaussian_wavefunction(&GaussianSpec::new(qi), &wide)?;
        let slit = FilterSpec::new(
            FilterKind::Coordinate,
            gaussian_wavefunction(&GaussianSpec::new(qm), &wide)?,
        );
        let state = filter_wavefunction(&input, &slit)?.state;
        let q_width = profile_width(&state);
        let p_width = profile_width(&fourier_transform(&state)?);
        width_err = width_err
            .max((q_width / expect - 1.0).abs())
            .max((p_width / (hbar / expect) - 1.0).abs());
    }
    Ok((
        err < 1e-8 && width_err < 1e-3,
        format!("closed-form err {err:.2e}, limit width err {width_err:.2e}"),
    ))
}

fn slit_scan() -> Check {
    // q = 0 and q = +-4 are lattice points on this grid.
    let g = make_grid(-16.0, 16.0, 256)?;
    let (qi, d) = (1.0, 4.0);
    let qm = qi;
    let spec = CatSpec::new(qi, d);
    let cat = cat_wavefunction(&spec, &g)?;
    let weight = (spec.normalization() * (PI * qi * qi).powf(0.25)).into();
    let lobes = [
        gaussian_wavefunction(&GaussianSpec::new(qi).centered_at(-d), &g)?.scaled(weight),
        gaussian_wavefunction(&GaussianSpec::new(qi).centered_at(d), &g)?.scaled(weight),
    ];
    // Split W into the two lobes and the interference term between them.
    let split =
        |states: [&WaveFunction; 3]| -> wignerlab::Result<(WignerFunction, WignerFunction)> {
            let whole = raw_wdf(states[0])?;
            let a = raw_wdf(states[1])?;
            let b = raw_wdf(states[2])?;
            let lobes = WignerFunction::new(g, a.values() + b.values())?;
            let fringe = WignerFunction::new(g, whole.values() - lobes.values())?;
            Ok((lobes, fringe))
        };
    let peak_abs = |w: &WignerFunction| w.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let (lobes_in, fringe_in) = split([&cat, &lobes[0], &lobes[1]])?;
    let contrast_in = peak_abs(&fringe_in) / peak_abs(&lobes_in);

    let k0 = g.p_origin();
    let centres: Vec<f64> = (0..g.n_points())
        .map(|j| g.q(j))
        .filter(|q| q.abs() <= 2.0 * d)
        .collect();
    let mut ridge = Vec::with_capacity(centres.len());
    let (mut fringe_out, mut lobes_out): (f64, f64) = (0.0, 0.0);
    let mut closed_err: f64 = 0.0;
    for &centre in &centres {
        let slit = FilterSpec::new(
            FilterKind::Coordinate,
            gaussian_wavefunction(&GaussianSpec::new(qm).centered_at(centre), &g)?,
        );
        // A lone lobe may miss the slit entirely, so apply the slit by hand.
        let pass = |psi: &WaveFunction| {
            WaveFunction::new(
                g,
                psi.amplitudes() * slit.device.amplitudes(),
                Representation::Position,
            )
        };
        let out = [
            filter_wavefunction(&cat, &slit)?.raw,
            pass(&lobes[0])?,
            pass(&lobes[1])?,
        ];
        let (l, f) = split([&out[0], &out[1], &out[2]])?;
        fringe_out = fringe_out.max(peak_abs(&f));
        lobes_out = lobes_out.max(peak_abs(&l));
        let w = raw_wdf(&out[0])?;
        ridge.push(
            w.values()
                .column(k0)
                .iter()
                .copied()
                .fold(f64::MIN, f64::max),
        );
        if centre == 0.0 || (centre.abs() - d).abs() < 1e-12 {
            closed_err = closed_err
                .max(w.max_abs_diff(&filtered_cat_wdf_closed_form(&spec, qm, centre, &g)?));
        }
    }
    let damping = fringe_out / lobes_out / contrast_in;
    // The damping attains the bound exactly, so allow for rounding.
    let bound = (-d * d / (qi * qi + qm * qm)).exp();
    let excess = damping / bound - 1.0;

    let argmax = |range: &mut dyn Iterator<Item = usize>| {
        range
            .max_by(|&a, &b| ridge[a].total_cmp(&ridge[b]))
            .unwrap()
    };
    let mid = centres.len() / 2;
    let left = centres[argmax(&mut (0..mid))];
    let right = centres[argmax(&mut (mid + 1..centres.len()))];
    let dq = g.delta_q();
    let ridges_ok = (left + d).abs() <= dq && (right - d).abs() <= dq;
    let centre_ratio = ridge[mid] / ridge[argmax(&mut (0..centres.len()))];
    Ok((
        excess <= 1e-9 && ridges_ok && centre_ratio < 1e-3 && closed_err < 1e-8,
        format!(
            "damping {damping:.4e}, bound {bound:.4e}, excess {excess:+.1e}, ridges at {left:+.3}/{right:+.3}, \
             centre/ridge {centre_ratio:.2e}, closed-form err {closed_err:.2e}"
        ),
    ))
}

fn detection() -> Check {
    let g = desk_grid();
    let mut r = rng(8);
    let (mut worst, mut minimum): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..20 {
        let psi = random_state(&mut r, &g, 2.0);
        let device = random_state(&mut r, &g, 1.0);
        let a = detect(
            &wdf_from_wavefunction(&psi)?,
            &wdf_from_wavefunction(&device)?,
        )?;
        let b = detect_wavefunctions(&psi, &device)?;
        worst = worst.max(a.to_wigner().max_abs_diff(&b.to_wigner()));
        minimum = minimum.min(a.min_value()).min(b.min_value());
    }
    Ok((
        worst < 1e-8 && minimum >= -1e-12,
        format!("20 pairs, max err {worst:.2e}, min {minimum:.2e}"),
    ))
}

fn overlap_oracle() -> Check {
    let g = desk_grid();
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = random_state(&mut r, &g, 3.0);
        let b = random_state(&mut r, &g, 3.0);
        let p = overlap_probability(&wdf_from_wavefunction(&a)?, &wdf_from_wavefunction(&b)?)?;
        worst = worst.max((p - inner_product(&a, &b)?.norm_sqr()).abs());
    }
    let origin = wdf_from_wavefunction(&gaussian_wavefunction(&GaussianSpec::new(1.0), &g)?)?;
    let mut displaced: f64 = 0.0;
    for d in [0.0, 1.0, 2.0, 4.0] {
        let w = wdf_from_wavefunction(&gaussian_wavefunction(
            &GaussianSpec::new(1.0).centered_at(d),
            &g,
        )?)?;
        displaced = displaced.max((overlap_probability(&origin, &w)? - (-d * d / 2.0).exp()).abs());
    }
    Ok((
        worst < 1e-8 && displaced < 1e-8,
        format!("50 pairs err {worst:.2e}, displaced err {displaced:.2e}"),
    ))
}

fn moyal_evolution() -> Check {
    let g = desk_grid();
    let hbar = g.hbar();

    // Harmonic flow with m = omega = 1 rotates phase space rigidly.
    let spec = GaussianSpec::new(0.8).centered_at(1.5).with_momentum(-1.0);
    let w0 = wdf_from_wavefunction(&gaussian_wavefunction(&spec, &g)?)?;
    let cfg = EvolutionConfig::for_duration(PI / 2.0, 1e-2)?;
    let rotated = propagate(&w0, &PotentialSpec::harmonic(1.0, 1.0), &cfg)?;
    let oracle = WignerFunction::from_fn(g, |q, p| spec.wigner(-p, q, hbar));
    let harmonic = rotated.max_abs_diff(&oracle);

    let quartic = PotentialSpec::new(vec![0.0, 0.0, 0.0, 0.0, 0.25], 1.0)?;
    let psi = gaussian_wavefunction(&GaussianSpec::new(1.0).centered_at(1.0), &g)?;
    let moyal = propagate(
        &wdf_from_wavefunction(&psi)?,
        &quartic,
        &EvolutionConfig::new(1e-3, 1000),
    )?;
    let reference = split_step_schrodinger(&psi, &quartic, &EvolutionConfig::new(1e-5, 100_000))?;
    let quartic_err = moyal.max_abs_diff(&wdf_from_wavefunction(&reference)?);
    Ok((
        harmonic < 1e-6 && quartic_err < 1e-5,
        format!("harmonic err {harmonic:.2e}, quartic err {quartic_err:.2e}"),
    ))
}

fn blob_diagnostics() -> Check {
    let g = desk_grid();
    let half_h = g.h() / 2.0;
    let mut area_err: f64 = 0.0;
    for (w, c, k) in [(1.0, 0.0, 0.0), (0.6, 2.0, 1.0), (1.2, -1.0, -0.5)] {
        let spec = GaussianSpec::new(w).centered_at(c).with_momentum(k);
        let wdf = wdf_from_wavefunction(&gaussian_wavefunction(&spec, &g)?)?;
        area_err = area_err.max((effective_area(&wdf)? - half_h).abs());
    }
    let cat = wdf_from_wavefunction(&cat_wavefunction(&CatSpec::new(1.0, 4.0), &g)?)?;
    let hbar = g.hbar();
    let at_blob = smoothed_minimum(&cat, (hbar / 2.0).sqrt(), (hbar / 2.0).sqrt())?;
    let below = smoothed_minimum(&cat, (hbar / 8.0).sqrt(), (hbar / 8.0).sqrt())?;
    Ok((
        area_err < 1e-6 && at_blob >= -1e-10 && below < -1e-4,
        format!(
            "area err {area_err:.2e}, smoothed min {at_blob:.2e} at hbar/2, {below:.2e} at hbar/8"
        ),
    ))
}

fn recovery() -> Check {
    let g = desk_grid();
    let mut r = rng(12);
    let mut states = vec![gaussian_wavefunction(
        &GaussianSpec::new(0.9).centered_at(0.7).with_momentum(1.2),
        &g,
    )?];
    while states.len() < 21 {
        let psi = random_state(&mut r, &g, 3.0);
        // The lattice fixes the reference amplitude at q = 0.
        if psi.amplitudes()[g.nearest_q_index(0.0)].norm() > 1e-3 {
            states.push(psi);
        }
    }
    let mut worst: f64 = 0.0;
    for psi in &states {
        let back = recover_wavefunction(&wdf_from_wavefunction(psi)?)?;
        worst = worst.max(phase_aligned_error(psi, &back));
    }
    Ok((
        worst < 1e-8,
        format!("{} states, max err {worst:.2e}", states.len()),
    ))
}
