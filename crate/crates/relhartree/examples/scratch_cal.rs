//! Calibration scratchpad for the evolution module (untracked; numbers
//! measured here get frozen into unit tests).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relhartree::*;
use std::f64::consts::PI;
use std::time::Instant;

fn gaussian(grid: Grid, sigma: f64, mass: f64) -> Field {
    probes::gaussian(grid, sigma, mass)
}

/// Random band-limited field: spectral coefficients supported on |k_i| <= kmax.
fn band_limited(grid: Grid, kmax: i64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n_per_axis();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (j, v) in values.iter_mut().enumerate() {
        let (ix, iy, iz) = grid.index3(j);
        let inside = [ix, iy, iz]
            .iter()
            .all(|&i| grid.signed_index(i).abs() <= kmax && i != n / 2);
        if inside {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    Field::new(grid, Representation::Spectral, values).unwrap()
}

fn rel_l2(a: &Field, b: &Field) -> f64 {
    let ap = a.to_spectral();
    let bp = b.to_spectral();
    let num: f64 = ap
        .values()
        .iter()
        .zip(bp.values())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    num / bp.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let want = |s: &str| args.is_empty() || args.iter().any(|a| a == s || a == "all");

    let threshold_mass = 2.696_820; // converged profile charge (64^3, box 32)

    if want("tails") {
        // initial spectral tail fraction (outer-third max |u_hat| over peak)
        // for candidate (n, L, sigma) gaussian configs
        for &(n, el, sigma) in &[
            (24usize, 8.0f64, 1.2f64),
            (36, 12.0, 0.9),
            (36, 12.0, 1.0),
            (40, 12.0, 1.0),
            (48, 12.0, 1.0),
            (36, 12.0, 1.1),
            (48, 16.0, 1.1),
            (48, 16.0, 1.2),
            (64, 16.0, 1.1),
            (64, 16.0, 1.2),
            (64, 16.0, 1.4),
        ] {
            let grid = Grid::new_3d(n, el).unwrap();
            let u = gaussian(grid, sigma, 1.0);
            println!("tail n={n} L={el} sigma={sigma}: {:.3e}", spectral_tail_fraction(&u));
        }
    }

    if want("linear") {
        // --- linear exactness on band-limited data ---
        let grid = Grid::new_3d(24, 8.0).unwrap();
        let u0 = band_limited(grid, 4, 7);
        let params = Params::new(1.3, 0.0, 0.0).unwrap();
        let mut state = RunState::new(u0.clone());
        for _ in 0..50 {
            step_strang(&mut state, 0.02, &params, None).unwrap();
        }
        let exact = apply_multiplier(
            &u0,
            &MultiplierSpec::Propagator { t: state.time, m: 1.3 },
        )
        .unwrap();
        println!("linear: 50-step vs propagator rel_l2 = {:.3e}", rel_l2(&state.field, &exact));

        let el = 7.0;
        let gridp = Grid::new_3d(16, el).unwrap();
        let p = [1.0, -2.0, 0.0];
        let c = Complex64::new(0.83, 0.21);
        let wave = move |x: [f64; 3]| {
            c * Complex64::from_polar(
                1.0,
                2.0 * PI / el * (p[0] * x[0] + p[1] * x[1] + p[2] * x[2]),
            )
        };
        let u0 = Field::from_fn(gridp, wave);
        let paramsw = Params::new(1.0, 0.0, 0.0).unwrap();
        let mut st = RunState::new(u0);
        for _ in 0..40 {
            step_strang(&mut st, 0.05, &paramsw, None).unwrap();
        }
        let ksq = (2.0 * PI / el).powi(2) * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        let omega = (ksq + 1.0).sqrt();
        let t = st.time;
        let exact = Field::from_fn(gridp, move |x| {
            wave(x) * Complex64::from_polar(1.0, -omega * t)
        });
        let phys = st.field.to_physical();
        let ex = exact.to_physical();
        let maxerr = phys
            .values()
            .iter()
            .zip(ex.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        println!("plane wave: max pointwise err = {:.3e} (|c| = {:.3})", maxerr, c.norm());
    }

    if want("drift") {
        // --- order-2 energy drift, 48^3 box 16 ---
        let grid = Grid::new_3d(48, 16.0).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let u0 = gaussian(grid, 1.2, 0.5 * threshold_mass);
        let mut drifts = Vec::new();
        for &dt in &[0.01f64, 0.005, 0.0025] {
            let mut state = RunState::new(u0.clone());
            let e0 = measure(&mut state, &params, None);
            let n = (0.5 / dt).round() as usize;
            for _ in 0..n {
                step_strang_opts(&mut state, dt, &params, None, true).unwrap();
            }
            let e1 = measure(&mut state, &params, None);
            let drift = (e1.total - e0.total).abs() / e0.total.abs();
            let chg = (e1.charge - e0.charge).abs() / e0.charge;
            println!(
                "drift dt={dt}: rel energy drift {drift:.4e}, charge drift {chg:.3e}, E0 {:.6}, end tail {:.2e}",
                e0.total,
                spectral_tail_fraction(&state.field)
            );
            drifts.push(drift);
        }
        println!(
            "drift ratios: {:.3}, {:.3}",
            drifts[0] / drifts[1],
            drifts[1] / drifts[2]
        );

        // reversibility (dealias off: the projection is not invertible, the
        // bare splitting is; keep the horizon short so the alias band stays
        // under the refusal threshold)
        let grid64 = Grid::new_3d(64, 16.0).unwrap();
        let light = gaussian(grid64, 1.2, 0.5 * threshold_mass);
        let mut state = RunState::new(light.clone());
        for _ in 0..20 {
            step_strang(&mut state, 0.01, &params, None).unwrap();
        }
        println!("  turnaround tail {:.2e}", spectral_tail_fraction(&state.field));
        for _ in 0..20 {
            step_strang(&mut state, -0.01, &params, None).unwrap();
        }
        println!("reversibility 20+20 (64^3, dealias off) rel_l2 = {:.3e}", rel_l2(&state.field, &light));
    }

    if want("picard") {
        let grid = Grid::new_3d(48, 16.0).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let u0 = gaussian(grid, 1.2, 0.5 * threshold_mass);
        // free flow after 1 iteration
        let free = Params::new(1.0, 0.0, 0.0).unwrap();
        let pic = picard_duhamel(&u0, 0.3, 5, 1, &free).unwrap();
        let exact = apply_multiplier(&u0, &MultiplierSpec::Propagator { t: 0.3, m: 1.0 }).unwrap();
        println!("picard free flow rel_l2 = {:.3e}", rel_l2(&pic, &exact));
        let ident = picard_duhamel(&u0, 0.0, 5, 3, &params).unwrap();
        println!("picard t=0 rel_l2 = {:.3e}", rel_l2(&ident, &u0));

        // cross-method at t = 0.01
        let t0 = Instant::now();
        let pic = picard_duhamel(&u0, 0.01, 8, 12, &params).unwrap();
        let pt = t0.elapsed().as_secs_f64();
        let mut state = RunState::new(u0.clone());
        for _ in 0..10 {
            step_strang_opts(&mut state, 1e-3, &params, None, true).unwrap();
        }
        println!(
            "picard vs strang t=0.01 (48^3): rel_l2 = {:.3e}  (picard {pt:.2}s)",
            rel_l2(&pic, &state.field)
        );
        // quadrature sensitivity
        for &(nq, ni) in &[(4usize, 12usize), (6, 12), (12, 12), (8, 6)] {
            let p = picard_duhamel(&u0, 0.01, nq, ni, &params).unwrap();
            println!(
                "  nq={nq} ni={ni}: vs strang rel_l2 = {:.3e}",
                rel_l2(&p, &state.field)
            );
        }

        // contraction failure horizon
        let heavy = gaussian(grid, 1.2, 2.0 * threshold_mass);
        for &t in &[0.5f64, 1.0, 2.0, 4.0] {
            match picard_duhamel(&heavy, t, 6, 30, &params) {
                Ok(_) => println!("  heavy t={t}: converged/ran out of iterations"),
                Err(e) => println!("  heavy t={t}: error: {e}"),
            }
        }
    }

    if want("measure") {
        // plane-wave closed forms
        let el = 6.4;
        let grid = Grid::new_3d(16, el).unwrap();
        let p = [2.0, 1.0, -1.0];
        let c = 0.9;
        let params = Params::new(0.6, 0.8, 1.7).unwrap();
        let u = Field::from_fn(grid, move |x| {
            Complex64::from_polar(c, 2.0 * PI / el * (p[0] * x[0] + p[1] * x[1] + p[2] * x[2]))
        });
        let rep = energy_report(&u, 0.0, &params, None);
        let ksq = (2.0 * PI / el).powi(2) * 6.0;
        let vol = el.powi(3);
        let kin = 0.5 * (ksq + 0.36).sqrt() * c * c * vol;
        let inter = 0.25 * 4.0 * PI * 0.8 * c.powi(4) / (1.7 * 1.7) * vol;
        println!(
            "plane wave: kinetic rel {:.2e}, interaction rel {:.2e}, charge rel {:.2e}, external {:.1e}, total-sum {:.1e}",
            (rep.kinetic - kin).abs() / kin,
            (rep.interaction - inter).abs() / inter,
            (rep.charge - c * c * vol).abs() / (c * c * vol),
            rep.external,
            rep.total - (rep.kinetic + rep.interaction + rep.external)
        );

        // ground-state pairing via measure
        let t0 = Instant::now();
        let gs = solve_ground_state(Grid::new_3d(48, 24.0).unwrap(), -1.0, 1e-8, 400).unwrap();
        println!("profile solve took {:.1}s", t0.elapsed().as_secs_f64());
        let pm = Params::new(0.0, -1.0, 0.0).unwrap();
        let rep = energy_report(&gs.q, 0.0, &pm, None);
        let t2 = half_kinetic_form(&gs.q);
        let n = rep.charge;
        let nu = 2.837_297_479_480_062;
        let defect = t2 + n + 4.0 * rep.interaction - nu * n * n / 24.0;
        println!(
            "pairing: T2 {:.8}, N {:.8}, inter {:.8}, defect {:.3e} (rel {:.3e})",
            t2,
            n,
            rep.interaction,
            defect,
            defect.abs() / n
        );
        println!(
            "  report.kinetic vs T2/2: {:.3e}",
            (rep.kinetic - 0.5 * t2).abs() / (0.5 * t2)
        );
        // apriori on Q
        let (e, rhs) = apriori_bound_check(rep, gs.k_const);
        let coeff = 0.5 - rep.charge / (4.0 * gs.k_const);
        println!("apriori on Q: E {e:.6e}, RHS {rhs:.6e}, coeff {coeff:.3e}");
        // apriori on subcritical gaussian, m=1
        let grid = Grid::new_3d(36, 12.0).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let g = gaussian(grid, 1.0, 0.5 * threshold_mass);
        let repg = energy_report(&g, 0.0, &params, None);
        let (e, rhs) = apriori_bound_check(repg, gs.k_const);
        println!("apriori on gaussian: E {e:.6e}, RHS {rhs:.6e}, gap {:.3e}", e - rhs);
    }

    if want("e0scan") {
        // negative-energy window for narrow gaussians on a tighter box
        let grid = Grid::new_3d(64, 12.8).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        for &sigma in &[0.55f64, 0.6, 0.65, 0.7, 0.8] {
            let tail = spectral_tail_fraction(&gaussian(grid, sigma, 1.0));
            let mut line = format!("sigma {sigma}: tail {tail:.2e}");
            for &r in &[1.5f64, 2.0] {
                let u = gaussian(grid, sigma, r * threshold_mass);
                let rep = energy_report(&u, 0.0, &params, None);
                line.push_str(&format!("  E({r}) {:.4}", rep.total));
            }
            println!("{line}");
        }
        // how sharply the solved profile's spectrum decays on its own grid
        let gs = solve_ground_state(Grid::new_3d(48, 24.0).unwrap(), -1.0, 1e-8, 400).unwrap();
        println!("profile tail on 48^3/24: {:.3e}", spectral_tail_fraction(&gs.q));
    }

    if want("unitruns") {
        // small-grid config for fast unit tests: 48^3, box 9.6, sigma 0.7
        // (localized to ~6e-11 at the boundary, spectral tail ~2e-12)
        let grid = Grid::new_3d(48, 9.6).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let u = gaussian(grid, 0.7, 0.5 * threshold_mass);
        let rep = energy_report(&u, 0.0, &params, None);
        println!(
            "sub: E0 {:.4} charge {:.4} tail {:.2e}",
            rep.total,
            rep.charge,
            spectral_tail_fraction(&u)
        );
        let mut state = RunState::new(u);
        let t0 = Instant::now();
        let opts = EvolveOpts::new(0.25, 2e-3);
        let rows = evolve(&mut state, &params, None, &opts).unwrap();
        let maxh = rows.iter().map(|x| x.h_half_norm).fold(0.0f64, f64::max);
        let chg = (rows.last().unwrap().report.charge - rows[0].report.charge).abs()
            / rows[0].report.charge;
        println!(
            "sub: status {}, t_end {:.4}, steps {}, h0 {:.4} maxh {:.4}, chg {:.2e}, wall {:.1}s, fault {:?}, end tail {:.2e}",
            state.status,
            state.time,
            state.step_count,
            rows[0].h_half_norm,
            maxh,
            chg,
            t0.elapsed().as_secs_f64(),
            state.fault,
            spectral_tail_fraction(&state.field)
        );
        // dealiased steps keep the beyond-ball region exactly empty; plain
        // steps inject alias content there
        let mut on = RunState::new(gaussian(grid, 0.7, 0.5 * threshold_mass));
        let mut off = RunState::new(gaussian(grid, 0.7, 0.5 * threshold_mass));
        for _ in 0..3 {
            step_strang_opts(&mut on, 0.01, &params, None, true).unwrap();
        }
        step_strang(&mut off, 0.01, &params, None).unwrap();
        println!(
            "after 3 on / 1 off: tail(on) {:.3e}, tail(off) {:.3e}",
            spectral_tail_fraction(&on.field),
            spectral_tail_fraction(&off.field)
        );
    }

    if want("dichotomy") {
        // gaussian family on the tight box: sigma 0.6, negative energy above threshold
        let grid = Grid::new_3d(64, 12.8).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let sigma = 0.6;

        for &r in &[2.0f64, 1.5] {
            let u = gaussian(grid, sigma, r * threshold_mass);
            let rep = energy_report(&u, 0.0, &params, None);
            println!(
                "sup r={r}: E0 {:.4} charge {:.4} tail {:.2e}",
                rep.total,
                rep.charge,
                spectral_tail_fraction(&u)
            );
            let mut state = RunState::new(u);
            let t0 = Instant::now();
            let opts = EvolveOpts::new(10.0, 1e-3);
            let mut printed = 0usize;
            let rows = evolve_with(&mut state, &params, None, &opts, |st, row| {
                printed += 1;
                if printed % 50 == 0 {
                    println!(
                        "  [sup {r}] t {:.4} dt {:.2e} steps {} h {:.3}",
                        st.time, row.dt, st.step_count, row.h_half_norm
                    );
                }
                Ok(())
            })
            .unwrap();
            let maxh = rows.iter().map(|x| x.h_half_norm).fold(0.0f64, f64::max);
            println!(
                "sup r={r}: status {}, t_end {:.4}, steps {}, dt_end {:.2e}, h0 {:.3} maxh {:.3}, wall {:.1}s, fault {:?}",
                state.status,
                state.time,
                state.step_count,
                state.current_dt(),
                rows[0].h_half_norm,
                maxh,
                t0.elapsed().as_secs_f64(),
                state.fault
            );
        }

        for &r in &[0.5f64, 0.8] {
            let u = gaussian(grid, sigma, r * threshold_mass);
            let rep = energy_report(&u, 0.0, &params, None);
            println!("sub r={r}: E0 {:.4} charge {:.4}", rep.total, rep.charge);
            let mut state = RunState::new(u);
            let t0 = Instant::now();
            let opts = EvolveOpts::new(10.0, 1e-3);
            let mut printed = 0usize;
            let rows = evolve_with(&mut state, &params, None, &opts, |st, row| {
                printed += 1;
                if printed % 100 == 0 {
                    println!(
                        "  [sub {r}] t {:.4} dt {:.2e} steps {} h {:.3}",
                        st.time, row.dt, st.step_count, row.h_half_norm
                    );
                }
                Ok(())
            })
            .unwrap();
            let maxh = rows.iter().map(|x| x.h_half_norm).fold(0.0f64, f64::max);
            let chg = (rows.last().unwrap().report.charge - rows[0].report.charge).abs()
                / rows[0].report.charge;
            println!(
                "sub r={r}: status {}, t_end {:.3}, steps {}, h0 {:.3} maxh {:.3}, charge drift {:.2e}, wall {:.1}s",
                state.status,
                state.time,
                state.step_count,
                rows[0].h_half_norm,
                maxh,
                chg,
                t0.elapsed().as_secs_f64()
            );
        }

        // repulsive
        let gridr = Grid::new_3d(48, 16.0).unwrap();
        let repq = Params::new(1.0, 1.0, 0.0).unwrap();
        let g = gaussian(gridr, 1.2, 2.0);
        let mut state = RunState::new(g);
        let t0 = Instant::now();
        let opts = EvolveOpts::new(1.5, 5e-3);
        let rows = evolve(&mut state, &repq, None, &opts).unwrap();
        let worst = rows
            .iter()
            .map(|r| r.h_half_norm / (2.0 * r.report.total).sqrt())
            .fold(0.0f64, f64::max);
        println!(
            "repulsive: status {}, h_half/sqrt(2E) max = {:.6}, wall {:.1}s",
            state.status,
            worst,
            t0.elapsed().as_secs_f64()
        );
    }

    if want("crit4") {
        // acceptance criterion 4 preview: 64^3, box 16
        let grid = Grid::new_3d(64, 16.0).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let u0 = gaussian(grid, 1.2, 0.5 * threshold_mass);
        for &dt in &[1e-3f64, 5e-4] {
            let mut state = RunState::new(u0.clone());
            let e0 = measure(&mut state, &params, None);
            let t0 = Instant::now();
            let n = (1.0 / dt).round() as usize;
            for _ in 0..n {
                step_strang_opts(&mut state, dt, &params, None, true).unwrap();
            }
            let e1 = measure(&mut state, &params, None);
            println!(
                "crit4 dt={dt}: energy drift {:.4e}, charge drift {:.3e}, wall {:.1}s (E0 {:.5}, end tail {:.2e})",
                (e1.total - e0.total).abs() / e0.total.abs(),
                (e1.charge - e0.charge).abs() / e0.charge,
                t0.elapsed().as_secs_f64(),
                e0.total,
                spectral_tail_fraction(&state.field)
            );
        }
        // criterion 5 preview on the same data
        let t0 = Instant::now();
        let pic = picard_duhamel(&u0, 0.01, 8, 12, &params).unwrap();
        let mut state = RunState::new(u0.clone());
        for _ in 0..10 {
            step_strang_opts(&mut state, 1e-3, &params, None, true).unwrap();
        }
        println!(
            "crit5 64^3: picard vs strang rel_l2 = {:.3e}, wall {:.1}s",
            rel_l2(&pic, &state.field),
            t0.elapsed().as_secs_f64()
        );
    }

    if want("potcal") {
        let grid = Grid::new_3d(24, 9.6).unwrap();
        // 1) envelope for the softened well, then 1000 fresh probes
        let spec = PotentialSpec::new(
            PositivePart::Zero,
            NegativePart::CoulombLike { c: 1.0, eps: 0.5, d: 0.0 },
        )
        .unwrap();
        let t0 = Instant::now();
        let (a, b) = estimate_form_bound(&spec, grid, 40).unwrap();
        println!("potcal envelope eps=0.5 c=1: a={a:.6} b={b:.6}, wall {:.2}s", t0.elapsed().as_secs_f64());
        let vminus = spec.vminus_values(grid).unwrap();
        let cell = grid.cell_volume();
        let t0 = Instant::now();
        let mut violations = 0usize;
        let mut worst: f64 = f64::NEG_INFINITY;
        for i in 0..1000u64 {
            let u = probes::random_localized(grid, 50_000 + i);
            let phys = u.to_physical();
            let mut pairing = 0.0;
            let mut charge = 0.0;
            for (v, uu) in vminus.values().iter().zip(phys.values()) {
                pairing += v.re * uu.norm_sqr();
                charge += uu.norm_sqr();
            }
            pairing *= cell;
            charge *= cell;
            let t = half_kinetic_form(&u);
            let margin = pairing.abs() - (a * t + b * charge);
            worst = worst.max(margin / charge);
            if margin > 0.0 {
                violations += 1;
            }
        }
        println!(
            "potcal 1000 fresh: violations {violations}, worst normalized margin {worst:.3e}, wall {:.1}s",
            t0.elapsed().as_secs_f64()
        );

        // 2) narrow vs wide probe families
        let narrow: Vec<Field> = (0..20)
            .map(|i| probes::gaussian_at(grid, [0.0; 3], 0.3 + 0.3 * i as f64 / 19.0, Complex64::new(1.0, 0.0)))
            .collect();
        let wide: Vec<Field> = (0..20)
            .map(|i| probes::gaussian_at(grid, [0.0; 3], 1.5 + 1.5 * i as f64 / 19.0, Complex64::new(1.0, 0.0)))
            .collect();
        let (an, bn) = estimate_form_bound_with(&spec, &narrow).unwrap();
        let (aw, bw) = estimate_form_bound_with(&spec, &wide).unwrap();
        println!("potcal narrow a={an:.6} b={bn:.6}; wide a={aw:.6} b={bw:.6}");

        // 3) equivalence margins for harmonic + soft well, m = 0.8
        let spec2 = PotentialSpec::new(
            PositivePart::PowerBeta(2.0),
            NegativePart::CoulombLike { c: 0.3, eps: 0.5, d: 0.2 },
        )
        .unwrap();
        let mut family: Vec<Field> = Vec::new();
        for i in 0..10 {
            let sigma = 0.4 + 0.2 * i as f64;
            family.push(probes::gaussian_at(grid, [0.0; 3], sigma, Complex64::new(1.0, 0.0)));
        }
        for i in 0..20u64 {
            family.push(probes::random_localized(grid, 9_000 + i));
        }
        let (a2, b2) = estimate_form_bound_with(&spec2, &family).unwrap();
        let spec2 = spec2.with_bounds(a2, b2).unwrap();
        let m = 0.8;
        let vplus = spec2.vplus_values(grid).unwrap();
        let c1 = ((1.0 - a2) / 2.0).sqrt();
        let c2 = (2.0 * (1.0 + b2 + m)).sqrt();
        let mut rmin = f64::INFINITY;
        let mut rmax = f64::NEG_INFINITY;
        for u in &family {
            let x = x_norm(u, &spec2, m).unwrap();
            let s = sobolev_norm(u, 0.5);
            let phys = u.to_physical();
            let p: f64 = cell
                * vplus
                    .values()
                    .iter()
                    .zip(phys.values())
                    .map(|(v, uu)| v.re * uu.norm_sqr())
                    .sum::<f64>();
            let y = s + p.sqrt();
            rmin = rmin.min(x / y);
            rmax = rmax.max(x / y);
        }
        println!("potcal equivalence: a={a2:.4} b={b2:.4} c1={c1:.4} c2={c2:.4}, X/Y in [{rmin:.4}, {rmax:.4}]");

        // 4) x_norm vs operator-path oracle on one Gaussian
        let u = gaussian(grid, 1.1, 1.7);
        let m7 = 0.7;
        let x = x_norm(&u, &spec2, m7).unwrap();
        let au = apply_multiplier(&u, &MultiplierSpec::SqrtLaplacianMass { m: m7 }).unwrap();
        let up = u.to_physical();
        let ap = au.to_physical();
        let tm: f64 = cell
            * up.values()
                .iter()
                .zip(ap.values())
                .map(|(x, y)| (x.conj() * y).re)
                .sum::<f64>();
        let vfull = spec2.materialize(grid).unwrap();
        let vp: f64 = cell
            * vfull
                .values()
                .iter()
                .zip(up.values())
                .map(|(v, uu)| v.re * uu.norm_sqr())
                .sum::<f64>();
        let n: f64 = cell * up.values().iter().map(|z| z.norm_sqr()).sum::<f64>();
        let oracle = (n + tm + vp + (b2 + m7) * n).max(0.0).sqrt();
        println!("potcal oracle: x={x:.12e} oracle={oracle:.12e} rel diff {:.3e}", (x - oracle).abs() / x);

        // 5) conservation under V at unit scale: 48^3/9.6, sigma 0.7
        let g48 = Grid::new_3d(48, 9.6).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let vwell = PotentialSpec::coulomb_like(0.5, 0.0).unwrap().materialize(g48).unwrap();
        let u0 = gaussian(g48, 0.7, 0.5 * threshold_mass);
        for &(dealias, label) in &[(true, "on"), (false, "off")] {
            let mut state = RunState::new(u0.clone());
            let e0 = measure(&mut state, &params, Some(&vwell));
            for _ in 0..50 {
                step_strang_opts(&mut state, 2e-3, &params, Some(&vwell), dealias).unwrap();
            }
            let e1 = measure(&mut state, &params, Some(&vwell));
            println!(
                "potcal V-conservation 48^3 dealias {label}: charge drift {:.3e}, energy drift {:.3e} (E0 {:.6}, external0 {:.6})",
                (e1.charge - e0.charge).abs() / e0.charge,
                (e1.total - e0.total).abs() / e0.total.abs(),
                e0.total,
                e0.external
            );
        }
    }

    if want("crit8") {
        // acceptance criterion 8 preview at full scale: 64^3, box 16
        let grid = Grid::new_3d(64, 16.0).unwrap();
        let params = Params::new(1.0, -1.0, 0.0).unwrap();
        let vwell = PotentialSpec::coulomb_like(0.5, 0.0).unwrap().materialize(grid).unwrap();
        // conservation leg at criterion-4 tolerances
        let u0 = gaussian(grid, 1.2, 0.5 * threshold_mass);
        let mut state = RunState::new(u0.clone());
        let e0 = measure(&mut state, &params, Some(&vwell));
        let t0 = Instant::now();
        for _ in 0..1000 {
            step_strang_opts(&mut state, 1e-3, &params, Some(&vwell), true).unwrap();
        }
        let e1 = measure(&mut state, &params, Some(&vwell));
        println!(
            "crit8 conservation: charge drift {:.3e}, energy drift {:.3e}, wall {:.1}s (E0 {:.6})",
            (e1.charge - e0.charge).abs() / e0.charge,
            (e1.total - e0.total).abs() / e0.total.abs(),
            t0.elapsed().as_secs_f64(),
            e0.total
        );
        // sub-threshold boundedness leg: mass = 0.5 (1 - pi/4) threshold
        let mass = 0.5 * (1.0 - PI / 4.0) * threshold_mass;
        let u0 = gaussian(grid, 1.2, mass);
        let mut state = RunState::new(u0);
        let t0 = Instant::now();
        let opts = EvolveOpts::new(5.0, 5e-3);
        let rows = evolve(&mut state, &params, Some(&vwell), &opts).unwrap();
        let h0 = rows.first().unwrap().h_half_norm;
        let maxh = rows.iter().map(|r| r.h_half_norm).fold(0.0f64, f64::max);
        println!(
            "crit8 sub-threshold: status {:?}, t_end {:.3}, h0 {h0:.4} maxh {maxh:.4}, wall {:.1}s",
            state.status,
            state.time,
            t0.elapsed().as_secs_f64()
        );
    }
}
