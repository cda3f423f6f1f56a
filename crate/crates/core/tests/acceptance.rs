//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each and exits non-zero if any fails. Pass criterion numbers as arguments
//! to run a subset, e.g. `cargo test --test acceptance -- 3 5`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use immersed_wavelets::adaptation::{
    adapt, compression_test_field, max_abs_diff, AdaptationState, Decision, Decomposition,
};
use immersed_wavelets::diagnostics::{
    fit_order, lebesgue_ratio, lebesgue_ratio_bc, lebesgue_ratio_exact, loglog_fit, NEAR_BOUNDARY,
};
use immersed_wavelets::geometry::{Axis, FnLevelSet, Geometry, ImmersedGrid, IntervalClass};
use immersed_wavelets::solver::{
    compare_to_reference, run_adaptive, run_fixed, DiffusionProblem, LevelOperator, Stepper,
    DEFAULT_FOURIER,
};
use immersed_wavelets::stencil::{BoundaryStencil, StencilConfig};
use immersed_wavelets::wavelet1d::line_ghosts;
use immersed_wavelets::wavelet2d::{fwt2d, iwt2d, PlanHierarchy, Provider, TransformPlan};
use immersed_wavelets::WaveletSpec;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn plan(geom: &Geometry, level: u32, spec: WaveletSpec) -> TransformPlan {
    let grid = ImmersedGrid::new(geom, level, spec.n()).unwrap();
    TransformPlan::new(grid, spec, &StencilConfig::default()).unwrap()
}

fn field_scale(f: &[f64]) -> f64 {
    f.iter()
        .filter(|v| !v.is_nan())
        .fold(0.0, |m, v| m.max(v.abs()))
}

fn h(level: u32) -> f64 {
    (-(level as f64)).exp2()
}

fn fmt_slopes(v: &[(String, f64)]) -> String {
    v.iter()
        .map(|(k, s)| format!("{k}:{s:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn smooth(x: [f64; 2]) -> f64 {
    compression_test_field(x)
}

const SMOOTH: &(dyn Fn([f64; 2]) -> f64 + Sync) = &smooth;

fn losslessness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let geoms = [
        Geometry::None,
        Geometry::circle([0.5, 0.5], 0.25),
        Geometry::star(),
    ];
    for geom in &geoms {
        for (s, spec) in WaveletSpec::all().into_iter().enumerate() {
            let p = plan(geom, 8, spec);
            let f = p.grid().sample(|_| rng.random_range(-1.0..1.0));
            let provider: Provider = if s % 2 == 0 { None } else { Some(SMOOTH) };
            let c = fwt2d(&f, &p, provider).unwrap();
            let back = iwt2d(&c, &p, provider).unwrap();
            worst = worst.max(max_abs_diff(&f, &back) / field_scale(&f));
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-12 && t < Duration::from_secs(10),
        format!(
            "max relative error {worst:.2e}, {:.1}s (limit 10s)",
            t.as_secs_f64()
        ),
    )
}

fn polynomial_annihilation() -> Outcome {
    let level = 8;
    let n_grid = 1usize << level;
    let mut worst: f64 = 0.0;
    for spec in WaveletSpec::all() {
        let n = spec.n();
        let p = plan(&Geometry::star(), level, spec);
        // Polynomials are not periodic: coefficients whose stencils straddle
        // the box seam see a jump and are excluded.
        let band = 2 * n + 2;
        let away = |i: usize| i >= band && i + band < n_grid;
        for a in 0..n {
            for b in 0..n - a {
                let poly =
                    move |x: [f64; 2]| (x[0] - 0.3).powi(a as i32) * (x[1] - 0.6).powi(b as i32);
                let f = p.grid().sample(poly);
                let scale = field_scale(&f).max(1e-300);
                for provider in [None, Some(&poly as &(dyn Fn([f64; 2]) -> f64 + Sync))] {
                    let c = fwt2d(&f, &p, provider).unwrap();
                    let m = c.class_max_where(|i, j| away(i) && away(j)).max();
                    worst = worst.max(m / scale);
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max detail / field scale {worst:.2e} (limit 1e-9)"),
    )
}

fn detail_scaling() -> Outcome {
    let start = Instant::now();
    let mut slopes = Vec::new();
    let mut pass = true;
    for spec in WaveletSpec::all() {
        let pairs: Vec<(f64, f64)> = (6..=10)
            .map(|l| {
                let p = plan(&Geometry::star(), l, spec);
                let f = p.grid().sample(smooth);
                (h(l), fwt2d(&f, &p, Some(SMOOTH)).unwrap().max_detail())
            })
            .collect();
        let fit = fit_order(&pairs).unwrap();
        pass &= (fit.slope - spec.n() as f64).abs() <= 0.5;
        slopes.push((spec.to_string(), fit.slope));
    }
    let t = start.elapsed();
    outcome(
        pass && t < Duration::from_secs(60),
        format!(
            "slopes {} (target N +- 0.5), {:.1}s (limit 60s)",
            fmt_slopes(&slopes),
            t.as_secs_f64()
        ),
    )
}

fn mixed_class_scaling() -> Outcome {
    let spec = WaveletSpec::new(6, 2).unwrap();
    let mut free = Vec::new();
    let mut near = Vec::new();
    for l in 6..=9 {
        let p = plan(&Geometry::star(), l, spec);
        let f = p.grid().sample(smooth);
        let c = fwt2d(&f, &p, Some(SMOOTH)).unwrap();
        let dist = p.grid().boundary_distance();
        let n = p.grid().n();
        free.push((
            h(l),
            c.class_max_where(|i, j| dist[j * n + i] > NEAR_BOUNDARY)
                .gxy,
        ));
        near.push((
            h(l),
            c.class_max_where(|i, j| dist[j * n + i] <= NEAR_BOUNDARY)
                .gxy,
        ));
    }
    let fs = fit_order(&free).unwrap().slope;
    let ns = fit_order(&near).unwrap().slope;
    let values = |v: &[(f64, f64)]| {
        v.iter()
            .map(|p| format!("{:.1e}", p.1))
            .collect::<Vec<_>>()
            .join(",")
    };
    outcome(
        fs >= 11.0 && (ns - 6.0).abs() <= 0.5,
        format!(
            "gxy slope beyond 3h {fs:.2} (need >= 11) [{}], within 3h {ns:.2} (need 6 +- 0.5) [{}]",
            values(&free),
            values(&near)
        ),
    )
}

fn compression_linearity() -> Outcome {
    let start = Instant::now();
    let spec = WaveletSpec::new(6, 2).unwrap();
    let (max_level, levels) = (9, 4);
    let plans = PlanHierarchy::new(
        &Geometry::star(),
        max_level - levels + 1,
        max_level,
        spec,
        &StencilConfig::default(),
    )
    .unwrap();
    let f = plans.grid(max_level).sample(smooth);
    let dec = Decomposition::new(&f, &plans, max_level, levels, Some(SMOOTH)).unwrap();
    let mut pairs = Vec::new();
    for e in 0..=12 {
        let eps = 10f64.powf(-8.0 + 0.5 * e as f64);
        let (rec, _) = dec.reconstruct(eps, &plans, Some(SMOOTH)).unwrap();
        pairs.push((eps, max_abs_diff(&f, &rec)));
    }
    let fit = loglog_fit(&pairs).unwrap();
    let c = fit.prefactor();
    let t = start.elapsed();
    outcome(
        (fit.slope - 1.0).abs() <= 0.15 && (0.5..=50.0).contains(&c) && t < Duration::from_secs(60),
        format!(
            "512^2 -> 32^2, slope {:.3} (1 +- 0.15), C {c:.2} ([0.5, 50]), E_inf {:.1e}..{:.1e}, {:.1}s (limit 60s)",
            fit.slope,
            pairs[0].1,
            pairs[12].1,
            t.as_secs_f64()
        ),
    )
}

fn lebesgue() -> Outcome {
    let exact = lebesgue_ratio_exact(2).unwrap() == Ratio::from_integer(3)
        && lebesgue_ratio_exact(4).unwrap() == Ratio::new(105, 9)
        && lebesgue_ratio_exact(6).unwrap() == Ratio::new(10395, 225);
    let bc = [2, 4, 6]
        .iter()
        .all(|&n| lebesgue_ratio_bc(n, 1.0).unwrap() < lebesgue_ratio(n).unwrap());
    outcome(
        exact && bc,
        format!(
            "rho = {}, {}, {}; rho_bc(psi=1) = {}, {}, {}",
            lebesgue_ratio(2).unwrap(),
            lebesgue_ratio(4).unwrap(),
            lebesgue_ratio(6).unwrap(),
            lebesgue_ratio_bc(2, 1.0).unwrap(),
            lebesgue_ratio_bc(4, 1.0).unwrap(),
            lebesgue_ratio_bc(6, 1.0).unwrap()
        ),
    )
}

/// Two disks of radius 12h centred on y = 1/2 and separated by a gap of
/// `gap` grid spacings. Both scale with h, so every level sees the same local
/// configuration and the gap row is a narrow interval.
fn two_disks(level: u32, gap: f64) -> impl Fn([f64; 2]) -> f64 + Send + Sync {
    let r = 12.0 * h(level);
    let half = 0.5 * gap * h(level);
    let c1 = [0.5 - r - half, 0.5];
    let c2 = [0.5 + r + half, 0.5];
    move |p: [f64; 2]| {
        let d = |c: [f64; 2]| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt() - r;
        d(c1).min(d(c2))
    }
}

fn gap_field(x: [f64; 2]) -> f64 {
    (9.0 * x[0] + 4.0 * x[1] + 0.3).sin() + (7.0 * x[1] - 5.0 * x[0]).cos()
}

fn hermite_closure_order() -> Outcome {
    let start = Instant::now();
    let mut slopes = Vec::new();
    let mut errors = Vec::new();
    let mut pass = true;
    for n in [2usize, 4, 6] {
        let spec = WaveletSpec::new(n, 2).unwrap();
        let mut pairs = Vec::new();
        for level in 7..=11 {
            let ls = FnLevelSet(two_disks(level, n as f64 + 1.3));
            let grid = ImmersedGrid::new(&ls, level, n).unwrap();
            let p = TransformPlan::new(grid, spec, &StencilConfig::default()).unwrap();
            let g = p.grid();
            let row = g.n() / 2;
            let f = g.sample(gap_field);
            let mut err: f64 = 0.0;
            let mut found = 0;
            for iv in &g.intervals(Axis::X)[row] {
                if iv.class != IntervalClass::Narrow {
                    continue;
                }
                found += 1;
                let closure = p.closure_of(&f, iv, None);
                let vals: Vec<f64> = (0..iv.len)
                    .map(|r| f[g.index((iv.start + r) % g.n(), row)])
                    .collect();
                let (gl, gr) = line_ghosts(&vals, iv.start, spec, &closure).unwrap();
                let first = (iv.start + iv.start % 2) as f64;
                let k = (iv.len + 1 - iv.start % 2) / 2;
                let y = row as f64 * g.h();
                for (q, v) in gl.iter().enumerate() {
                    let x = (first - 2.0 * (q + 1) as f64) * g.h();
                    err = err.max((v - gap_field([x, y])).abs());
                }
                for (q, v) in gr.iter().enumerate() {
                    let x = (first + 2.0 * (k + q) as f64) * g.h();
                    err = err.max((v - gap_field([x, y])).abs());
                }
            }
            assert_eq!(found, 1, "the gap row should hold one narrow interval");
            pairs.push((g.h(), err));
        }
        let fit = fit_order(&pairs).unwrap();
        pass &= fit.slope >= n as f64 - 0.5;
        slopes.push((format!("N={n}"), fit.slope));
        errors.push(
            pairs
                .iter()
                .map(|p| format!("{:.1e}", p.1))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    let t = start.elapsed();
    outcome(
        pass && t < Duration::from_secs(30),
        format!(
            "ghost error slopes {} (need >= N - 0.5) [{}], {:.1}s (limit 30s)",
            fmt_slopes(&slopes),
            errors.join("; "),
            t.as_secs_f64()
        ),
    )
}

fn stencil_derivative_order() -> Outcome {
    let start = Instant::now();
    let n_ord = 6;
    let exact = |x: [f64; 2], d: usize| {
        let k = 4.0 * PI;
        let sx = match d % 4 {
            0 => (k * x[0]).sin(),
            1 => (k * x[0]).cos(),
            2 => -(k * x[0]).sin(),
            _ => -(k * x[0]).cos(),
        };
        100.0 * k.powi(d as i32) * sx * (k * x[1]).sin()
    };
    let mut errs = vec![Vec::new(); 3];
    for level in 6..=9 {
        let grid = ImmersedGrid::new(&Geometry::star(), level, n_ord).unwrap();
        let f = grid.sample(smooth);
        let (rn, rt) = StencilConfig::default().radii(n_ord);
        let mut worst = [0.0f64; 3];
        for axis in [Axis::X, Axis::Y] {
            for cp in grid.control_points(axis).iter().flatten() {
                let st = BoundaryStencil::build(cp.position, cp.normal, &grid, rn, rt).unwrap();
                let poly = st.fit_field(&f, grid.n());
                for (d, w) in worst.iter_mut().enumerate() {
                    let e =
                        (poly.derivative(cp.position, Axis::X, d) - exact(cp.position, d)).abs();
                    *w = w.max(e);
                }
            }
        }
        for d in 0..3 {
            errs[d].push((grid.h(), worst[d]));
        }
    }
    let mut pass = true;
    let mut slopes = Vec::new();
    for (d, e) in errs.iter().enumerate() {
        let s = fit_order(e).unwrap().slope;
        pass &= s >= (n_ord - d) as f64 - 0.5;
        slopes.push((format!("d{d}"), s));
    }
    let t = start.elapsed();
    outcome(
        pass && t < Duration::from_secs(30),
        format!(
            "slopes {} (need >= 6 - n - 0.5) [{}], {:.1}s (limit 30s)",
            fmt_slopes(&slopes),
            errs.iter()
                .map(|e| e
                    .iter()
                    .map(|p| format!("{:.1e}", p.1))
                    .collect::<Vec<_>>()
                    .join(","))
                .collect::<Vec<_>>()
                .join("; "),
            t.as_secs_f64()
        ),
    )
}

/// Reduced diffusion study shared by the error and band criteria.
struct DiffusionStudy {
    eps: Vec<f64>,
    l2: Vec<f64>,
    linf: Vec<f64>,
    final_levels: Vec<u32>,
    band_events: usize,
    total_events: usize,
    worst_run_band: f64,
    elapsed: Duration,
}

const REF_LEVEL: u32 = 9;
const DIFFUSION_T: f64 = 1.0;

fn diffusion_study() -> &'static DiffusionStudy {
    static STUDY: OnceLock<DiffusionStudy> = OnceLock::new();
    STUDY.get_or_init(|| {
        let start = Instant::now();
        let problem = DiffusionProblem::star_benchmark(DIFFUSION_T);
        let spec = WaveletSpec::new(6, 2).unwrap();
        let plans = PlanHierarchy::new(
            &problem.geometry,
            5,
            REF_LEVEL,
            spec,
            &StencilConfig::default(),
        )
        .unwrap();
        let radius = 6.0;
        let reference = run_fixed(&problem, plans.grid(REF_LEVEL), radius).unwrap();
        eprintln!(
            "  reference at level {REF_LEVEL}: {:.0}s",
            start.elapsed().as_secs_f64()
        );
        let mut s = DiffusionStudy {
            eps: Vec::new(),
            l2: Vec::new(),
            linf: Vec::new(),
            final_levels: Vec::new(),
            band_events: 0,
            total_events: 0,
            worst_run_band: 1.0,
            elapsed: Duration::ZERO,
        };
        for e in 0..=8 {
            let eps_r = 10f64.powf(-1.0 - 0.5 * e as f64);
            let mut state = AdaptationState::new(5, eps_r / 100.0, eps_r, 2, 6)
                .unwrap()
                .with_levels(5, REF_LEVEL - 1)
                .unwrap();
            let rec = run_adaptive(&problem, &plans, &mut state, radius).unwrap();
            let (l2, linf) =
                compare_to_reference(&rec.final_field, rec.final_level, &reference, REF_LEVEL);
            let in_band = rec
                .events
                .iter()
                .filter(|ev| ev.in_band(state.eps_c, state.eps_r))
                .count();
            s.band_events += in_band;
            s.total_events += rec.events.len();
            s.worst_run_band = s.worst_run_band.min(state.band_fraction());
            s.eps.push(eps_r);
            s.l2.push(l2);
            s.linf.push(linf);
            s.final_levels.push(rec.final_level);
            eprintln!(
                "  eps_r {eps_r:.1e}: level {}, L2 {l2:.2e}, Linf {linf:.2e}, {} steps, {:.0}s",
                rec.final_level,
                rec.steps,
                rec.wall_time.as_secs_f64()
            );
        }
        s.elapsed = start.elapsed();
        s
    })
}

fn diffusion_error_bound() -> Outcome {
    let s = diffusion_study();
    let pairs = |v: &[f64]| {
        s.eps
            .iter()
            .copied()
            .zip(v.iter().copied())
            .collect::<Vec<_>>()
    };
    let f2 = loglog_fit(&pairs(&s.l2)).unwrap();
    let fi = loglog_fit(&pairs(&s.linf)).unwrap();
    let levels: Vec<String> = s.final_levels.iter().map(|l| l.to_string()).collect();
    outcome(
        (f2.slope - 1.0).abs() <= 0.3
            && (fi.slope - 1.0).abs() <= 0.3
            && s.elapsed < Duration::from_secs(1800),
        format!(
            "ref 512^2, T={DIFFUSION_T}, eps_r 1e-1..1e-5: slope L2 {:.2}, Linf {:.2} (1 +- 0.3); L2 {:.1e}..{:.1e}; final levels {}; {:.0}s (limit 1800s)",
            f2.slope,
            fi.slope,
            s.l2[0],
            s.l2[s.l2.len() - 1],
            levels.join(","),
            s.elapsed.as_secs_f64()
        ),
    )
}

fn threshold_band() -> Outcome {
    let s = diffusion_study();
    let frac = s.band_events as f64 / s.total_events as f64;
    outcome(
        frac >= 0.95,
        format!(
            "{} of {} events in band ({:.1}%, need 95%), lowest single run {:.1}%",
            s.band_events,
            s.total_events,
            100.0 * frac,
            100.0 * s.worst_run_band
        ),
    )
}

fn no_flip_flop() -> Outcome {
    let spec = WaveletSpec::new(6, 2).unwrap();
    let geom = Geometry::star();
    let plans = PlanHierarchy::new(&geom, 5, 9, spec, &StencilConfig::default()).unwrap();
    let detail = |l: u32| {
        let f = plans.grid(l).sample(smooth);
        fwt2d(&f, plans.plan(l), Some(SMOOTH)).unwrap().max_detail()
    };
    // One refinement from level 6 is needed, then the band holds.
    let (d6, d7) = (detail(6), detail(7));
    let eps_r = (d6 * d7 * 4.0).sqrt();
    let eps_c = eps_r / 64.0;
    let mut state = AdaptationState::new(6, eps_c, eps_r, 2, 6)
        .unwrap()
        .with_levels(5, 9)
        .unwrap();
    let mut decisions = Vec::new();
    for cycle in 0..20 {
        // The field is static: each cycle sees it sampled at the current level.
        let f = plans.grid(state.level).sample(smooth);
        let (_, d) = adapt(f, &mut state, &plans, Some(SMOOTH), cycle as f64).unwrap();
        decisions.push(d);
    }
    let settled = decisions[2..].iter().all(|&d| d == Decision::Keep);
    let alternates = decisions.windows(2).any(|w| {
        matches!(
            (w[0], w[1]),
            (Decision::Refine, Decision::Coarsen) | (Decision::Coarsen, Decision::Refine)
        )
    });
    let short: Vec<&str> = decisions
        .iter()
        .map(|d| match d {
            Decision::Coarsen => "C",
            Decision::Keep => "K",
            Decision::Refine => "R",
        })
        .collect();
    outcome(
        settled && !alternates,
        format!(
            "eps_r = 2^6 eps_c = {eps_r:.2e}, decisions {}, final level {}",
            short.join(""),
            state.level
        ),
    )
}

fn solver_orders() -> Outcome {
    let start = Instant::now();
    let mode = |x: [f64; 2]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
    let mut spatial = Vec::new();
    for l in 5..=8 {
        let grid = ImmersedGrid::new(&Geometry::None, l, 6).unwrap();
        let op = LevelOperator::new(&grid, 6.0).unwrap();
        let u = grid.sample(mode);
        let mut lap = vec![0.0; u.len()];
        op.apply(&u, &[], &mut lap);
        let e = u
            .iter()
            .zip(&lap)
            .map(|(a, b)| (b + 8.0 * PI * PI * a).abs())
            .fold(0.0, f64::max);
        spatial.push((grid.h(), e));
    }
    let ss = fit_order(&spatial).unwrap().slope;

    let level = 5;
    let grid = ImmersedGrid::new(&Geometry::None, level, 6).unwrap();
    let op = LevelOperator::new(&grid, 6.0).unwrap();
    let problem = DiffusionProblem {
        geometry: Geometry::None,
        boundary: std::sync::Arc::new(|_, _| 0.0),
        initial: std::sync::Arc::new(mode),
        t_final: 0.02,
        fourier: DEFAULT_FOURIER,
        scale: 1.0,
    };
    let hh = grid.h();
    let k = 2.0 * PI;
    let lam = 2.0 * (-2.0 * (2.0 * k * hh).cos() + 32.0 * (k * hh).cos() - 30.0) / (12.0 * hh * hh);
    let mut temporal = Vec::new();
    for s in 0..4 {
        let dt = 2e-4 / (1 << s) as f64;
        let steps = (problem.t_final / dt).round() as usize;
        let mut u = grid.sample(mode);
        let mut stepper = Stepper::new(&op, &problem);
        for i in 0..steps {
            stepper.step(&mut u, i as f64 * dt, dt).unwrap();
        }
        let decay = (lam * problem.t_final).exp();
        let e = grid
            .sample(|x| decay * mode(x))
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        temporal.push((dt, e));
    }
    let ts = fit_order(&temporal).unwrap().slope;
    let t = start.elapsed();
    outcome(
        (ss - 4.0).abs() <= 0.3 && (ts - 3.0).abs() <= 0.3 && t < Duration::from_secs(120),
        format!(
            "spatial {ss:.2} (4 +- 0.3), temporal {ts:.2} (3 +- 0.3), {:.1}s (limit 120s)",
            t.as_secs_f64()
        ),
    )
}

fn linear_complexity() -> Outcome {
    let spec = WaveletSpec::new(6, 2).unwrap();
    let time = |level: u32| {
        let p = plan(&Geometry::star(), level, spec);
        let f = p.grid().sample(smooth);
        (0..5)
            .map(|_| {
                let mut d = f.clone();
                let t = Instant::now();
                p.forward(&mut d, Some(SMOOTH)).unwrap();
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let (t9, t10) = (time(9), time(10));
    let ratio = t10.as_secs_f64() / t9.as_secs_f64();
    outcome(
        ratio <= 4.5,
        format!(
            "fwt2d L9 {:.1} ms, L10 {:.1} ms, ratio {ratio:.2} (limit 4.5)",
            1e3 * t9.as_secs_f64(),
            1e3 * t10.as_secs_f64()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 13] = [
    (1, "losslessness", losslessness),
    (2, "polynomial annihilation", polynomial_annihilation),
    (3, "detail scaling", detail_scaling),
    (4, "mixed-class scaling", mixed_class_scaling),
    (5, "compression linearity", compression_linearity),
    (6, "Lebesgue ratios", lebesgue),
    (7, "narrow-interval closure order", hermite_closure_order),
    (8, "stencil derivative order", stencil_derivative_order),
    (9, "diffusion error vs threshold", diffusion_error_bound),
    (10, "threshold band", threshold_band),
    (11, "no flip-flop", no_flip_flop),
    (12, "free-space solver orders", solver_orders),
    (13, "linear complexity", linear_complexity),
];

fn main() {
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, name, run) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!(
            "criterion {id:>2} {name}: {} [{:.1}s] {}",
            if result.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
