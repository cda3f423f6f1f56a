use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use immersed_wavelets::adaptation::{
    compression_test_field, max_abs_diff, AdaptationState, Decision, Decomposition,
};
use immersed_wavelets::diagnostics::{
    lebesgue_ratio, lebesgue_ratio_bc, lebesgue_ratio_exact, loglog_fit, scaling_function_samples,
    ScalingContext,
};
use immersed_wavelets::geometry::{Geometry, ImmersedGrid};
use immersed_wavelets::io::{
    emit_loglog_plot, read_field, read_pairs_csv, write_csv, write_field, FieldFile, PlotSpec,
    RunConfig, Series,
};
use immersed_wavelets::solver::{
    compare_to_reference, default_ghost_radius, run_adaptive, run_fixed, DiffusionProblem,
};
use immersed_wavelets::wavelet1d::EndClosure;
use immersed_wavelets::wavelet2d::{
    fwt2d, iwt2d, CoefficientField, PlanHierarchy, Provider, TransformPlan,
};
use immersed_wavelets::Error;

use crate::{
    Cli, Command, CompressArgs, Context, ConvergenceArgs, DiffuseArgs, Failure, GridArgs,
    LebesgueArgs, ScalingArgs, TransformArgs, WithOp,
};

pub fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).op("reading config")?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    match cli.command {
        Command::Compress(a) => compress(cfg, a),
        Command::Transform(a) => transform(cfg, a),
        Command::Diffuse(a) => diffuse(cfg, a),
        Command::Lebesgue(a) => lebesgue(a),
        Command::Convergence(a) => convergence(a),
        Command::ScalingFunction(a) => scaling(cfg, a),
    }
}

fn parse_geometry(text: &str) -> Result<Geometry, Error> {
    match text.trim() {
        "star" => Ok(Geometry::star()),
        "none" => Ok(Geometry::None),
        t if t.starts_with('{') => Ok(serde_json::from_str(t)?),
        path => {
            let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(serde_json::from_str(&body)?)
        }
    }
}

/// Applies the shared flags, validates, and sets up the thread pool.
fn finish_config(cfg: &mut RunConfig, g: &GridArgs) -> Result<(), Failure> {
    if let Some(w) = &g.wavelet {
        cfg.wavelet = w.parse().op("parsing --wavelet")?;
    }
    if let Some(text) = &g.geometry {
        cfg.geometry = parse_geometry(text).op("parsing --geometry")?;
    }
    if let Some(p) = &g.out_prefix {
        cfg.out_prefix = p.clone();
    }
    cfg.validate().op("validating settings")?;
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))
            .op("starting worker threads")?;
    }
    Ok(())
}

fn out_path(cfg: &RunConfig, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}_{suffix}", cfg.out_prefix))
}

/// Wall-clock times, kept out of the result files so those stay byte-identical.
struct Timing(Vec<(String, f64)>);

impl Timing {
    fn since(&mut self, stage: impl Into<String>, start: Instant) {
        self.0.push((stage.into(), start.elapsed().as_secs_f64()));
    }

    fn write(&self, path: &Path) -> Result<(), Failure> {
        let mut s = String::from("stage,seconds\n");
        for (stage, secs) in &self.0 {
            let _ = writeln!(s, "{stage},{secs}");
        }
        std::fs::write(path, s)
            .map_err(|e| Error::io(path, e))
            .op("writing timing file")
    }
}

fn read_input(path: &Path) -> Result<FieldFile, Failure> {
    read_field(path, None).op("reading input field")
}

fn compress(mut cfg: RunConfig, a: CompressArgs) -> Result<(), Failure> {
    let input = a.input.as_deref().map(read_input).transpose()?;
    let c = &mut cfg.compress;
    if let Some(v) = a.max_level {
        c.max_level = v;
    }
    if let Some(f) = &input {
        c.max_level = f.level;
    }
    if let Some(v) = a.levels {
        c.levels = v;
    }
    if let Some(v) = a.eps {
        c.eps = v;
    }
    if a.sweep.is_some() {
        c.sweep = a.sweep;
    }
    finish_config(&mut cfg, &a.grid)?;
    let c = &cfg.compress;
    let (top, levels) = (c.max_level, c.levels as u32);
    let mut timing = Timing(Vec::new());

    let t = Instant::now();
    let plans = PlanHierarchy::new(
        &cfg.geometry,
        top + 1 - levels,
        top,
        cfg.wavelet,
        &cfg.stencil,
    )
    .op("building transform plans")?;
    timing.since("plans", t);
    let grid = plans.grid(top);
    let test_field: &(dyn Fn([f64; 2]) -> f64 + Sync) = &compression_test_field;
    let (field, provider): (Vec<f64>, Provider) = match input {
        Some(f) => {
            f.check_grid(grid).op("matching input field to the grid")?;
            (f.values, None)
        }
        None => (grid.sample(compression_test_field), Some(test_field)),
    };

    let t = Instant::now();
    let dec = Decomposition::new(&field, &plans, top, levels, provider).op("fwt2d")?;
    timing.since("decompose", t);
    let details = dec.max_details();
    let eps_list = c.sweep.map(|s| s.values()).unwrap_or_else(|| vec![c.eps]);

    let t = Instant::now();
    let mut rows = Vec::new();
    for &eps in &eps_list {
        let (rec, active) = dec.reconstruct(eps, &plans, provider).op("iwt2d")?;
        let e_inf = max_abs_diff(&field, &rec);
        println!(
            "eps {eps:.3e}  Einf {e_inf:.3e}  active {active} of {}",
            grid.inside_count()
        );
        let mut row = vec![eps, e_inf, active as f64];
        row.extend(&details);
        rows.push(row);
    }
    timing.since("reconstruct", t);

    let mut header = vec!["eps".to_string(), "Einf".into(), "active_points".into()];
    header.extend((0..levels).map(|k| format!("max_detail_L{}", top - k)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let out = a.out.unwrap_or_else(|| out_path(&cfg, "compress.csv"));
    write_csv(&out, &header, &rows).op("writing compression table")?;
    if let Some(plot) = a.plot {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r[0] > 0.0 && r[1] > 0.0)
            .map(|r| (r[0], r[1]))
            .collect();
        let spec = PlotSpec {
            title: format!("Compression error, {} wavelet", cfg.wavelet),
            xlabel: "eps".into(),
            ylabel: "E_inf".into(),
            guide_slope: Some(1.0),
        };
        let series = [Series {
            label: "E_inf".into(),
            points,
        }];
        emit_loglog_plot(&series, &spec, &plot).op("writing plot")?;
    }
    timing.write(&out_path(&cfg, "timing.csv"))
}

fn transform(mut cfg: RunConfig, a: TransformArgs) -> Result<(), Failure> {
    finish_config(&mut cfg, &a.grid)?;
    let input = a.input.as_deref().map(read_input).transpose()?;
    if a.inverse && input.is_none() {
        return Err(Error::Config("--inverse needs --input".into())).op("transform");
    }
    let level = input
        .as_ref()
        .map(|f| f.level)
        .or(a.level)
        .unwrap_or(cfg.compress.max_level);
    let mut timing = Timing(Vec::new());
    let t = Instant::now();
    let grid = ImmersedGrid::new(&cfg.geometry, level, cfg.wavelet.n()).op("building grid")?;
    let plan = TransformPlan::new(grid, cfg.wavelet, &cfg.stencil).op("building transform plan")?;
    timing.since("plan", t);
    let grid = plan.grid();

    let t = Instant::now();
    let (values, name) = if a.inverse {
        let f = input.expect("checked above");
        f.check_grid(grid).op("matching input to the grid")?;
        let c = CoefficientField {
            data: f.values,
            level,
            n: grid.n(),
        };
        (iwt2d(&c, &plan, None).op("iwt2d")?, "field.iwf")
    } else {
        let field = match input {
            Some(f) => {
                f.check_grid(grid).op("matching input to the grid")?;
                f.values
            }
            None => grid.sample(compression_test_field),
        };
        let c = fwt2d(&field, &plan, None).op("fwt2d")?;
        let m = c.class_max();
        println!(
            "level {level}: max |gamma_x| {:.3e}, |gamma_y| {:.3e}, |gamma_xy| {:.3e}",
            m.gx, m.gy, m.gxy
        );
        (c.data, "coeffs.iwf")
    };
    timing.since(if a.inverse { "iwt2d" } else { "fwt2d" }, t);
    let out = a.out.unwrap_or_else(|| out_path(&cfg, name));
    let file = FieldFile::from_grid(grid, &values);
    write_field(&out, &file).op("writing field file")?;
    timing.write(&out_path(&cfg, "timing.csv"))
}

fn decision_code(d: Decision) -> f64 {
    match d {
        Decision::Coarsen => -1.0,
        Decision::Keep => 0.0,
        Decision::Refine => 1.0,
    }
}

fn diffuse(mut cfg: RunConfig, a: DiffuseArgs) -> Result<(), Failure> {
    let d = &mut cfg.diffusion;
    macro_rules! take {
        ($($field:ident <- $flag:ident),*) => { $( if let Some(v) = a.$flag { d.$field = v; } )* };
    }
    take!(eps_r <- eps_r, eps_ratio <- eps_ratio, k <- k, cadence <- cadence, t_final <- tfinal,
          fourier <- fourier, start_level <- start_level, min_level <- min_level, max_level <- max_level);
    if a.ref_level.is_some() {
        d.ref_level = a.ref_level;
    }
    if a.ghost_radius.is_some() {
        d.ghost_radius = a.ghost_radius;
    }
    if a.sweep.is_some() {
        d.sweep = a.sweep;
    }
    finish_config(&mut cfg, &a.grid)?;
    let d = &cfg.diffusion;
    let n = cfg.wavelet.n();
    let eps_list = d.sweep.map(|s| s.values()).unwrap_or_else(|| vec![d.eps_r]);

    // Reject bad thresholds before any expensive work.
    let new_state = |eps_r: f64| -> Result<AdaptationState, Failure> {
        AdaptationState::new(d.start_level, eps_r / d.eps_ratio, eps_r, d.k, n)
            .and_then(|s| s.with_levels(d.min_level, d.max_level))
            .and_then(|s| s.with_cadence(d.cadence))
            .op("checking adaptation thresholds")
    };
    for &e in &eps_list {
        new_state(e)?;
    }
    let reference = a.reference.as_deref().map(read_input).transpose()?;
    let ref_level = reference.as_ref().map(|f| f.level).or(d.ref_level);
    if let Some(r) = ref_level {
        if r < d.max_level {
            return Err(Error::Config(format!(
                "reference level {r} is below the finest adaptive level {}",
                d.max_level
            )))
            .op("checking reference level");
        }
    }

    let mut problem = DiffusionProblem::benchmark(cfg.geometry.clone(), d.t_final);
    problem.fourier = d.fourier;
    let radius = d.ghost_radius.unwrap_or_else(|| default_ghost_radius(n));
    let mut timing = Timing(Vec::new());
    let t = Instant::now();
    let top = ref_level.unwrap_or(d.max_level).max(d.max_level);
    let plans = PlanHierarchy::new(&cfg.geometry, d.min_level, top, cfg.wavelet, &cfg.stencil)
        .op("building transform plans")?;
    timing.since("plans", t);

    let reference = match (reference, ref_level) {
        (Some(f), Some(r)) => {
            f.check_grid(plans.grid(r))
                .op("matching reference to the grid")?;
            Some((f.values, r))
        }
        (None, Some(r)) => {
            let t = Instant::now();
            let u = run_fixed(&problem, plans.grid(r), radius).op("reference run")?;
            timing.since(format!("reference_L{r}"), t);
            write_field(
                &out_path(&cfg, "reference.iwf"),
                &FieldFile::from_grid(plans.grid(r), &u),
            )
            .op("writing reference field")?;
            Some((u, r))
        }
        _ => None,
    };

    let mut summary = Vec::new();
    for (idx, &eps_r) in eps_list.iter().enumerate() {
        let tag = if eps_list.len() == 1 {
            String::new()
        } else {
            format!("_{idx:02}")
        };
        let mut state = new_state(eps_r)?;
        let rec = run_adaptive(&problem, &plans, &mut state, radius).op("diffusion run")?;
        timing.since(format!("run{tag}"), Instant::now() - rec.wall_time);
        let rows: Vec<Vec<f64>> = rec
            .events
            .iter()
            .zip(&rec.trace)
            .map(|(ev, tr)| {
                vec![
                    ev.t,
                    ev.level as f64,
                    decision_code(ev.decision),
                    ev.max_detail,
                    ev.factor * state.eps_c,
                    ev.factor * state.eps_r,
                    tr.dt,
                ]
            })
            .collect();
        write_csv(
            &out_path(&cfg, &format!("run{tag}.csv")),
            &[
                "t",
                "level",
                "decision",
                "max_detail",
                "lower",
                "upper",
                "dt",
            ],
            &rows,
        )
        .op("writing run record")?;
        write_field(
            &out_path(&cfg, &format!("final{tag}.iwf")),
            &FieldFile::from_grid(plans.grid(rec.final_level), &rec.final_field),
        )
        .op("writing final field")?;
        let band = state.band_fraction();
        let mut line = format!(
            "eps_r {eps_r:.3e}: final level {}, {} steps, {} events, {:.1}% in band",
            rec.final_level,
            rec.steps,
            rec.events.len(),
            100.0 * band
        );
        let mut row = vec![eps_r, rec.final_level as f64, rec.steps as f64, band];
        if let Some((u, r)) = &reference {
            let (l2, linf) = compare_to_reference(&rec.final_field, rec.final_level, u, *r);
            let _ = write!(line, ", L2 {l2:.3e}, Linf {linf:.3e}");
            row.extend([l2, linf]);
        }
        println!("{line}");
        summary.push(row);
    }

    if reference.is_some() {
        write_csv(
            &out_path(&cfg, "errors.csv"),
            &[
                "eps_r",
                "final_level",
                "steps",
                "band_fraction",
                "L2",
                "Linf",
            ],
            &summary,
        )
        .op("writing error summary")?;
        let pick = |c: usize| -> Vec<(f64, f64)> {
            summary
                .iter()
                .filter(|r| r[c] > 0.0)
                .map(|r| (r[0], r[c]))
                .collect()
        };
        if summary.len() >= 2 {
            let series = [
                Series {
                    label: "L2".into(),
                    points: pick(4),
                },
                Series {
                    label: "Linf".into(),
                    points: pick(5),
                },
            ];
            let spec = PlotSpec {
                title: "Diffusion error against threshold".into(),
                xlabel: "eps_r".into(),
                ylabel: "error".into(),
                guide_slope: Some(1.0),
            };
            emit_loglog_plot(&series, &spec, &out_path(&cfg, "errors.svg")).op("writing plot")?;
            for (name, c) in [("L2", 4), ("Linf", 5)] {
                if let Ok(fit) = loglog_fit(&pick(c)) {
                    println!("{name} slope against eps_r: {:.3}", fit.slope);
                }
            }
        }
    }
    timing.write(&out_path(&cfg, "timing.csv"))
}

fn lebesgue(a: LebesgueArgs) -> Result<(), Failure> {
    let orders: Vec<usize> = match a.n {
        Some(n) => vec![n],
        None => (1..=6).map(|k| 2 * k).collect(),
    };
    match a.psi {
        Some(p) => println!(
            "{:>3}  {:>14}  {:>12}  {:>14}",
            "N",
            "exact",
            "rho",
            format!("rho_bc({p})")
        ),
        None => println!("{:>3}  {:>14}  {:>12}", "N", "exact", "rho"),
    }
    for n in orders {
        let exact = lebesgue_ratio_exact(n).op("lebesgue_ratio")?;
        let rho = lebesgue_ratio(n).op("lebesgue_ratio")?;
        let mut line = format!("{n:>3}  {:>14}  {rho:>12.6}", exact.to_string());
        if let Some(p) = a.psi {
            let bc = lebesgue_ratio_bc(n, p).op("lebesgue_ratio_bc")?;
            let _ = write!(line, "  {bc:>14.6}");
        }
        println!("{line}");
    }
    Ok(())
}

fn convergence(a: ConvergenceArgs) -> Result<(), Failure> {
    let pairs = read_pairs_csv(&a.input).op("reading convergence data")?;
    let fit = loglog_fit(&pairs).op("loglog_fit")?;
    println!("points    {}", pairs.len());
    println!("slope     {:.6}", fit.slope);
    println!("prefactor {:.6e}", fit.prefactor());
    println!("residual  {:.3e}", fit.residual);
    if let Some(plot) = a.plot {
        let spec = PlotSpec {
            title: format!("slope {:.3}", fit.slope),
            xlabel: "x".into(),
            ylabel: "y".into(),
            guide_slope: a.guide,
        };
        let series = [Series {
            label: a.input.display().to_string(),
            points: pairs,
        }];
        emit_loglog_plot(&series, &spec, &plot).op("writing plot")?;
    }
    Ok(())
}

fn scaling(mut cfg: RunConfig, a: ScalingArgs) -> Result<(), Failure> {
    finish_config(&mut cfg, &a.grid)?;
    let ctx = match a.context {
        Context::Free => ScalingContext::FreeSpace,
        Context::Type1 => ScalingContext::NearBoundary {
            closure: EndClosure::TypeI,
            node: a.node,
        },
        Context::Type2 => ScalingContext::NearBoundary {
            closure: EndClosure::TypeII {
                value: 0.0,
                offset: a.offset,
            },
            node: a.node,
        },
    };
    let samples = scaling_function_samples(cfg.wavelet, a.refinements, &ctx)
        .op("scaling_function_samples")?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|p| p.to_vec()).collect();
    let out = a.out.unwrap_or_else(|| out_path(&cfg, "scaling.csv"));
    write_csv(&out, &["x", "phi"], &rows).op("writing samples")?;
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| {
            (l.min(p[1]), h.max(p[1]))
        });
    println!(
        "{} samples of the {} scaling function, range [{lo:.4}, {hi:.4}]",
        samples.len(),
        cfg.wavelet
    );
    Ok(())
}
