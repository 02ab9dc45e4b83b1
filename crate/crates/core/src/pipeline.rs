//! Orchestration of the commands: analyze, solve, verify and sweep.
//!
//! A solve runs the stages data → split → mild → background → cutoff →
//! galerkin → compose and writes each artifact as soon as its stage
//! finishes, so a failed run keeps what was produced. The report has three
//! parts: run context (with the configuration echo), stage results recorded
//! in `stages.kv`, and diagnostics recomputed from the stored fields. Verify
//! reloads the artifacts and recomputes the last part, so on an untouched run
//! directory it reproduces the solve-time report byte for byte. Wall-clock
//! times go to `timings.txt` only.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{norm_report, split_initial_data, weak_l3_norm, BesovIndex, Split};
use crate::config::{ProfileKind, RunConfig, SplitMode, AUTO_SPLIT_EPS};
use crate::data::DataProfile;
use crate::diagnostics::{
    apriori_bound_check, convergence_rate_fit, integrated_rate_fit, local_energy_battery, LocalEnergyInput, RateFit,
};
use crate::error::{Error, Result};
use crate::galerkin::{
    compose_solution, energy_identity_defect, eq_a_residual, orbit_energy_norm, solve_periodic, Basis, GalerkinOptions,
    REPORT_FRACTION,
};
use crate::grid::{Grid, Interp, VectorField};
use crate::io::{self, FieldFile};
use crate::linear::{
    build_u0, build_w, data_divergence_ratio, divergence_ratio, flux_window_weights, mild_solve_small, sup_lq, verify_assumption_u0,
    BackgroundField, CutoffField, MildSolution, DIVERGENCE_TOLERANCE,
};
use crate::report::{cell, Report, Table};
use crate::symmetry::{data_symmetry_defect, symmetry_defect, DomainShape, SymmetrySpec};
use crate::transform::{from_profile, periodicity_defect, PhysicalField, ProfileLayout, ProfileTrajectory, SliceLayout};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Halvings of the splitting threshold tried when `data.eps = auto`.
pub const MAX_AUTO_HALVINGS: usize = 5;

/// Largest Picard contraction factor accepted when `data.eps = auto`.
pub const MAX_CONTRACTION: f64 = 0.5;

/// Local energy checks pass when `slack ≥ -LOCAL_ENERGY_FACTOR · tol`.
pub const LOCAL_ENERGY_FACTOR: f64 = 10.0;

/// Pointwise rate target for the `a` component.
pub const A_RATE_TARGET: f64 = 0.25;

/// Names of the files in a run directory.
pub mod files {
    pub const CONFIG: &str = "config.txt";
    pub const STAGES: &str = "stages.kv";
    pub const REPORT: &str = "report.kv";
    pub const REPORT_TEXT: &str = "report.txt";
    pub const VERIFY: &str = "verify.kv";
    pub const VERIFY_TEXT: &str = "verify.txt";
    pub const TIMINGS: &str = "timings.txt";
    pub const FAILURE: &str = "failure.txt";
    pub const V0: &str = "v0.lprf";
    pub const A0: &str = "a0.lprf";
    pub const B0: &str = "b0.lprf";
    pub const B: &str = "B.lprf";
    pub const B_HEAT: &str = "B_heat.lprf";
    pub const U0: &str = "U0.lprf";
    pub const W: &str = "W.lprf";
    pub const COEFFICIENTS: &str = "galerkin.lprf";
    pub const A: &str = "A.lprf";
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Default)]
pub struct Timings(pub Vec<(String, f64)>);

impl Timings {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| match e {
            e @ Error::Stage { .. } => e,
            e => e.in_stage(stage),
        });
        self.0.push((stage.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(s, t)| format!("{s} {t:.3}\n")).collect()
    }
}

/// Where artifacts go, if anywhere.
struct Sink<'a>(Option<&'a Path>);

impl Sink<'_> {
    fn bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = self.0 {
            fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }

    fn field(&self, name: &str, file: FieldFile) -> Result<()> {
        self.bytes(name, &file.to_bytes())
    }
}

/// Builds the initial data.
pub fn load_data(cfg: &RunConfig) -> Result<DataProfile> {
    let d = &cfg.data;
    Ok(match d.profile {
        ProfileKind::Zero => DataProfile::Zero,
        ProfileKind::Swirl => DataProfile::Swirl {
            amplitude: d.amplitude,
            gamma: d.gamma,
            modulation: d.modulation,
            lambda: d.lambda,
        },
        ProfileKind::Radial => DataProfile::Radial { amplitude: d.amplitude },
        ProfileKind::Tabulated => {
            let path = d.file.as_ref().ok_or_else(|| Error::config("tabulated data needs data.file"))?;
            let name = path.display().to_string();
            let data = io::domain_from_file(&FieldFile::read(path)?, &name)?;
            let spec = cfg.symmetry()?;
            if let DomainShape::Annulus { lambda, .. } = data.shape {
                if spec.mismatches_annulus(lambda) {
                    return Err(Error::config(format!(
                        "annulus tabulated for lambda = {lambda} but the configured symmetry uses {}",
                        spec.lambda
                    )));
                }
            }
            DataProfile::Tabulated {
                data: std::sync::Arc::new(data),
                spec,
            }
        }
    })
}

trait SpecExt {
    fn mismatches_annulus(&self, lambda: f64) -> bool;
}

impl SpecExt for SymmetrySpec {
    /// True when an annulus tabulated for `lambda` cannot serve this spec.
    fn mismatches_annulus(&self, lambda: f64) -> bool {
        self.kind.is_discrete() && (lambda - self.lambda).abs() > 1e-12 * lambda
    }
}

fn critical_index(cfg: &RunConfig, spec: &SymmetrySpec) -> BesovIndex {
    BesovIndex::critical(cfg.data.p, spec.discrete_pair().0)
}

fn norms_section(report: &mut Report, prefix: &str, f: &VectorField, index: BesovIndex) -> Result<Vec<(i32, f64)>> {
    let n = norm_report(f, index)?;
    report.num(format!("{prefix}.besov"), n.besov_value);
    report.num(format!("{prefix}.besov_s"), index.s);
    report.num(format!("{prefix}.besov_p"), index.p);
    report.num(format!("{prefix}.besov_q"), index.q);
    report.num(format!("{prefix}.weak_l3"), n.weak_l3);
    report.num(format!("{prefix}.l2_uloc"), n.l2_uloc);
    report.num(format!("{prefix}.max_abs"), f.max_abs());
    Ok(n.blocks)
}

/// Norms, symmetry defect and divergence of the configured data.
pub fn cmd_analyze(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let grid = cfg.grid()?;
    let spec = cfg.symmetry()?;
    let data = load_data(cfg)?;
    let v0 = data.sample(&grid);
    let mut r = context(cfg, &spec)?;
    r.text("data.profile", data.describe());
    let blocks = norms_section(&mut r, "data", &v0, critical_index(cfg, &spec))?;
    if let DataProfile::Radial { amplitude } = data {
        r.num(
            "data.weak_l3_reference",
            amplitude.abs() * (4.0 * std::f64::consts::PI / 3.0).powf(1.0 / 3.0),
        );
    }
    r.num("data.symmetry_defect", data_symmetry_defect(&v0, &spec)?);
    let div = data_divergence_ratio(&v0);
    r.num("data.divergence_ratio", div);
    r.num("data.divergence_tolerance", DIVERGENCE_TOLERANCE);
    r.flag("data.divergence_free", div <= DIVERGENCE_TOLERANCE);
    r.int("data.lp_blocks", blocks.len());
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut t = Table::new(&["j", "magnitude"]);
        for (j, m) in &blocks {
            t.row(vec![j.to_string(), cell(*m)]);
        }
        fs::write(dir.join("lp_blocks.csv"), t.to_csv())?;
        fs::write(dir.join("analysis.kv"), r.to_structured())?;
        fs::write(dir.join("analysis.txt"), r.to_text())?;
    }
    Ok(r)
}

/// Run context and configuration echo.
fn context(cfg: &RunConfig, spec: &SymmetrySpec) -> Result<Report> {
    let grid = cfg.grid()?;
    let mut r = Report::new();
    r.text("run.version", VERSION);
    r.push("run.seed", crate::report::Value::Int(cfg.seed as i64));
    r.text("run.symmetry", spec.kind.name());
    r.num("run.lambda", spec.discrete_pair().0);
    r.num("run.alpha", spec.frame_speed());
    r.num("run.period", spec.period());
    r.int("grid.n", grid.n());
    r.num("grid.half_width", grid.half_width());
    r.num("grid.spacing", grid.spacing());
    r.int("grid.s_nodes", cfg.s_nodes);
    r.num("grid.report_fraction", REPORT_FRACTION);
    let mut echo = cfg.clone();
    echo.output = None;
    for line in echo.to_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            r.text(format!("config.{k}"), v);
        }
    }
    Ok(r)
}

fn split_data(cfg: &RunConfig, v0: &DataProfile, grid: &Grid, spec: &SymmetrySpec, eps: f64) -> Result<Split> {
    let lambda = spec.discrete_pair().0;
    let whole = |a0: DataProfile, b0: DataProfile| -> Result<Split> {
        let (sa, sb) = (a0.sample(grid), b0.sample(grid));
        let index = critical_index(cfg, spec);
        Ok(Split {
            besov_b0: norm_report(&sb, index)?.besov_value,
            weak_l3_a0: weak_l3_norm(&sa),
            symmetry_defect_a0: data_symmetry_defect(&sa, spec)?,
            symmetry_defect_b0: data_symmetry_defect(&sb, spec)?,
            a0,
            b0,
            level: None,
            bisection_steps: 0,
        })
    };
    match cfg.data.split {
        SplitMode::Auto => split_initial_data(v0, grid, eps, cfg.data.p, lambda),
        SplitMode::Galerkin => whole(v0.clone(), DataProfile::Zero),
        SplitMode::Mild => whole(DataProfile::Zero, v0.clone()),
    }
}

/// Everything up to and including the cutoff field.
struct Prepared {
    layout: ProfileLayout,
    alpha: f64,
    v0: VectorField,
    split: Split,
    mild: MildSolution,
    background: BackgroundField,
    cutoff: CutoffField,
}

fn prepare(cfg: &RunConfig, timings: &mut Timings, sink: &Sink<'_>, stages: &mut Report) -> Result<Prepared> {
    let spec = cfg.symmetry()?;
    let layout = cfg.layout()?;
    let grid = layout.grid;
    let alpha = spec.frame_speed();
    let data = timings.time("data", || load_data(cfg))?;
    let v0 = data.sample(&grid);
    sink.field(files::V0, io::vector_to_file(&v0))?;

    let mut eps = cfg.data.eps.unwrap_or(AUTO_SPLIT_EPS);
    let mut halvings = 0;
    let (split, mild) = loop {
        let split = timings.time("split", || split_data(cfg, &data, &grid, &spec, eps))?;
        let may_retry = cfg.data.eps.is_none()
            && cfg.data.split == SplitMode::Auto
            && split.level.is_some()
            && halvings < MAX_AUTO_HALVINGS;
        match timings.time("mild", || mild_solve_small(&split.b0, &layout, alpha, &cfg.mild)) {
            Ok(m) if !may_retry || m.contraction_factors().iter().all(|c| *c <= MAX_CONTRACTION) => break (split, m),
            Ok(_) => {}
            Err(Error::Stage { source, .. }) if may_retry && matches!(*source, Error::Diverged { .. }) => {}
            Err(e) => return Err(e),
        }
        eps *= 0.5;
        halvings += 1;
    };
    sink.field(files::A0, io::vector_to_file(&split.a0.sample(&grid)))?;
    sink.field(files::B0, io::vector_to_file(&split.b0.sample(&grid)))?;
    let mode = match (cfg.data.split, split.level) {
        (SplitMode::Galerkin, _) => "galerkin",
        (SplitMode::Mild, _) => "mild",
        (SplitMode::Auto, Some(_)) => "truncated",
        (SplitMode::Auto, None) if split.b0 == DataProfile::Zero => "bounded",
        (SplitMode::Auto, None) => "small",
    };
    stages.text("split.mode", mode);
    stages.num("split.eps", eps);
    stages.int("split.eps_halvings", halvings);
    if let Some(level) = split.level {
        stages.num("split.level", level);
    }
    stages.num("split.besov_b0", split.besov_b0);
    stages.flag("split.besov_b0_below_eps", split.besov_b0 < eps || split.b0 == DataProfile::Zero);
    stages.num("split.weak_l3_a0", split.weak_l3_a0);
    stages.num("split.symmetry_defect_a0", split.symmetry_defect_a0);
    stages.num("split.symmetry_defect_b0", split.symmetry_defect_b0);
    stages.int("split.bisection_steps", split.bisection_steps);

    sink.field(files::B, io::profile_to_file(&mild.profile))?;
    sink.field(files::B_HEAT, io::profile_to_file(&mild.heat))?;
    stages.int("mild.iterations", mild.history.len());
    stages.num("mild.final_increment", mild.history.last().copied().unwrap_or(0.0));
    stages.num("mild.tolerance", cfg.mild.tol);
    stages.num("mild.duhamel_residual", mild.duhamel_residual);
    stages.num(
        "mild.max_contraction",
        mild.contraction_factors().into_iter().fold(0.0, f64::max),
    );

    let background = timings.time("background", || build_u0(&split.a0, &layout, alpha, cfg.w_q))?;
    sink.field(files::U0, io::profile_to_file(&background.u0))?;
    stages.flag("background.closed_form", background.closed_form);

    let cutoff = timings.time("cutoff", || build_w(&background, cfg.w_alpha, cfg.w_q))?;
    sink.field(files::W, io::profile_to_file(&cutoff.w))?;
    stages.num("cutoff.r0", cutoff.r0);
    stages.num("cutoff.alpha", cutoff.alpha_target);
    stages.num("cutoff.q", cutoff.q);
    stages.num("cutoff.sup_lq", cutoff.sup_lq);
    stages.num("cutoff.divergence_defect", cutoff.divergence_defect);
    stages.num("cutoff.energy_gap", cutoff.energy_gap);
    Ok(Prepared {
        layout,
        alpha,
        v0,
        split,
        mild,
        background,
        cutoff,
    })
}

fn galerkin_options(cfg: &RunConfig) -> GalerkinOptions {
    GalerkinOptions {
        seed: cfg.seed,
        ..cfg.galerkin.clone()
    }
}

/// Galerkin orbit and composed `A`, with stage entries under `prefix`.
struct Orbit {
    rows: Vec<Vec<f64>>,
    a: ProfileTrajectory,
    energy_norm: f64,
}

fn solve_orbit(cfg: &RunConfig, p: &Prepared, opts: &GalerkinOptions, stages: &mut Report, timings: &mut Timings) -> Result<Orbit> {
    let grid = p.layout.grid;
    let state = timings.time("galerkin", || {
        let basis = Basis::new(grid.half_width(), opts.modes)?;
        solve_periodic(
            basis,
            Some(&grid),
            Some(&p.cutoff.w),
            Some(&p.mild.profile),
            p.layout.period,
            p.alpha,
            opts,
        )
    })?;
    stages.int("galerkin.modes", state.k());
    stages.num("galerkin.eps_moll", state.eps());
    stages.int("galerkin.steps", state.steps);
    stages.num("galerkin.delta", state.delta);
    stages.num("galerkin.c2", state.c2);
    stages.num("galerkin.rho", state.certificate.rho);
    stages.flag("galerkin.ball_certified", state.certificate.passed);
    stages.int("galerkin.ball_probes", state.certificate.images.len());
    stages.num("galerkin.fixed_point_residual", state.fixed_point.residual);
    stages.num("galerkin.fixed_point_tolerance", opts.fixed_point.tol);
    stages.int("galerkin.fixed_point_iterations", state.fixed_point.iterations);
    stages.num("galerkin.periodicity_defect", state.periodicity_defect);
    stages.num(
        "galerkin.energy_identity_defect",
        energy_identity_defect(&state.tensors, &state.trajectory),
    );
    stages.num("galerkin.gronwall_margin", state.gronwall_margin());
    let energy_norm = state.energy_norm();
    let a = timings.time("compose", || {
        let u = state.profile(&p.layout)?;
        let window = flux_window_weights(&grid);
        Ok(compose_solution(&u, Some(&p.cutoff.w), Some(&p.mild.profile), Some(&window), 0..1)?.profile_a)
    })?;
    let _ = cfg;
    Ok(Orbit {
        rows: state.trajectory.b,
        a,
        energy_norm,
    })
}

/// Fields a run directory holds.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: RunConfig,
    pub v0: VectorField,
    pub a0: VectorField,
    pub b0: VectorField,
    pub b: ProfileTrajectory,
    pub b_heat: ProfileTrajectory,
    pub u0: ProfileTrajectory,
    pub w: ProfileTrajectory,
    /// Galerkin coefficients at every time step of one period.
    pub coefficients: Vec<Vec<f64>>,
    /// `A = U + W` with pressure `p_A`.
    pub a: ProfileTrajectory,
    pub stages: Report,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub artifacts: RunArtifacts,
    pub report: Report,
    pub tables: Vec<(String, Table)>,
    pub timings: Timings,
}

/// Runs the full pipeline; with `out`, writes the run directory.
pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<SolveOutcome> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let _ = fs::remove_file(dir.join(files::FAILURE));
    }
    let sink = Sink(out);
    let mut timings = Timings::default();
    let mut stages = Report::new();
    let mut echo = cfg.clone();
    echo.output = None;
    sink.bytes(files::CONFIG, echo.to_text().as_bytes())?;
    let result = run_stages(cfg, &sink, &mut stages, &mut timings);
    sink.bytes(files::STAGES, stages.to_structured().as_bytes())?;
    let artifacts = match result {
        Ok(mut a) => {
            a.stages = stages;
            a
        }
        Err(e) => {
            sink.bytes(files::FAILURE, format!("{e}\n").as_bytes())?;
            sink.bytes(files::TIMINGS, timings.to_text().as_bytes())?;
            return Err(e);
        }
    };
    let (report, tables) = match timings.time("verify", || full_report(&artifacts)) {
        Ok(x) => x,
        Err(e) => {
            sink.bytes(files::FAILURE, format!("{e}\n").as_bytes())?;
            return Err(e);
        }
    };
    sink.bytes(files::REPORT, report.to_structured().as_bytes())?;
    sink.bytes(files::REPORT_TEXT, report.to_text().as_bytes())?;
    for (name, t) in &tables {
        sink.bytes(name, t.to_csv().as_bytes())?;
    }
    sink.bytes(files::TIMINGS, timings.to_text().as_bytes())?;
    Ok(SolveOutcome {
        artifacts,
        report,
        tables,
        timings,
    })
}

fn run_stages(cfg: &RunConfig, sink: &Sink<'_>, stages: &mut Report, timings: &mut Timings) -> Result<RunArtifacts> {
    let p = prepare(cfg, timings, sink, stages)?;
    let orbit = solve_orbit(cfg, &p, &galerkin_options(cfg), stages, timings)?;
    sink.field(files::COEFFICIENTS, io::coefficients_to_file(&orbit.rows))?;
    sink.field(files::A, io::profile_to_file(&orbit.a))?;
    let grid = p.layout.grid;
    Ok(RunArtifacts {
        config: cfg.clone(),
        a0: p.split.a0.sample(&grid),
        b0: p.split.b0.sample(&grid),
        v0: p.v0,
        b: p.mild.profile,
        b_heat: p.mild.heat,
        u0: p.background.u0,
        w: p.cutoff.w,
        coefficients: orbit.rows,
        a: orbit.a,
        stages: Report::new(),
    })
}

/// Reloads a run directory; damaged or missing files raise integrity errors.
pub fn load_artifacts(dir: &Path) -> Result<RunArtifacts> {
    let path = |name: &str| -> PathBuf { dir.join(name) };
    let text = |name: &str| -> Result<String> {
        fs::read_to_string(path(name)).map_err(|e| Error::Integrity {
            file: path(name).display().to_string(),
            message: e.to_string(),
        })
    };
    let config = RunConfig::parse(&text(files::CONFIG)?).map_err(|e| Error::Integrity {
        file: path(files::CONFIG).display().to_string(),
        message: e.to_string(),
    })?;
    let stages = Report::parse_structured(&text(files::STAGES)?, &path(files::STAGES).display().to_string())?;
    let field = |name: &str| -> Result<(FieldFile, String)> {
        let p = path(name);
        Ok((FieldFile::read(&p)?, p.display().to_string()))
    };
    let vector = |name: &str| -> Result<VectorField> {
        let (f, n) = field(name)?;
        io::vector_from_file(&f, &n)
    };
    let profile = |name: &str| -> Result<ProfileTrajectory> {
        let (f, n) = field(name)?;
        io::profile_from_file(&f, &n)
    };
    let (cf, cn) = field(files::COEFFICIENTS)?;
    let art = RunArtifacts {
        v0: vector(files::V0)?,
        a0: vector(files::A0)?,
        b0: vector(files::B0)?,
        b: profile(files::B)?,
        b_heat: profile(files::B_HEAT)?,
        u0: profile(files::U0)?,
        w: profile(files::W)?,
        coefficients: io::coefficients_from_file(&cf, &cn)?,
        a: profile(files::A)?,
        stages,
        config,
    };
    let layout = art.config.layout().map_err(|e| Error::Integrity {
        file: path(files::CONFIG).display().to_string(),
        message: e.to_string(),
    })?;
    for (name, traj) in [
        (files::B, &art.b),
        (files::B_HEAT, &art.b_heat),
        (files::U0, &art.u0),
        (files::W, &art.w),
        (files::A, &art.a),
    ] {
        if traj.layout() != layout {
            return Err(Error::Integrity {
                file: path(name).display().to_string(),
                message: "layout does not match the run configuration".into(),
            });
        }
    }
    for (name, f) in [(files::V0, &art.v0), (files::A0, &art.a0), (files::B0, &art.b0)] {
        if f.grid != layout.grid {
            return Err(Error::Integrity {
                file: path(name).display().to_string(),
                message: "grid does not match the run configuration".into(),
            });
        }
    }
    Ok(art)
}

/// Re-runs the checks on a run directory and writes `verify.kv`.
pub fn cmd_verify(dir: &Path) -> Result<Report> {
    let art = load_artifacts(dir)?;
    let (report, _) = full_report(&art).map_err(|e| e.in_stage("verify"))?;
    fs::write(dir.join(files::VERIFY), report.to_structured())?;
    fs::write(dir.join(files::VERIFY_TEXT), report.to_text())?;
    Ok(report)
}

fn full_report(art: &RunArtifacts) -> Result<(Report, Vec<(String, Table)>)> {
    let spec = art.config.symmetry()?;
    let mut report = context(&art.config, &spec)?;
    for (path, value) in &art.stages.entries {
        report.push(format!("stage.{path}"), value.clone());
    }
    let (diag, tables) = diagnose(art, &spec)?;
    report.extend(diag);
    Ok((report, tables))
}

/// `(t, t^{γ}‖A(s) - U₀(s)‖_{L^r})` at `n` log-spaced `t ∈ [1, 10^decades]`,
/// with `s = log t` reduced mod the period, over the report region.
fn a_rate_samples(a: &ProfileTrajectory, u0: &ProfileTrajectory, r: f64, n: usize, decades: f64) -> Vec<(f64, f64)> {
    let grid = a.grid;
    let gamma = -0.5 + 1.5 / r;
    let h3 = grid.cell_volume();
    (0..n)
        .map(|j| {
            let t = 10f64.powf(decades * j as f64 / (n - 1) as f64);
            let s = t.ln().rem_euclid(a.period);
            let diff = a.velocity_at(s).sub(&u0.velocity_at(s));
            let sum: f64 = (0..grid.len())
                .filter(|&i| grid.in_interior(i, REPORT_FRACTION))
                .map(|i| crate::grid::norm(diff.get(i)).powf(r))
                .sum();
            (t, t.powf(gamma) * (sum * h3).powf(1.0 / r))
        })
        .collect()
}

fn rate_entries(report: &mut Report, table: &mut Table, name: &str, samples: &[(f64, f64)], fit: Result<RateFit>) {
    for (t, x) in samples {
        table.row(vec![name.to_string(), cell(*t), cell(*x)]);
    }
    match fit {
        Ok(fit) => {
            report.num(format!("rates.{name}.exponent"), fit.exponent);
            report.num(format!("rates.{name}.constant"), fit.constant);
            report.num(format!("rates.{name}.target"), fit.target);
            report.num(format!("rates.{name}.tolerance"), fit.tolerance);
            report.flag(format!("rates.{name}.inconclusive"), fit.inconclusive);
            if let Some(p) = fit.passed() {
                report.flag(format!("rates.{name}.passed"), p);
            }
        }
        Err(e) => report.text(format!("rates.{name}.error"), e.to_string()),
    }
}

/// Physical fields on a fixed box over `t ∈ [1, 1 + c₀r²_max]`.
fn fixed_window(v: &PhysicalField, grid: &Grid, horizon: f64) -> Result<PhysicalField> {
    let fixed = Grid::new(grid.n(), crate::transform::INTERIOR_FRACTION * grid.half_width())?;
    let levels = 9;
    let layout: Vec<SliceLayout> = (0..levels)
        .map(|k| SliceLayout {
            t: 1.0 + horizon * k as f64 / (levels - 1) as f64,
            grid: fixed,
            angle: 0.0,
        })
        .collect();
    v.resample(&layout, Interp::Cubic)
}

fn diagnose(art: &RunArtifacts, spec: &SymmetrySpec) -> Result<(Report, Vec<(String, Table)>)> {
    let cfg = &art.config;
    let layout = cfg.layout()?;
    let grid = layout.grid;
    let mut r = Report::new();
    let mut tables = Vec::new();

    let index = critical_index(cfg, spec);
    let blocks = norms_section(&mut r, "data.v0", &art.v0, index)?;
    norms_section(&mut r, "data.a0", &art.a0, index)?;
    norms_section(&mut r, "data.b0", &art.b0, index)?;
    r.num("data.v0.symmetry_defect", data_symmetry_defect(&art.v0, spec)?);
    let div = data_divergence_ratio(&art.v0);
    r.num("data.v0.divergence_ratio", div);
    r.flag("data.v0.divergence_free", div <= DIVERGENCE_TOLERANCE);
    let mut t = Table::new(&["j", "magnitude"]);
    for (j, m) in &blocks {
        t.row(vec![j.to_string(), cell(*m)]);
    }
    tables.push(("lp_blocks.csv".to_string(), t));

    let closed = art.stages.boolean("background.closed_form").unwrap_or(false);
    let bg = BackgroundField::from_trajectory(art.u0.clone(), cfg.w_q, closed);
    let assumption = verify_assumption_u0(&bg)?;
    r.num("background.residual", assumption.residual);
    r.num("background.relative_residual", assumption.relative_residual);
    r.num("background.sup_l4", assumption.sup_l4);
    r.num("background.sup_lq", assumption.sup_lq);
    r.num("background.s_variation", assumption.s_variation);
    r.num("background.divergence_ratio", assumption.divergence_ratio);
    r.flag("background.tail_monotone", assumption.monotone);
    for (radius, theta) in &assumption.theta {
        r.num(format!("background.theta.r{radius}"), *theta);
    }
    let w_sup = sup_lq(&art.w, cfg.w_q);
    r.num("cutoff.sup_lq", w_sup);
    r.num("cutoff.alpha", cfg.w_alpha);
    r.flag("cutoff.small", w_sup <= cfg.w_alpha);
    r.num(
        "cutoff.divergence_ratio",
        art.w.velocity.iter().map(divergence_ratio).fold(0.0, f64::max),
    );

    let basis = Basis::new(grid.half_width(), cfg.galerkin.modes)?;
    let rows = &art.coefficients;
    r.num("galerkin.energy_norm", orbit_energy_norm(&basis, rows, layout.period));
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    r.num(
        "galerkin.orbit_closure",
        first.iter().zip(last).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
    );
    let mut energy = Table::new(&["s", "energy"]);
    let ds = layout.period / (rows.len() - 1) as f64;
    for (n, b) in rows.iter().enumerate() {
        energy.row(vec![cell(n as f64 * ds), cell(b.iter().map(|x| x * x).sum())]);
    }
    tables.push(("energy.csv".to_string(), energy));

    let residual = eq_a_residual(&art.a, Some(&art.b))?;
    let keep = |i: usize| grid.in_interior(i, REPORT_FRACTION);
    let eq_a = residual.iter().map(|f| f.l2_norm_masked(keep)).fold(0.0, f64::max);
    let scale = art.a.sup_l2_interior(REPORT_FRACTION);
    r.num("compose.eq_a_residual", eq_a);
    r.num("compose.eq_a_relative", if scale > 0.0 { eq_a / scale } else { 0.0 });
    r.num("compose.sup_l2_a", scale);
    r.num("compose.sup_l2_b", art.b.sup_l2_interior(REPORT_FRACTION));

    let periods = cfg.diagnostics.periods.max(2) as i32;
    let v = from_profile(&art.a, 0..periods)?.add(&from_profile(&art.b, 0..periods)?)?;
    r.num("physical.periodicity_defect", periodicity_defect(&v, art.a.alpha, &grid, layout.period)?);
    r.num("physical.symmetry_defect", symmetry_defect(&v, spec)?);

    if cfg.diagnostics.local_energy {
        let cases = local_energy_battery(
            &LocalEnergyInput::Profile {
                a: &art.a,
                b: Some(&art.b),
            },
            cfg.seed,
        )?;
        let mut t = Table::new(&["case", "cx", "cy", "cz", "radius", "s_center", "s_radius", "lhs", "rhs", "slack", "tol"]);
        let mut passed = 0;
        let mut worst = f64::INFINITY;
        for (i, c) in cases.iter().enumerate() {
            let ok = c.passes(LOCAL_ENERGY_FACTOR);
            passed += ok as usize;
            let margin = if c.quadrature_tol > 0.0 { c.slack / c.quadrature_tol } else { f64::INFINITY };
            worst = worst.min(margin);
            let key = format!("local_energy.case{i:02}");
            r.num(format!("{key}.lhs"), c.lhs);
            r.num(format!("{key}.rhs"), c.rhs);
            r.num(format!("{key}.slack"), c.slack);
            r.num(format!("{key}.quadrature_tol"), c.quadrature_tol);
            r.flag(format!("{key}.passed"), ok);
            let b = c.bump;
            t.row(vec![
                i.to_string(),
                cell(b.center[0]),
                cell(b.center[1]),
                cell(b.center[2]),
                cell(b.radius),
                cell(b.t_center),
                cell(b.t_radius),
                cell(c.lhs),
                cell(c.rhs),
                cell(c.slack),
                cell(c.quadrature_tol),
            ]);
        }
        r.text("local_energy.form", "profile");
        r.num("local_energy.factor", LOCAL_ENERGY_FACTOR);
        r.int("local_energy.passed", passed);
        r.int("local_energy.cases", cases.len());
        r.num("local_energy.worst_slack_over_tol", worst);
        r.flag("local_energy.all_passed", passed == cases.len());
        tables.push(("local_energy.csv".to_string(), t));
    }

    if cfg.diagnostics.apriori {
        let r_max = cfg.diagnostics.radii.iter().copied().fold(0.0, f64::max);
        let horizon = cfg.diagnostics.c0 * r_max * r_max;
        let fixed = fixed_window(&v, &grid, horizon)?;
        let start = fixed.slices[0].velocity.clone();
        let mut t = Table::new(&["r", "a_r", "sigma", "horizon", "lhs", "ratio"]);
        let mut max_ratio: f64 = 0.0;
        for &radius in &cfg.diagnostics.radii {
            let key = format!("apriori.r{radius}");
            match apriori_bound_check(&fixed, &start, radius, cfg.diagnostics.c0) {
                Ok(b) => {
                    r.num(format!("{key}.a_r"), b.a_r);
                    r.num(format!("{key}.sigma"), b.sigma);
                    r.num(format!("{key}.horizon"), b.horizon);
                    r.flag(format!("{key}.truncated"), b.truncated);
                    r.num(format!("{key}.lhs"), b.lhs);
                    r.num(format!("{key}.ratio"), b.ratio);
                    t.row(vec![cell(radius), cell(b.a_r), cell(b.sigma), cell(b.horizon), cell(b.lhs), cell(b.ratio)]);
                    max_ratio = max_ratio.max(b.ratio);
                }
                Err(e) => r.text(format!("{key}.error"), e.to_string()),
            }
        }
        r.num("apriori.c0", cfg.diagnostics.c0);
        r.num("apriori.max_ratio", max_ratio);
        tables.push(("apriori.csv".to_string(), t));
    }

    if cfg.diagnostics.rates {
        let mut t = Table::new(&["component", "t", "norm"]);
        let a2 = a_rate_samples(&art.a, &art.u0, 2.0, 12, 3.0);
        rate_entries(&mut r, &mut t, "a_l2", &a2, convergence_rate_fit(&a2, A_RATE_TARGET));
        let a4 = a_rate_samples(&art.a, &art.u0, 4.0, 12, 3.0);
        rate_entries(&mut r, &mut t, "a_l4_integrated", &a4, integrated_rate_fit(&a4, 8.0 / 3.0));
        let mild = MildSolution {
            profile: art.b.clone(),
            heat: art.b_heat.clone(),
            history: Vec::new(),
            duhamel_residual: 0.0,
            symmetry: *spec,
        };
        let periods = (3.0 * 10f64.ln() / layout.period).ceil() as usize + 1;
        let b2 = mild.decay_samples(2.0, periods.max(6));
        rate_entries(&mut r, &mut t, "b_l2", &b2, convergence_rate_fit(&b2, A_RATE_TARGET));
        tables.push(("rates.csv".to_string(), t));
    }
    Ok((r, tables))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    EpsMoll,
    Grid,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "k" => Self::K,
            "eps_moll" => Self::EpsMoll,
            "grid" => Self::Grid,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::K => "k",
            Self::EpsMoll => "eps_moll",
            Self::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `ok`, or the failure message.
    pub status: String,
    pub energy_norm: f64,
    pub fixed_point_residual: f64,
    pub eq_a_relative: f64,
    /// `sup_s ‖A - A_prev‖` on the report region, against the previous
    /// successful level.
    pub cauchy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[self.axis.name(), "status", "energy_norm", "fixed_point_residual", "eq_a_relative", "cauchy"]);
        for row in &self.rows {
            let value = match self.axis {
                SweepAxis::EpsMoll => cell(row.value),
                SweepAxis::K | SweepAxis::Grid => format!("{}", row.value as usize),
            };
            t.row(vec![
                value,
                row.status.replace([',', '\n'], ";"),
                cell(row.energy_norm),
                cell(row.fixed_point_residual),
                cell(row.eq_a_relative),
                row.cauchy.map_or(String::new(), cell),
            ]);
        }
        t
    }

    pub fn energy_norms(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.status == "ok").map(|r| r.energy_norm).collect()
    }
}

/// `sup_s` report-region L² distance, subsampling the finer grid.
fn profile_distance(fine: &ProfileTrajectory, coarse: &ProfileTrajectory) -> f64 {
    let (gf, gc) = (fine.grid, coarse.grid);
    let stride = gf.n() / gc.n();
    let h3 = gc.cell_volume();
    fine.velocity
        .iter()
        .zip(&coarse.velocity)
        .map(|(f, c)| {
            let mut sum = 0.0;
            for idx in 0..gc.len() {
                if !gc.in_interior(idx, REPORT_FRACTION) {
                    continue;
                }
                let (i, j, k) = gc.triple(idx);
                let x = f.get(gf.index(i * stride, j * stride, k * stride));
                let y = c.get(idx);
                sum += (0..3).map(|d| (x[d] - y[d]).powi(2)).sum::<f64>();
            }
            (sum * h3).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Refinement study along one axis; failed levels are marked and skipped.
pub fn cmd_sweep(cfg: &RunConfig, axis: SweepAxis, out: Option<&Path>) -> Result<SweepTable> {
    let values: Vec<f64> = match axis {
        SweepAxis::K => cfg.sweep.k.iter().map(|&k| k as f64).collect(),
        SweepAxis::EpsMoll => cfg.sweep.eps_moll.clone(),
        SweepAxis::Grid => cfg.sweep.grid.iter().map(|&n| n as f64).collect(),
    };
    if values.len() < 3 {
        return Err(Error::Precondition(format!(
            "a {} sweep needs at least 3 values, got {}",
            axis.name(),
            values.len()
        )));
    }
    let mut timings = Timings::default();
    let sink = Sink(None);
    let shared = match axis {
        SweepAxis::Grid => None,
        _ => Some(prepare(cfg, &mut timings, &sink, &mut Report::new())?),
    };
    let mut rows = Vec::with_capacity(values.len());
    let mut previous: Option<ProfileTrajectory> = None;
    for &value in &values {
        let mut level = cfg.clone();
        match axis {
            SweepAxis::K => level.galerkin.modes = value as usize,
            SweepAxis::EpsMoll => level.galerkin.eps = value,
            SweepAxis::Grid => level.grid_n = value as usize,
        }
        let outcome = (|| -> Result<(Orbit, f64, f64)> {
            level.validate()?;
            let local;
            let p = match &shared {
                Some(p) => p,
                None => {
                    local = prepare(&level, &mut timings, &sink, &mut Report::new())?;
                    &local
                }
            };
            let mut stages = Report::new();
            let orbit = solve_orbit(&level, p, &galerkin_options(&level), &mut stages, &mut timings)?;
            let residual = eq_a_residual(&orbit.a, Some(&p.mild.profile))?;
            let g = orbit.a.grid;
            let eq = residual
                .iter()
                .map(|f| f.l2_norm_masked(|i| g.in_interior(i, REPORT_FRACTION)))
                .fold(0.0, f64::max);
            let scale = orbit.a.sup_l2_interior(REPORT_FRACTION);
            let fp = stages.number("galerkin.fixed_point_residual").unwrap_or(f64::NAN);
            Ok((orbit, fp, if scale > 0.0 { eq / scale } else { 0.0 }))
        })();
        match outcome {
            Ok((orbit, fp, eq)) => {
                let cauchy = previous.as_ref().map(|prev| {
                    if prev.grid.n() >= orbit.a.grid.n() {
                        profile_distance(prev, &orbit.a)
                    } else {
                        profile_distance(&orbit.a, prev)
                    }
                });
                rows.push(SweepRow {
                    value,
                    status: "ok".into(),
                    energy_norm: orbit.energy_norm,
                    fixed_point_residual: fp,
                    eq_a_relative: eq,
                    cauchy,
                });
                previous = Some(orbit.a);
            }
            Err(e) => rows.push(SweepRow {
                value,
                status: e.to_string(),
                energy_norm: f64::NAN,
                fixed_point_residual: f64::NAN,
                eq_a_relative: f64::NAN,
                cauchy: None,
            }),
        }
    }
    let table = SweepTable { axis, rows };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("sweep_{}.csv", axis.name())), table.to_table().to_csv())?;
    }
    Ok(table)
}
