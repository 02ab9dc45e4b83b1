//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs without the libtest harness so the summary lines always print. The
//! process exits nonzero when any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use lprf::analysis::{besov_norm, lp_decompose, split_initial_data, weak_l3_norm, BesovIndex};
use lprf::config::RunConfig;
use lprf::data::DataProfile;
use lprf::diagnostics::{convergence_rate_fit, local_energy_battery, LocalEnergyInput};
use lprf::galerkin::{assemble_tensors, integrate, Assembly, Basis, DriftMask, OdeSystem, REPORT_FRACTION};
use lprf::grid::{norm, Grid, ScalarField, VectorField};
use lprf::linear::{build_u0, build_w, heat_evolve, mild_solve_small, verify_assumption_u0};
use lprf::pipeline::{cmd_solve, cmd_sweep, SolveOutcome, SweepAxis};
use lprf::symmetry::{apply_generator, data_symmetry_defect, mat_mul, rotate, rotation_matrix, symmetry_defect, SymmetrySpec};
use lprf::transform::{
    from_profile, periodicity_defect, to_profile, Boundary, PhysicalField, ProfileLayout, ProfileTrajectory, Slice,
};
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

fn max_abs_diff(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).max_abs()
}

fn c1_symmetry_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut group = 0.0f64;
    for _ in 0..200 {
        let (s, t) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let lhs = mat_mul(&rotation_matrix(s), &rotation_matrix(t));
        let rhs = rotation_matrix(s + t);
        for i in 0..3 {
            for j in 0..3 {
                group = group.max((lhs[i][j] - rhs[i][j]).abs());
            }
        }
    }
    // forward difference of s ↦ R(s)e_j against J R(s) e_j
    let fd_error = |h: f64| {
        let mut worst = 0.0f64;
        for &s in &[0.3, 1.7, -2.4] {
            for j in 0..3 {
                let mut e = [0.0; 3];
                e[j] = 1.0;
                let (a, b) = (rotate(s + h, e), rotate(s, e));
                let jr = apply_generator(b);
                for d in 0..3 {
                    worst = worst.max(((a[d] - b[d]) / h - jr[d]).abs());
                }
            }
        }
        worst
    };
    let errs: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&h| fd_error(h)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log10()).collect();
    let first_order = orders.iter().all(|o| (o - 1.0).abs() < 0.1);
    outcome(
        group < 1e-13 && first_order,
        format!("group law {group:.1e} (< 1e-13); FD orders {:.3}, {:.3} (first order)", orders[0], orders[1]),
    )
}

fn c2_round_trip() -> Outcome {
    let grid = Grid::new(16, 2.0).unwrap();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, spec) in [("SS", SymmetrySpec::ss()), ("DSS(2)", SymmetrySpec::dss(2.0)), ("RSS(1)", SymmetrySpec::rss(1.0))] {
        let layout = ProfileLayout {
            grid,
            period: spec.period(),
            n_s: 4,
        };
        let period = layout.period;
        let traj = ProfileTrajectory::from_fn(&layout, spec.frame_speed(), Boundary::Open, |y, s| {
            let w = 2.0 * PI * s / period;
            let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 2.0).exp();
            (
                [g * (y[1] + 0.3 * w.sin()), g * (y[2] - y[0]), g * (1.0 + 0.2 * w.cos() * y[0])],
                g * (0.5 + 0.1 * w.sin()),
            )
        });
        let phys = from_profile(&traj, 0..2).unwrap();
        let back = to_profile(&phys, spec.frame_speed(), &layout).unwrap();
        let again = from_profile(&back, 0..2).unwrap();
        let mut err = 0.0f64;
        for (a, b) in again.slices.iter().zip(&phys.slices) {
            let scale = b.velocity.max_abs().max(1e-300);
            err = err.max(max_abs_diff(&a.velocity, &b.velocity) / scale);
            let dp = a.pressure.data.iter().zip(&b.pressure.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            err = err.max(dp / b.pressure.max_abs().max(1e-300));
        }
        worst = worst.max(err);
        parts.push(format!("{name} {err:.1e}"));
    }
    outcome(worst < 1e-12, format!("{} (< 1e-12)", parts.join(", ")))
}

fn c3_dss_periodicity() -> Outcome {
    let lambda = 2.0;
    let spec = SymmetrySpec::dss(lambda);
    let period = spec.period();
    let grid = Grid::new(16, 2.0).unwrap();
    let n_s = 4;
    let s_values: Vec<f64> = (0..2 * n_s).map(|k| k as f64 * period / n_s as f64).collect();
    let data = DataProfile::Swirl {
        amplitude: 1.0,
        gamma: 0.5,
        modulation: 0.3,
        lambda,
    };
    let lay = PhysicalField::similarity_layout(&grid, 0.0, &s_values).unwrap();
    let dss_field = PhysicalField::from_fn(&lay, |x, _| (data.value(x), 0.0)).unwrap();
    let forward = periodicity_defect(&dss_field, 0.0, &grid, period).unwrap();

    let layout = ProfileLayout { grid, period, n_s };
    let periodic = ProfileTrajectory::from_fn(&layout, 0.0, Boundary::Open, |y, s| {
        let w = 2.0 * PI * s / period;
        let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 3.0).exp();
        ([-y[1] * g * (1.0 + 0.4 * w.cos()), y[0] * g, 0.2 * g * w.sin()], 0.0)
    });
    let converse = symmetry_defect(&from_profile(&periodic, 0..2).unwrap(), &spec).unwrap();

    // the same manufactured profile with a drift in s is not periodic
    let drifting = ProfileTrajectory::from_fn(&layout, 0.0, Boundary::Open, |y, s| {
        let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 3.0).exp();
        ([-y[1] * g * (1.0 + 0.4 * s), y[0] * g, 0.0], 0.0)
    });
    let mut phys = from_profile(&drifting, 0..1).unwrap();
    let mut later = drifting.clone();
    for (k, s) in layout.s_values().into_iter().enumerate() {
        later.velocity[k] = VectorField::from_fn(grid, |y| {
            let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 3.0).exp();
            [-y[1] * g * (1.0 + 0.4 * (s + period)), y[0] * g, 0.0]
        });
    }
    phys.slices.extend(from_profile(&later, 1..2).unwrap().slices);
    let control = symmetry_defect(&PhysicalField::new(phys.slices).unwrap(), &spec).unwrap();

    outcome(
        forward < 1e-8 && converse < 1e-8 && control > 1e-3,
        format!("DSS→periodic {forward:.1e}, periodic→DSS {converse:.1e} (< 1e-8); drifting control {control:.2e}"),
    )
}

fn random_band_limited(grid: Grid, seed: u64, max_index: usize) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([f64; 3], [f64; 3], f64)> = (0..12)
        .map(|_| {
            let k = [0, 1, 2].map(|_| grid.wavenumber(rng.gen_range(0..max_index)));
            let a = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
            (k, a, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    VectorField::from_fn(grid, |x| {
        let mut v = [0.0; 3];
        for (k, a, ph) in &modes {
            let c = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos();
            for d in 0..3 {
                v[d] += a[d] * c;
            }
        }
        v
    })
}

/// Largest admitted spread `max/min` of the λ-adic to dyadic Besov ratio.
const BESOV_RATIO_SPREAD: f64 = 10.0;

fn c4_norm_oracles() -> Outcome {
    let grid = Grid::new(128, 4.0).unwrap();
    let f = VectorField::from_fn(grid, |x| [1.0 / norm(x).max(1e-300), 0.0, 0.0]);
    let exact = (4.0 * PI / 3.0f64).cbrt();
    let weak = weak_l3_norm(&f);
    let weak_err = (weak - exact).abs() / exact;
    drop(f);

    let small = Grid::new(32, 3.0).unwrap();
    let mut recon = 0.0f64;
    for (seed, lambda) in [(3, 2.0), (4, 3.0), (5, 1.5)] {
        let g = random_band_limited(small, seed, 16);
        let dec = lp_decompose(&g, lambda).unwrap();
        recon = recon.max(dec.reconstruct().sub(&g).l2_norm() / g.l2_norm());
    }

    let corpus_grid = Grid::new(32, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut ratios = Vec::new();
    for i in 0..20 {
        let field = if i % 2 == 0 {
            let width = 0.3 * 1.25f64.powi(i / 2);
            let c = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
            VectorField::from_fn(corpus_grid, |x| {
                let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
                let g = (-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (2.0 * width * width)).exp();
                [-d[1] * g, d[0] * g, 0.0]
            })
        } else {
            random_band_limited(corpus_grid, 100 + i as u64, 2 + i as usize / 2)
        };
        for lambda in [1.5, 3.0] {
            let index = BesovIndex::critical(4.0, lambda);
            let ours = besov_norm(&field, index.s, index.p, index.q, lambda).unwrap();
            let dyadic = besov_norm(&field, index.s, index.p, index.q, 2.0).unwrap();
            ratios.push(ours / dyadic);
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    let bounded = lo > 0.0 && hi.is_finite() && hi / lo < BESOV_RATIO_SPREAD;
    outcome(
        weak_err < 0.02 && recon < 1e-10 && bounded,
        format!(
            "weak-L3 {weak:.5} vs {exact:.5} (rel {weak_err:.2e} < 2e-2); LP reconstruction {recon:.1e} (< 1e-10); \
             Besov ratio in [{lo:.3}, {hi:.3}] over 40 pairs (spread < {BESOV_RATIO_SPREAD})"
        ),
    )
}

fn c5_splitting() -> Vec<Outcome> {
    let grid = Grid::new(32, 8.0).unwrap();
    let (eps, p, lambda) = (0.1, 4.0, 2.0);
    let index = BesovIndex::critical(p, lambda);
    let profiles = [
        (
            "bounded",
            DataProfile::Swirl {
                amplitude: 1.0,
                gamma: 0.0,
                modulation: 0.3,
                lambda,
            },
        ),
        (
            "L4-unbounded",
            DataProfile::Swirl {
                amplitude: 0.3,
                gamma: 1.6,
                modulation: 0.3,
                lambda,
            },
        ),
        (
            "already-small",
            DataProfile::Swirl {
                amplitude: 0.01,
                gamma: 1.6,
                modulation: 0.3,
                lambda,
            },
        ),
    ];
    let spec = SymmetrySpec::dss(lambda);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, v0) in profiles {
        match split_initial_data(&v0, &grid, eps, p, lambda) {
            Ok(split) => {
                let (a, b, v) = (split.a0.sample(&grid), split.b0.sample(&grid), v0.sample(&grid));
                let mut sum = a.clone();
                sum.axpy(1.0, &b);
                let sum_err = max_abs_diff(&sum, &v);
                let da = data_symmetry_defect(&a, &spec).unwrap();
                let db = data_symmetry_defect(&b, &spec).unwrap();
                let besov_b = besov_norm(&b, index.s, index.p, index.q, lambda).unwrap();
                let weak_a = weak_l3_norm(&a);
                let ok = sum_err == 0.0 && da < 1e-8 && db < 1e-8 && besov_b < eps && weak_a.is_finite();
                pass &= ok;
                parts.push(format!(
                    "{name}: sum {sum_err:.0e}, defects {da:.0e}/{db:.0e}, B(b0) {besov_b:.3e}, wL3(a0) {weak_a:.3}"
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let large = DataProfile::Swirl {
        amplitude: 1.0,
        gamma: 1.6,
        modulation: 0.3,
        lambda,
    };
    let large_detail = match split_initial_data(&large, &grid, eps, p, lambda) {
        Ok(split) => format!("amplitude 1 L4-unbounded profile splits with B(b0) {:.3e}", split.besov_b0),
        Err(e) => format!("amplitude 1 L4-unbounded profile: {e}"),
    };
    vec![
        outcome(pass, format!("{} (eps = {eps}, defects < 1e-8)", parts.join("; "))),
        outcome(true, large_detail),
    ]
}

fn c6_background() -> Outcome {
    let data = DataProfile::swirl(0.1);
    let mut residuals = Vec::new();
    let mut s_var = 0.0f64;
    let mut bg64 = None;
    for n in [32usize, 64, 128] {
        let layout = ProfileLayout {
            grid: Grid::new(n, 8.0).unwrap(),
            period: 2.0 * 2f64.ln(),
            n_s: 2,
        };
        let bg = build_u0(&data, &layout, 0.0, 4.0).unwrap();
        let report = verify_assumption_u0(&bg).unwrap();
        residuals.push(report.residual);
        s_var = s_var.max(report.s_variation);
        if n == 64 {
            bg64 = Some(bg);
        }
    }
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let stencil_order = orders.iter().all(|o| *o > 3.5);
    let bg = bg64.unwrap();
    let mut w_ok = true;
    let mut w_parts = Vec::new();
    for alpha in [0.5, 0.25] {
        match build_w(&bg, alpha, 4.0) {
            Ok(w) => {
                w_ok &= w.divergence_defect < 1e-8 && w.sup_lq <= alpha;
                w_parts.push(format!("alpha {alpha}: R0 {}, div {:.1e}, sup L4 {:.3}", w.r0, w.divergence_defect, w.sup_lq));
            }
            Err(e) => {
                w_ok = false;
                w_parts.push(format!("alpha {alpha}: {e}"));
            }
        }
    }
    outcome(
        s_var < 1e-8 && stencil_order && w_ok,
        format!(
            "s-variation {s_var:.1e} (< 1e-8); residuals {:.2e}, {:.2e}, {:.2e} (orders {:.2}, {:.2}; stencil order 4); {}",
            residuals[0],
            residuals[1],
            residuals[2],
            orders[0],
            orders[1],
            w_parts.join("; ")
        ),
    )
}

struct Relax {
    stiff: Vec<f64>,
    mu: f64,
    forcing: f64,
}

impl OdeSystem for Relax {
    fn dim(&self) -> usize {
        1
    }
    fn stiff(&self) -> &[f64] {
        &self.stiff
    }
    fn explicit(&self, s: f64, b: &[f64], out: &mut [f64]) {
        out[0] = -self.mu * b[0] + self.forcing * s.cos();
    }
    fn explicit_bound(&self) -> f64 {
        self.mu
    }
}

fn small_ss_config(split: &str) -> RunConfig {
    RunConfig::parse(&format!(
        "data.profile = swirl\ndata.amplitude = 0.05\ndata.split = {split}\nsolver.modes = 32\n"
    ))
    .unwrap()
}

fn c7_galerkin_core() -> Outcome {
    let l = 8.0;
    let mask = DriftMask::for_box(l, 0.6, 0.95).unwrap();
    let basis = Basis::new(l, 32).unwrap();
    let tensors = assemble_tensors(&Assembly {
        basis: &basis,
        mask: &mask,
        cutoff: None,
        mild: None,
        eps: 0.1,
        period: 1.0,
        alpha: 0.0,
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut trilinear = 0.0f64;
    for _ in 0..50 {
        let x: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        trilinear = trilinear.max(tensors.trilinear_form(&x).abs());
    }

    let one = Basis::new(4.0, 1).unwrap();
    let t1 = assemble_tensors(&Assembly {
        basis: &one,
        mask: &DriftMask::for_box(4.0, 0.6, 0.95).unwrap(),
        cutoff: None,
        mild: None,
        eps: 0.0,
        period: 1.0,
        alpha: 0.0,
    })
    .unwrap();
    let hand = -(PI / 4.0).powi(2) - 0.25;
    let entry = (t1.a[0][0] - hand).abs();

    let sys = Relax {
        stiff: vec![-3.0],
        mu: 0.7,
        forcing: 1.3,
    };
    let exact = {
        let lam = sys.mu - sys.stiff[0];
        let part = |s: f64| sys.forcing * (lam * s.cos() + s.sin()) / (lam * lam + 1.0);
        part(2.0) + (0.9 - part(0.0)) * (-lam * 2.0).exp()
    };
    let errs: Vec<f64> = [20, 40, 80, 160]
        .iter()
        .map(|&n| (integrate(&sys, &[0.9], 2.0, n).unwrap().last()[0] - exact).abs())
        .collect();
    let order = (errs[2] / errs[3]).log2();

    let solve = cmd_solve(&small_ss_config("galerkin"), None).unwrap();
    let residual = solve.artifacts.stages.number("galerkin.fixed_point_residual").unwrap();
    outcome(
        trilinear < 1e-10 && entry < 1e-8 && (order - 2.0).abs() < 0.2 && residual < 1e-8,
        format!(
            "trilinear energy {trilinear:.1e} (< 1e-10); one-mode entry error {entry:.1e} (< 1e-8); \
             integrator order {order:.3} (2); fixed point residual at k=32 {residual:.2e} (< 1e-8)"
        ),
    )
}

fn relative_interior(a: &ProfileTrajectory, b: &ProfileTrajectory) -> f64 {
    let grid = a.grid;
    let keep = |i: usize| grid.in_interior(i, REPORT_FRACTION);
    a.velocity
        .iter()
        .zip(&b.velocity)
        .map(|(x, y)| x.sub(y).l2_norm_masked(keep) / y.l2_norm_masked(keep).max(1e-300))
        .fold(0.0, f64::max)
}

fn c8_cross_validation() -> Vec<Outcome> {
    let cfg = small_ss_config("galerkin");
    let layout = cfg.layout().unwrap();
    let data = DataProfile::swirl(0.05);
    let mild = mild_solve_small(&data, &layout, 0.0, &cfg.mild).unwrap();
    let galerkin = cmd_solve(&cfg, None).unwrap();
    let v_galerkin = galerkin.artifacts.a.add(&galerkin.artifacts.b).unwrap();
    let disjoint = relative_interior(&v_galerkin, &mild.profile);
    let heat = relative_interior(&mild.heat, &mild.profile);

    let literal = cmd_solve(&small_ss_config("mild"), None).unwrap();
    let v_literal = literal.artifacts.a.add(&literal.artifacts.b).unwrap();
    let same = relative_interior(&v_literal, &mild.profile);
    vec![
        outcome(
            disjoint < 1e-4,
            format!("Galerkin route (a0 = v0) vs mild route: {disjoint:.3e} (< 1e-4); heat flow alone {heat:.3e}"),
        ),
        outcome(
            same < 1e-4,
            format!("literal a0 = 0 pipeline vs separate mild solve: {same:.3e} (same route twice, not gating)"),
        ),
    ]
}

fn beltrami(n: usize, times: &[f64], growth: f64) -> PhysicalField {
    let grid = Grid::new(n, PI).unwrap();
    let slices = times
        .iter()
        .map(|&t| {
            let d = (-t).exp() * (growth * t).exp();
            let velocity = VectorField::from_fn(grid, |x| {
                [d * (x[2].sin() + x[1].cos()), d * (x[0].sin() + x[2].cos()), d * (x[1].sin() + x[0].cos())]
            });
            let pressure = ScalarField {
                grid,
                data: velocity.magnitude().iter().map(|m| -0.5 * m * m).collect(),
            };
            Slice {
                t,
                grid,
                angle: 0.0,
                velocity,
                pressure,
            }
        })
        .collect();
    PhysicalField::new(slices).unwrap()
}

fn dss_config() -> RunConfig {
    RunConfig::parse("data.profile = swirl\ndata.amplitude = 0.2\ndata.modulation = 0.3\ndata.lambda = 2\nseed = 7\n")
        .unwrap()
}

fn pipeline_run() -> &'static SolveOutcome {
    static RUN: OnceLock<SolveOutcome> = OnceLock::new();
    RUN.get_or_init(|| cmd_solve(&dss_config(), None).unwrap())
}

fn c9_local_energy() -> Outcome {
    let report = &pipeline_run().report;
    let cases = report.number("local_energy.cases").unwrap_or(0.0) as usize;
    let passed = report.number("local_energy.passed").unwrap_or(0.0) as usize;
    let worst = report.number("local_energy.worst_slack_over_tol").unwrap_or(f64::NAN);

    let times: Vec<f64> = (0..49).map(|k| 1.0 + 0.5 * k as f64 / 48.0).collect();
    let control = local_energy_battery(&LocalEnergyInput::Velocity(&beltrami(48, &times, 0.0)), 3).unwrap();
    let equality = control.iter().all(|c| c.slack.abs() <= c.quadrature_tol);
    let worst_eq = control.iter().map(|c| c.slack.abs() / c.quadrature_tol).fold(0.0, f64::max);
    let negative = local_energy_battery(&LocalEnergyInput::Velocity(&beltrami(48, &times, 5.0)), 3).unwrap();
    let violated = negative.iter().filter(|c| !c.passes(10.0)).count();
    outcome(
        cases == 12 && passed == 12 && equality && violated == negative.len(),
        format!(
            "pipeline {passed}/{cases} with slack/tol ≥ {worst:.2} (≥ -10); Stokes control |slack|/tol ≤ {worst_eq:.2} (≤ 1); \
             negative control fails {violated}/{}",
            negative.len()
        ),
    )
}

fn c10_rates() -> Outcome {
    let grid = Grid::new(16, 4.0).unwrap();
    let a0 = VectorField::from_fn(grid, |x| [x[1].sin(), (0.5 * x[2]).cos(), 0.0]);
    let g = VectorField::from_fn(grid, |x| [0.0, 0.0, (-(x[0] * x[0])).exp()]);
    let samples: Vec<(f64, f64)> = (0..8)
        .map(|k| {
            let t = 0.05 * 2f64.powi(k);
            let heat = heat_evolve(&a0, t).unwrap();
            let mut a = heat.clone();
            a.axpy(t.powf(0.25), &g);
            (t, a.sub(&heat).l2_norm())
        })
        .collect();
    let planted = convergence_rate_fit(&samples, 0.25).unwrap().exponent;
    let pipeline = pipeline_run().report.number("rates.a_l2.exponent").unwrap_or(f64::NAN);
    outcome(
        (planted - 0.25).abs() <= 0.02 && pipeline >= 0.20,
        format!("planted exponent {planted:.4} (0.25 ± 0.02); pipeline a-component exponent {pipeline:.4} (≥ 0.20)"),
    )
}

fn c11_uniformity() -> Outcome {
    let mut norms = Vec::new();
    let mut failures = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let mut cfg = small_ss_config("galerkin");
        cfg.galerkin.eps = eps;
        cfg.sweep.k = vec![16, 32, 64];
        let table = cmd_sweep(&cfg, SweepAxis::K, None).unwrap();
        for row in &table.rows {
            if row.status == "ok" {
                norms.push(row.energy_norm);
            } else {
                failures.push(format!("k={} eps={eps}: {}", row.value, row.status));
            }
        }
    }
    let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), n| (a.min(*n), b.max(*n)));
    let variation = hi / lo - 1.0;
    outcome(
        failures.is_empty() && norms.len() == 9 && variation < 0.25,
        format!(
            "energy norms in [{lo:.3e}, {hi:.3e}] over {} runs, variation max/min - 1 = {variation:.3} (< 0.25){}",
            norms.len(),
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn directory_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timings.txt")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn c12_determinism() -> Outcome {
    let cfg = dss_config();
    let (one, two) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_solve(&cfg, Some(one.path())).unwrap();
    cmd_solve(&cfg, Some(two.path())).unwrap();
    let (a, b) = (directory_bytes(one.path()), directory_bytes(two.path()));
    let reports_equal = ["report.kv", "report.txt"].iter().all(|f| a.get(*f).is_some() && a.get(*f) == b.get(*f));
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    outcome(
        reports_equal && differing.is_empty() && a.len() == b.len(),
        format!(
            "report.kv and report.txt identical: {reports_equal}; {} files compared, differing: {:?}",
            a.len(),
            differing
        ),
    )
}

fn main() {
    type Check = fn() -> Vec<Outcome>;
    let criteria: [(&str, &str, f64, Check); 12] = [
        ("C1", "symmetry algebra", 1.0, || vec![c1_symmetry_algebra()]),
        ("C2", "transform round trip", 10.0, || vec![c2_round_trip()]),
        ("C3", "DSS <-> periodicity", 30.0, || vec![c3_dss_periodicity()]),
        ("C4", "norm oracles", 120.0, || vec![c4_norm_oracles()]),
        ("C5", "splitting contract", 120.0, c5_splitting),
        ("C6", "background field", 300.0, || vec![c6_background()]),
        ("C7", "Galerkin core", 300.0, || vec![c7_galerkin_core()]),
        ("C8", "cross-validation", 600.0, c8_cross_validation),
        ("C9", "local energy battery", 300.0, || vec![c9_local_energy()]),
        ("C10", "rate fit", 180.0, || vec![c10_rates()]),
        ("C11", "uniformity sweep", 900.0, || vec![c11_uniformity()]),
        ("C12", "determinism", 600.0, || vec![c12_determinism()]),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed().as_secs_f64();
        let in_time = elapsed <= budget;
        match result {
            Ok(outcomes) => {
                for (i, o) in outcomes.iter().enumerate() {
                    if i == 0 {
                        let pass = o.pass && in_time;
                        println!(
                            "{id:<4} {name:<22} {}  {} [{elapsed:.1} s of {budget} s]",
                            if pass { "PASS" } else { "FAIL" },
                            o.detail
                        );
                        if !pass {
                            failed.push(id);
                        }
                    } else {
                        println!("{:<4} {:<22} info  {}", "", "", o.detail);
                    }
                }
            }
            Err(_) => {
                println!("{id:<4} {name:<22} FAIL  panicked [{elapsed:.1} s of {budget} s]");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("all 12 criteria passed");
    } else {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
