//! Energy inequalities, the local a priori bound and decay-rate fits.
//!
//! Local energy checks assemble both sides of the inequality for a smooth
//! compactly supported bump by trapezoidal quadrature, with gradients from
//! fourth-order differences. The reported quadrature tolerance is the sum of
//! the changes in slack when the check is repeated on the lattice of every
//! other node, and separately on every other time level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::ball_integral_sup;
use crate::error::{Error, Result};
use crate::grid::{dot, Grid, ScalarField, Vec3, VectorField};
use crate::stencil;
use crate::symmetry::apply_generator;
use crate::transform::{PhysicalField, ProfileTrajectory, SliceLayout};

/// Bumps must keep this fraction of the box between their support and the
/// faces.
const SUPPORT_FRACTION: f64 = 0.9;

/// `ψ(ρ) = 1 - S(ρ²)` for the degree-9 smoothstep
/// `S(u) = 70u⁹ - 315u⁸ + 540u⁷ - 420u⁶ + 126u⁵`, with `ψ'` and `ψ''`.
fn radial(rho: f64) -> (f64, f64, f64) {
    if rho >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = rho * rho;
    let w = 1.0 - u;
    let s0 = u.powi(5) * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + 70.0 * u))));
    let s1 = 630.0 * (u * w).powi(4);
    let s2 = 2520.0 * (u * w).powi(3) * (1.0 - 2.0 * u);
    (1.0 - s0, -2.0 * rho * s1, -4.0 * u * s2 - 2.0 * s1)
}

/// Nonnegative space-time bump `φ(x,t) = ψ(|x-c|/R) ψ(|t-t₀|/τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Vec3,
    pub radius: f64,
    pub t_center: f64,
    pub t_radius: f64,
}

struct BumpSample {
    value: f64,
    dt: f64,
    gradient: Vec3,
    laplacian: f64,
}

impl Bump {
    fn time_factor(&self, t: f64) -> (f64, f64) {
        let d = t - self.t_center;
        let (p, dp, _) = radial(d.abs() / self.t_radius);
        (p, dp * d.signum() / self.t_radius)
    }

    fn sample(&self, x: Vec3, tf: (f64, f64)) -> BumpSample {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let dist = dot(d, d).sqrt();
        let rho = dist / self.radius;
        let (g, dg, d2g) = radial(rho);
        let (gradient, laplacian) = if dist == 0.0 {
            ([0.0; 3], 0.0)
        } else {
            let f = dg / (self.radius * dist);
            ([f * d[0], f * d[1], f * d[2]], (d2g + 2.0 * dg / rho) / (self.radius * self.radius))
        };
        BumpSample {
            value: g * tf.0,
            dt: g * tf.1,
            gradient: [gradient[0] * tf.0, gradient[1] * tf.0, gradient[2] * tf.0],
            laplacian: laplacian * tf.0,
        }
    }

    pub fn value(&self, x: Vec3, t: f64) -> f64 {
        self.sample(x, self.time_factor(t)).value
    }

    fn check(&self, grid: &Grid, t_range: (f64, f64)) -> Result<()> {
        let limit = SUPPORT_FRACTION * grid.half_width();
        if self.radius < 3.0 * grid.spacing() || self.t_radius <= 0.0 {
            return Err(Error::config("test function is not resolved by the grid"));
        }
        if self.center.iter().any(|c| c.abs() + self.radius > limit) {
            return Err(Error::config(format!(
                "test function support (center {:?}, radius {}) touches the boundary region of the box",
                self.center, self.radius
            )));
        }
        if self.t_center - self.t_radius < t_range.0 || self.t_center + self.t_radius > t_range.1 {
            return Err(Error::config(format!(
                "test function time support [{}, {}] leaves the sampled interval [{}, {}]",
                self.t_center - self.t_radius,
                self.t_center + self.t_radius,
                t_range.0,
                t_range.1
            )));
        }
        Ok(())
    }
}

/// 12 bumps at 3 spatial scales and 4 seeded centers each.
pub fn bump_battery(half_width: f64, t_range: (f64, f64), seed: u64) -> Vec<Bump> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = SUPPORT_FRACTION * half_width * (1.0 - 1e-9);
    let span = t_range.1 - t_range.0;
    let mut out = Vec::with_capacity(12);
    for scale in [0.45, 0.65, 0.85] {
        let radius = scale * limit;
        for _ in 0..4 {
            let reach = limit - radius;
            let center = [
                rng.gen_range(-reach..=reach),
                rng.gen_range(-reach..=reach),
                rng.gen_range(-reach..=reach),
            ];
            let t_radius = span * rng.gen_range(0.3..0.45);
            let t_center = rng.gen_range(t_range.0 + t_radius..=t_range.1 - t_radius);
            out.push(Bump {
                center,
                radius,
                t_center,
                t_radius,
            });
        }
    }
    out
}

/// Which local energy inequality is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalForm {
    /// `2∬|∇v|²φ ≤ ∬|v|²(∂_tφ + Δφ) + ∬(|v|² + 2π)(v·∇φ)`.
    Velocity,
    /// The `b`-perturbed inequality for `(a, p_a)`.
    Perturbed,
    /// The inequality for `(A, p_A)` in similarity variables, including the
    /// drift, damping and rotation terms.
    Profile,
}

/// Fields entering a local energy check.
pub enum LocalEnergyInput<'a> {
    /// `(v, π)` on slices sharing one fixed-frame grid.
    Velocity(&'a PhysicalField),
    /// `(a, p_a)` and `b` on matching fixed-frame slices.
    Perturbed { a: &'a PhysicalField, b: &'a PhysicalField },
    /// `(A, p_A)` and optionally `B` on a periodic profile layout.
    Profile {
        a: &'a ProfileTrajectory,
        b: Option<&'a ProfileTrajectory>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalEnergyTestCase {
    pub form: LocalForm,
    pub bump: Bump,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub slack: f64,
    pub quadrature_tol: f64,
}

impl LocalEnergyTestCase {
    /// `slack ≥ -factor · quadrature_tol`.
    pub fn passes(&self, factor: f64) -> bool {
        self.slack >= -factor * self.quadrature_tol
    }
}

struct Level<'a> {
    grid: Grid,
    times: Vec<f64>,
    weights: Vec<f64>,
    velocity: Vec<&'a VectorField>,
    pressure: Vec<&'a ScalarField>,
    coupling: Option<Vec<&'a VectorField>>,
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { times[k] - times[k - 1] } else { 0.0 };
            let right = if k + 1 < n { times[k + 1] - times[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn common_grid(field: &PhysicalField) -> Result<Grid> {
    let grid = field.slices[0].grid;
    if field.slices.iter().any(|s| s.grid != grid || s.angle != 0.0) {
        return Err(Error::config(
            "energy checks need slices on one fixed-frame grid; resample first",
        ));
    }
    Ok(grid)
}

fn subsample_vector(f: &VectorField, coarse: Grid) -> VectorField {
    let fine = f.grid;
    let mut out = VectorField::zeros(coarse);
    for idx in 0..coarse.len() {
        let (i, j, k) = coarse.triple(idx);
        out.set(idx, f.get(fine.index(2 * i, 2 * j, 2 * k)));
    }
    out
}

fn subsample_scalar(f: &ScalarField, coarse: Grid) -> ScalarField {
    let fine = f.grid;
    ScalarField {
        grid: coarse,
        data: (0..coarse.len())
            .map(|idx| {
                let (i, j, k) = coarse.triple(idx);
                f.data[fine.index(2 * i, 2 * j, 2 * k)]
            })
            .collect(),
    }
}

fn assemble(level: &Level<'_>, form: LocalForm, alpha: f64, bump: &Bump) -> (f64, f64) {
    let grid = level.grid;
    let h3 = grid.cell_volume();
    let profile = form == LocalForm::Profile;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (k, &t) in level.times.iter().enumerate() {
        let tf = bump.time_factor(t);
        if (tf.0 == 0.0 && tf.1 == 0.0) || level.weights[k] == 0.0 {
            continue;
        }
        let u = level.velocity[k];
        let p = level.pressure[k];
        let ju = stencil::jacobian(u);
        let coupling = level.coupling.as_ref().map(|c| c[k]);
        let jc = coupling.map(stencil::jacobian);
        let (mut l, mut r) = (0.0, 0.0);
        for idx in 0..grid.len() {
            let y = grid.point(idx);
            let b = bump.sample(y, tf);
            if b.value == 0.0 && b.dt == 0.0 && b.gradient == [0.0; 3] {
                continue;
            }
            let uv = u.get(idx);
            let u2 = dot(uv, uv);
            let mut grad2 = 0.0;
            for c in 0..3 {
                for d in 0..3 {
                    grad2 += ju[c][d][idx] * ju[c][d][idx];
                }
            }
            l += 2.0 * grad2 * b.value;
            if profile {
                l += 0.5 * u2 * b.value;
            }
            let mut transport = uv;
            if let Some(cv) = coupling {
                let bv = cv.get(idx);
                for c in 0..3 {
                    transport[c] += bv[c];
                }
            }
            if profile {
                let jy = apply_generator(y);
                for c in 0..3 {
                    transport[c] -= 0.5 * y[c] + alpha * jy[c];
                }
            }
            r += u2 * (b.dt + b.laplacian) + u2 * dot(transport, b.gradient) + 2.0 * p.data[idx] * dot(uv, b.gradient);
            if let Some(jc) = &jc {
                // -2 (u·∇c)·u φ
                let mut stretch = 0.0;
                for c in 0..3 {
                    stretch += uv[c] * (uv[0] * jc[c][0][idx] + uv[1] * jc[c][1][idx] + uv[2] * jc[c][2][idx]);
                }
                r -= 2.0 * stretch * b.value;
            }
        }
        lhs += level.weights[k] * h3 * l;
        rhs += level.weights[k] * h3 * r;
    }
    (lhs, rhs)
}

fn coarse_grid(grid: &Grid) -> Result<Grid> {
    if grid.n() % 2 != 0 || grid.n() < 16 {
        return Err(Error::config("energy checks need an even grid with at least 16 nodes per axis"));
    }
    Grid::new(grid.n() / 2, grid.half_width())
}

/// Assembles one local energy inequality.
pub fn local_energy_check(input: &LocalEnergyInput<'_>, bump: &Bump) -> Result<LocalEnergyTestCase> {
    let (form, alpha, grid, times, velocity, pressure, coupling, periodic) = match input {
        LocalEnergyInput::Velocity(v) => {
            let grid = common_grid(v)?;
            (
                LocalForm::Velocity,
                0.0,
                grid,
                v.times(),
                v.slices.iter().map(|s| &s.velocity).collect::<Vec<_>>(),
                v.slices.iter().map(|s| &s.pressure).collect::<Vec<_>>(),
                None,
                None,
            )
        }
        LocalEnergyInput::Perturbed { a, b } => {
            let grid = common_grid(a)?;
            if b.layout() != a.layout() {
                return Err(Error::config("a and b are sampled on different layouts"));
            }
            (
                LocalForm::Perturbed,
                0.0,
                grid,
                a.times(),
                a.slices.iter().map(|s| &s.velocity).collect(),
                a.slices.iter().map(|s| &s.pressure).collect(),
                Some(b.slices.iter().map(|s| &s.velocity).collect::<Vec<_>>()),
                None,
            )
        }
        LocalEnergyInput::Profile { a, b } => {
            if let Some(b) = b {
                if b.layout() != a.layout() {
                    return Err(Error::config("A and B profiles use different layouts"));
                }
            }
            (
                LocalForm::Profile,
                a.alpha,
                a.grid,
                a.s_values(),
                a.velocity.iter().collect(),
                a.pressure.iter().collect(),
                b.map(|b| b.velocity.iter().collect()),
                Some(a.period),
            )
        }
    };
    let t_range = match periodic {
        Some(period) => (0.0, period),
        None => (times[0], *times.last().unwrap()),
    };
    bump.check(&grid, t_range)?;
    let weights = match periodic {
        Some(period) => vec![period / times.len() as f64; times.len()],
        None => trapezoid_weights(&times),
    };
    let fine = Level {
        grid,
        times: times.clone(),
        weights,
        velocity: velocity.clone(),
        pressure: pressure.clone(),
        coupling: coupling.clone(),
    };
    let (lhs, rhs) = assemble(&fine, form, alpha, bump);

    let coarsened = |space: bool, time: bool| -> Result<f64> {
        let cg = if space { coarse_grid(&grid)? } else { grid };
        let keep: Vec<usize> = match periodic {
            _ if !time => (0..times.len()).collect(),
            Some(_) if times.len() % 2 == 1 => (0..times.len()).collect(),
            _ => (0..times.len()).step_by(2).collect(),
        };
        let sub_v = |f: &VectorField| if space { subsample_vector(f, cg) } else { f.clone() };
        let sub_p = |f: &ScalarField| if space { subsample_scalar(f, cg) } else { f.clone() };
        let cv: Vec<VectorField> = keep.iter().map(|&k| sub_v(velocity[k])).collect();
        let cp: Vec<ScalarField> = keep.iter().map(|&k| sub_p(pressure[k])).collect();
        let cc: Option<Vec<VectorField>> = coupling.as_ref().map(|c| keep.iter().map(|&k| sub_v(c[k])).collect());
        let ctimes: Vec<f64> = keep.iter().map(|&k| times[k]).collect();
        let cweights = match periodic {
            Some(period) => vec![period / ctimes.len() as f64; ctimes.len()],
            None => trapezoid_weights(&ctimes),
        };
        let level = Level {
            grid: cg,
            times: ctimes,
            weights: cweights,
            velocity: cv.iter().collect(),
            pressure: cp.iter().collect(),
            coupling: cc.as_ref().map(|c| c.iter().collect()),
        };
        let (l, r) = assemble(&level, form, alpha, bump);
        Ok(r - l)
    };
    let slack = rhs - lhs;
    let quadrature_tol = (coarsened(true, false)? - slack).abs()
        + (coarsened(false, true)? - slack).abs()
        + 1e-13 * (lhs.abs() + rhs.abs());
    Ok(LocalEnergyTestCase {
        form,
        bump: *bump,
        lhs,
        rhs,
        slack,
        quadrature_tol,
    })
}

/// Runs the 12-bump battery.
pub fn local_energy_battery(input: &LocalEnergyInput<'_>, seed: u64) -> Result<Vec<LocalEnergyTestCase>> {
    let (half_width, t_range) = match input {
        LocalEnergyInput::Velocity(v) | LocalEnergyInput::Perturbed { a: v, .. } => {
            let t = v.times();
            (v.slices[0].grid.half_width(), (t[0], *t.last().unwrap()))
        }
        LocalEnergyInput::Profile { a, .. } => (a.grid.half_width(), (0.0, a.period)),
    };
    bump_battery(half_width, t_range, seed)
        .iter()
        .map(|b| local_energy_check(input, b))
        .collect()
}

/// Global energy balance `‖v(t)‖² + 2∫₀ᵗ‖∇v‖² ≤ ‖v₀‖²`, maximized over
/// the sampled times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySlack {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// The first slice of `v` is taken at the time of `v0`.
pub fn global_energy_check(v: &PhysicalField, v0: &VectorField) -> Result<EnergySlack> {
    let grid = common_grid(v)?;
    if v0.grid != grid {
        return Err(Error::config("initial data and solution use different grids"));
    }
    let h3 = grid.cell_volume();
    let times = v.times();
    let dissipation: Vec<f64> = v
        .slices
        .iter()
        .map(|s| {
            let j = stencil::jacobian(&s.velocity);
            let mut total = 0.0;
            for c in 0..3 {
                for d in 0..3 {
                    total += j[c][d].iter().map(|x| x * x).sum::<f64>();
                }
            }
            total * h3
        })
        .collect();
    let mut integral = 0.0;
    let mut lhs: f64 = 0.0;
    for (k, s) in v.slices.iter().enumerate() {
        if k > 0 {
            integral += 0.5 * (times[k] - times[k - 1]) * (dissipation[k] + dissipation[k - 1]);
        }
        let e = s.velocity.l2_norm().powi(2);
        lhs = lhs.max(e + 2.0 * integral);
    }
    let rhs = v0.l2_norm().powi(2);
    Ok(EnergySlack {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

/// Measured local a priori bound at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriBoundReport {
    pub r: f64,
    /// `sup_{x₀} ∫_{B_r(x₀)} |v₀|²/2`.
    pub a_r: f64,
    pub sigma: f64,
    pub c0: f64,
    /// `σr²`, measured from the first sampled time.
    pub horizon: f64,
    /// The sampled interval ends before `σr²`.
    pub truncated: bool,
    pub lhs: f64,
    pub ratio: f64,
}

pub const DEFAULT_C0: f64 = 1.0 / 128.0;

/// `esssup_{t ≤ σr²} sup_{x₀} ∫_{B_r}|v|²/2 + sup_{x₀} ∫₀^{σr²}∫_{B_r}|∇v|²`
/// against `A_r`, with `σ = c₀ min(r²A_r^{-2}, 1)`.
pub fn apriori_bound_check(v: &PhysicalField, v0: &VectorField, r: f64, c0: f64) -> Result<AprioriBoundReport> {
    let grid = common_grid(v)?;
    if v0.grid != grid {
        return Err(Error::config("initial data and solution use different grids"));
    }
    if r < 2.0 * grid.spacing() || r + grid.spacing() > grid.half_width() {
        return Err(Error::config(format!("radius {r} is not resolvable on this grid")));
    }
    let half_energy = |f: &VectorField| -> Vec<f64> { f.magnitude().iter().map(|m| 0.5 * m * m).collect() };
    let a_r = ball_integral_sup(&grid, &half_energy(v0), r);
    let sigma = if a_r > 0.0 { c0 * (r * r / (a_r * a_r)).min(1.0) } else { c0 };
    let horizon = sigma * r * r;
    let times = v.times();
    let t0 = times[0];
    let end = t0 + horizon;
    let mut energy_sup: f64 = 0.0;
    let mut dissipation = vec![0.0; grid.len()];
    let mut last_density: Option<(f64, Vec<f64>)> = None;
    for (k, s) in v.slices.iter().enumerate() {
        if times[k] > end + 1e-12 {
            break;
        }
        energy_sup = energy_sup.max(ball_integral_sup(&grid, &half_energy(&s.velocity), r));
        let j = stencil::jacobian(&s.velocity);
        let density: Vec<f64> = (0..grid.len())
            .map(|i| (0..3).map(|c| (0..3).map(|d| j[c][d][i] * j[c][d][i]).sum::<f64>()).sum())
            .collect();
        if let Some((tp, prev)) = &last_density {
            let dt = times[k] - tp;
            for i in 0..grid.len() {
                dissipation[i] += 0.5 * dt * (prev[i] + density[i]);
            }
        }
        last_density = Some((times[k], density));
    }
    let lhs = energy_sup + ball_integral_sup(&grid, &dissipation, r);
    Ok(AprioriBoundReport {
        r,
        a_r,
        sigma,
        c0,
        horizon,
        truncated: *times.last().unwrap() < end,
        lhs,
        ratio: if a_r > 0.0 { lhs / a_r } else { 0.0 },
    })
}

/// Log-log least-squares fit `norm ≈ C t^γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub exponent: f64,
    pub constant: f64,
    pub target: f64,
    pub tolerance: f64,
    /// Some sample fell below the floor, so no exponent is meaningful.
    pub inconclusive: bool,
}

pub const RATE_TOLERANCE: f64 = 0.05;
pub const RATE_FLOOR: f64 = 1e-14;

impl RateFit {
    /// One-sided: `exponent ≥ target - tolerance`.
    pub fn passed(&self) -> Option<bool> {
        (!self.inconclusive).then_some(self.exponent >= self.target - self.tolerance)
    }
}

pub fn convergence_rate_fit(samples: &[(f64, f64)], target: f64) -> Result<RateFit> {
    if samples.len() < 6 {
        return Err(Error::Precondition(format!("rate fit needs at least 6 samples, got {}", samples.len())));
    }
    let t_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if !(t_min > 0.0) || t_max / t_min < 30.0 {
        return Err(Error::Precondition(format!(
            "rate fit needs positive times with t_max/t_min ≥ 30, got [{t_min}, {t_max}]"
        )));
    }
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let norms: Vec<f64> = samples.iter().map(|s| s.1).collect();
    if norms.iter().any(|n| !(*n >= RATE_FLOOR)) {
        return Ok(RateFit {
            times,
            norms,
            exponent: f64::NAN,
            constant: f64::NAN,
            target,
            tolerance: RATE_TOLERANCE,
            inconclusive: true,
        });
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = sxy / sxx;
    Ok(RateFit {
        times,
        norms,
        exponent,
        constant: (my - exponent * mx).exp(),
        target,
        tolerance: RATE_TOLERANCE,
        inconclusive: false,
    })
}

/// `∫_{t₀}^{t₁} f` for `f` interpolated as a power law through both ends;
/// trapezoidal where a sample vanishes.
fn power_law_segment(t0: f64, f0: f64, t1: f64, f1: f64) -> f64 {
    if f0 <= 0.0 || f1 <= 0.0 {
        return 0.5 * (t1 - t0) * (f0 + f1);
    }
    let g = (f1 / f0).ln() / (t1 / t0).ln();
    if (g + 1.0).abs() < 1e-12 {
        f0 * t0 * (t1 / t0).ln()
    } else {
        (t1 * f1 - t0 * f0) / (g + 1.0)
    }
}

/// Fit of `∫₀^t n(τ)^q dτ` against `t^{q/4}`; report only. Samples need
/// `t > 0`; between samples `n^q` is interpolated as a power law, and the
/// first interval's law is extended down to `t = 0` when integrable.
pub fn integrated_rate_fit(samples: &[(f64, f64)], q: f64) -> Result<RateFit> {
    if samples.len() < 2 || samples[0].0 <= 0.0 {
        return Err(Error::Precondition("integrated rate fit needs at least two samples at positive times".into()));
    }
    let f: Vec<f64> = samples.iter().map(|(_, n)| n.powf(q)).collect();
    let (t0, t1) = (samples[0].0, samples[1].0);
    let mut total = 0.0;
    if f[0] > 0.0 && f[1] > 0.0 {
        let g = (f[1] / f[0]).ln() / (t1 / t0).ln();
        if g > -1.0 {
            total = t0 * f[0] / (g + 1.0);
        }
    }
    let mut cumulative = vec![(t0, total)];
    for k in 1..samples.len() {
        total += power_law_segment(samples[k - 1].0, f[k - 1], samples[k].0, f[k]);
        cumulative.push((samples[k].0, total));
    }
    convergence_rate_fit(&cumulative, q / 4.0)
}

/// Resamples `field` on a fixed grid of half-width `half_width` at `n_t`
/// equally spaced times spanning its sampled interval.
pub fn fixed_frame(field: &PhysicalField, n: usize, half_width: f64, n_t: usize) -> Result<PhysicalField> {
    let grid = Grid::new(n, half_width)?;
    let times = field.times();
    let (t0, t1) = (times[0], *times.last().unwrap());
    if n_t < 2 {
        return Err(Error::config("need at least two time levels"));
    }
    let layout: Vec<SliceLayout> = (0..n_t)
        .map(|k| SliceLayout {
            t: t0 + (t1 - t0) * k as f64 / (n_t - 1) as f64,
            grid,
            angle: 0.0,
        })
        .collect();
    field.resample(&layout, crate::grid::Interp::Cubic)
}
