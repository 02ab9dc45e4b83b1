//! Physical fields `(v, π)(x, t)`, profile trajectories `(u, p)(y, s)` and
//! the change of variables `x = √t R(αs) y`, `t = e^s` between them.
//!
//! A [`PhysicalField`] is a list of time slices; each slice carries its own
//! grid and frame angle, so the image of a profile grid is represented
//! without resampling. Velocities are always stored in the fixed frame.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, Interp, ScalarField, Vec3, VectorField};
use crate::symmetry::{apply_generator, rotate};
use crate::{spectral, stencil};

/// Fraction of the half-width inside which residual norms are reported.
pub const INTERIOR_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceLayout {
    pub t: f64,
    pub grid: Grid,
    pub angle: f64,
}

impl SliceLayout {
    #[inline]
    pub fn position(&self, idx: usize) -> Vec3 {
        rotate(self.angle, self.grid.point(idx))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub grid: Grid,
    /// Node `idx` sits at `R(angle) · grid.point(idx)`.
    pub angle: f64,
    pub velocity: VectorField,
    pub pressure: ScalarField,
}

impl Slice {
    #[inline]
    pub fn position(&self, idx: usize) -> Vec3 {
        rotate(self.angle, self.grid.point(idx))
    }

    pub fn layout(&self) -> SliceLayout {
        SliceLayout {
            t: self.t,
            grid: self.grid,
            angle: self.angle,
        }
    }

    fn sample(&self, x: Vec3, order: Interp) -> Option<(Vec3, f64)> {
        let local = rotate(-self.angle, x);
        let v = self.velocity.interpolate(local, order)?;
        let p = self.pressure.interpolate(local, order)?;
        Some((v, p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub slices: Vec<Slice>,
}

impl PhysicalField {
    pub fn new(mut slices: Vec<Slice>) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::config("physical field needs at least one time slice"));
        }
        if let Some(s) = slices.iter().find(|s| !(s.t > 0.0 && s.t.is_finite())) {
            return Err(Error::config(format!("time slices must have t > 0, got {}", s.t)));
        }
        slices.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Self { slices })
    }

    pub fn from_fn(layout: &[SliceLayout], f: impl Fn(Vec3, f64) -> (Vec3, f64) + Sync) -> Result<Self> {
        let slices = layout
            .iter()
            .map(|lay| {
                let vals: Vec<(Vec3, f64)> = (0..lay.grid.len())
                    .into_par_iter()
                    .map(|idx| f(lay.position(idx), lay.t))
                    .collect();
                let mut velocity = VectorField::zeros(lay.grid);
                let mut pressure = ScalarField::zeros(lay.grid);
                for (idx, (v, p)) in vals.into_iter().enumerate() {
                    velocity.set(idx, v);
                    pressure.data[idx] = p;
                }
                Slice {
                    t: lay.t,
                    grid: lay.grid,
                    angle: lay.angle,
                    velocity,
                    pressure,
                }
            })
            .collect();
        Self::new(slices)
    }

    /// Slices at `t = e^s` whose nodes are `√t R(αs) y` for the profile
    /// grid nodes `y`.
    pub fn similarity_layout(profile_grid: &Grid, alpha: f64, s_values: &[f64]) -> Result<Vec<SliceLayout>> {
        s_values
            .iter()
            .map(|&s| {
                let t = s.exp();
                Ok(SliceLayout {
                    t,
                    grid: Grid::new(profile_grid.n(), profile_grid.half_width() * t.sqrt())?,
                    angle: alpha * s,
                })
            })
            .collect()
    }

    /// Common fixed-frame layout at the given times.
    pub fn uniform_layout(grid: &Grid, times: &[f64]) -> Vec<SliceLayout> {
        times
            .iter()
            .map(|&t| SliceLayout {
                t,
                grid: *grid,
                angle: 0.0,
            })
            .collect()
    }

    pub fn layout(&self) -> Vec<SliceLayout> {
        self.slices.iter().map(Slice::layout).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.t).collect()
    }

    /// Trilinear in space, linear in `log t`.
    pub fn sample(&self, x: Vec3, t: f64) -> Result<(Vec3, f64)> {
        self.sample_with(x, t, Interp::Linear)
    }

    pub fn sample_with(&self, x: Vec3, t: f64, order: Interp) -> Result<(Vec3, f64)> {
        let domain = || Error::Domain { point: x, time: t };
        if !(t > 0.0) {
            return Err(domain());
        }
        let lt = t.ln();
        let tol = 1e-12;
        let pos = self.slices.partition_point(|s| s.t.ln() < lt - tol);
        if pos < self.slices.len() && (self.slices[pos].t.ln() - lt).abs() <= tol {
            return self.slices[pos].sample(x, order).ok_or_else(domain);
        }
        if pos == 0 || pos == self.slices.len() {
            return Err(domain());
        }
        let (a, b) = (&self.slices[pos - 1], &self.slices[pos]);
        let w = (lt - a.t.ln()) / (b.t.ln() - a.t.ln());
        let (va, pa) = a.sample(x, order).ok_or_else(domain)?;
        let (vb, pb) = b.sample(x, order).ok_or_else(domain)?;
        Ok((
            [
                (1.0 - w) * va[0] + w * vb[0],
                (1.0 - w) * va[1] + w * vb[1],
                (1.0 - w) * va[2] + w * vb[2],
            ],
            (1.0 - w) * pa + w * pb,
        ))
    }

    /// Resample onto another layout.
    pub fn resample(&self, layout: &[SliceLayout], order: Interp) -> Result<PhysicalField> {
        let mut slices = Vec::with_capacity(layout.len());
        for lay in layout {
            let vals: Vec<Result<(Vec3, f64)>> = (0..lay.grid.len())
                .into_par_iter()
                .map(|idx| self.sample_with(lay.position(idx), lay.t, order))
                .collect();
            let mut velocity = VectorField::zeros(lay.grid);
            let mut pressure = ScalarField::zeros(lay.grid);
            for (idx, r) in vals.into_iter().enumerate() {
                let (v, p) = r?;
                velocity.set(idx, v);
                pressure.data[idx] = p;
            }
            slices.push(Slice {
                t: lay.t,
                grid: lay.grid,
                angle: lay.angle,
                velocity,
                pressure,
            });
        }
        PhysicalField::new(slices)
    }

    pub fn add(&self, other: &PhysicalField) -> Result<PhysicalField> {
        if self.layout() != other.layout() {
            return Err(Error::config("cannot add physical fields with different layouts"));
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| {
                let mut s = a.clone();
                s.velocity = a.velocity.add(&b.velocity);
                s.pressure.data.iter_mut().zip(&b.pressure.data).for_each(|(x, y)| *x += y);
                s
            })
            .collect();
        PhysicalField::new(slices)
    }
}

/// How spatial derivatives of a profile are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Spectral differentiation on the periodic box.
    Periodic,
    /// Fourth-order one-sided-at-the-edge finite differences.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileLayout {
    pub grid: Grid,
    pub period: f64,
    pub n_s: usize,
}

impl ProfileLayout {
    pub fn s_values(&self) -> Vec<f64> {
        (0..self.n_s).map(|k| k as f64 * self.period / self.n_s as f64).collect()
    }
}

/// Profile samples at `s_k = kT/n_s`, `k < n_s`; `s = T` is identified with
/// `s = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTrajectory {
    pub grid: Grid,
    pub period: f64,
    pub alpha: f64,
    pub velocity: Vec<VectorField>,
    pub pressure: Vec<ScalarField>,
    pub boundary: Boundary,
}

impl ProfileTrajectory {
    pub fn zeros(layout: &ProfileLayout, alpha: f64, boundary: Boundary) -> Self {
        Self {
            grid: layout.grid,
            period: layout.period,
            alpha,
            velocity: vec![VectorField::zeros(layout.grid); layout.n_s],
            pressure: vec![ScalarField::zeros(layout.grid); layout.n_s],
            boundary,
        }
    }

    pub fn from_fn(
        layout: &ProfileLayout,
        alpha: f64,
        boundary: Boundary,
        f: impl Fn(Vec3, f64) -> (Vec3, f64) + Sync,
    ) -> Self {
        let mut traj = Self::zeros(layout, alpha, boundary);
        for (k, s) in layout.s_values().into_iter().enumerate() {
            let vals: Vec<(Vec3, f64)> = (0..layout.grid.len())
                .into_par_iter()
                .map(|idx| f(layout.grid.point(idx), s))
                .collect();
            for (idx, (v, p)) in vals.into_iter().enumerate() {
                traj.velocity[k].set(idx, v);
                traj.pressure[k].data[idx] = p;
            }
        }
        traj
    }

    pub fn layout(&self) -> ProfileLayout {
        ProfileLayout {
            grid: self.grid,
            period: self.period,
            n_s: self.n_s(),
        }
    }

    pub fn n_s(&self) -> usize {
        self.velocity.len()
    }

    pub fn ds(&self) -> f64 {
        self.period / self.n_s() as f64
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.layout().s_values()
    }

    /// Bracketing sample indices and weight for a periodic `s`.
    pub fn bracket(&self, s: f64) -> (usize, usize, f64) {
        let n = self.n_s();
        if n == 1 {
            return (0, 0, 0.0);
        }
        let f = (s / self.ds()).rem_euclid(n as f64);
        let k0 = (f.floor() as usize) % n;
        (k0, (k0 + 1) % n, f - f.floor())
    }

    /// Velocity at arbitrary `s`, linear between samples, periodic.
    pub fn velocity_at(&self, s: f64) -> VectorField {
        let (a, b, w) = self.bracket(s);
        if w == 0.0 {
            return self.velocity[a].clone();
        }
        let mut out = self.velocity[a].scaled(1.0 - w);
        out.axpy(w, &self.velocity[b]);
        out
    }

    pub fn pressure_at(&self, s: f64) -> ScalarField {
        let (a, b, w) = self.bracket(s);
        let mut out = self.pressure[a].clone();
        if w != 0.0 {
            for (o, (pa, pb)) in out.data.iter_mut().zip(self.pressure[a].data.iter().zip(&self.pressure[b].data)) {
                *o = (1.0 - w) * pa + w * pb;
            }
        }
        out
    }

    pub fn add(&self, other: &ProfileTrajectory) -> Result<ProfileTrajectory> {
        if self.layout() != other.layout() {
            return Err(Error::config("profile trajectories live on different layouts"));
        }
        let mut out = self.clone();
        for k in 0..self.n_s() {
            out.velocity[k] = self.velocity[k].add(&other.velocity[k]);
            for (a, b) in out.pressure[k].data.iter_mut().zip(&other.pressure[k].data) {
                *a += b;
            }
        }
        Ok(out)
    }

    /// `sup_s` of the L² norm over the interior cube.
    pub fn sup_l2_interior(&self, fraction: f64) -> f64 {
        self.velocity
            .iter()
            .map(|v| v.l2_norm_masked(|i| self.grid.in_interior(i, fraction)))
            .fold(0.0, f64::max)
    }

    /// Largest relative change between samples; zero for a stationary
    /// profile.
    pub fn s_variation(&self) -> f64 {
        let base = self.velocity[0].l2_norm().max(1e-300);
        self.velocity.iter().map(|v| v.sub(&self.velocity[0]).l2_norm() / base).fold(0.0, f64::max)
    }
}

/// `u(y,s) = √t R(-αs) v(√t R(αs) y, e^s)`, `p = t π`.
pub fn to_profile(field: &PhysicalField, alpha: f64, layout: &ProfileLayout) -> Result<ProfileTrajectory> {
    let mut traj = ProfileTrajectory::zeros(layout, alpha, Boundary::Open);
    for (k, s) in layout.s_values().into_iter().enumerate() {
        sample_profile_slice(field, alpha, &layout.grid, s, &mut traj.velocity[k], &mut traj.pressure[k])?;
    }
    Ok(traj)
}

fn sample_profile_slice(
    field: &PhysicalField,
    alpha: f64,
    grid: &Grid,
    s: f64,
    velocity: &mut VectorField,
    pressure: &mut ScalarField,
) -> Result<()> {
    let t = s.exp();
    let rt = t.sqrt();
    let vals: Vec<Result<(Vec3, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let y = grid.point(idx);
            let x = rotate(alpha * s, [rt * y[0], rt * y[1], rt * y[2]]);
            field.sample(x, t)
        })
        .collect();
    for (idx, r) in vals.into_iter().enumerate() {
        let (v, p) = r?;
        let u = rotate(-alpha * s, v);
        velocity.set(idx, [rt * u[0], rt * u[1], rt * u[2]]);
        pressure.data[idx] = t * p;
    }
    Ok(())
}

/// Inverse of [`to_profile`] on the similarity layout, for the requested
/// range of periods.
pub fn from_profile(traj: &ProfileTrajectory, periods: Range<i32>) -> Result<PhysicalField> {
    let mut slices = Vec::new();
    for j in periods {
        for (k, s0) in traj.s_values().into_iter().enumerate() {
            let s = s0 + j as f64 * traj.period;
            let t = s.exp();
            let rt = t.sqrt();
            let angle = traj.alpha * s;
            let grid = Grid::new(traj.grid.n(), traj.grid.half_width() * rt)?;
            let mut velocity = VectorField::zeros(grid);
            for idx in 0..grid.len() {
                let u = rotate(angle, traj.velocity[k].get(idx));
                velocity.set(idx, [u[0] / rt, u[1] / rt, u[2] / rt]);
            }
            let mut pressure = traj.pressure[k].clone();
            pressure.grid = grid;
            pressure.data.iter_mut().for_each(|p| *p /= t);
            slices.push(Slice {
                t,
                grid,
                angle,
                velocity,
                pressure,
            });
        }
    }
    PhysicalField::new(slices)
}

/// `‖u(·,T) - u(·,0)‖ / ‖u(·,0)‖` for the profile of a physical field that
/// covers `t ∈ [1, e^T]`.
pub fn periodicity_defect(field: &PhysicalField, alpha: f64, grid: &Grid, period: f64) -> Result<f64> {
    let mut u0 = VectorField::zeros(*grid);
    let mut u1 = VectorField::zeros(*grid);
    let mut p = ScalarField::zeros(*grid);
    sample_profile_slice(field, alpha, grid, 0.0, &mut u0, &mut p)?;
    sample_profile_slice(field, alpha, grid, period, &mut u1, &mut p)?;
    Ok(u1.sub(&u0).l2_norm() / u0.l2_norm().max(1e-30))
}

/// Which terms enter a residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualTerms {
    /// Time derivative, viscous and (in profile variables) drift and
    /// rotation terms only.
    Linear,
    /// Adds `u·∇u + ∇p`.
    Full,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Momentum residual per time sample.
    pub momentum: Vec<VectorField>,
    /// `sup` over samples of the interior L² norm.
    pub momentum_norm: f64,
    pub divergence_norm: f64,
}

struct Derivatives {
    jac: [[Vec<f64>; 3]; 3],
    lap: VectorField,
    grad_p: [Vec<f64>; 3],
}

fn derivatives(v: &VectorField, p: &ScalarField, boundary: Boundary, with_pressure: bool) -> Derivatives {
    let g = v.grid;
    match boundary {
        Boundary::Periodic => Derivatives {
            jac: spectral::jacobian(v),
            lap: spectral::laplacian_vector(v),
            grad_p: if with_pressure {
                spectral::gradient(&g, &p.data)
            } else {
                [vec![], vec![], vec![]]
            },
        },
        Boundary::Open => Derivatives {
            jac: stencil::jacobian(v),
            lap: stencil::laplacian_vector(v),
            grad_p: if with_pressure {
                stencil::gradient(&g, &p.data)
            } else {
                [vec![], vec![], vec![]]
            },
        },
    }
}

fn interior_norms(grid: &Grid, momentum: &[VectorField], div: &[Vec<f64>]) -> (f64, f64) {
    let keep = |i: usize| grid.in_interior(i, INTERIOR_FRACTION);
    let m = momentum.iter().map(|f| f.l2_norm_masked(keep)).fold(0.0, f64::max);
    let h3 = grid.cell_volume();
    let d = div
        .iter()
        .map(|d| {
            (d.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, v)| v * v).sum::<f64>() * h3).sqrt()
        })
        .fold(0.0, f64::max);
    (m, d)
}

/// Periodic difference weights in `s` for `n` samples.
fn s_derivative(samples: &[VectorField], k: usize, ds: f64) -> VectorField {
    let n = samples.len();
    let grid = samples[0].grid;
    if n < 3 {
        return VectorField::zeros(grid);
    }
    let at = |o: isize| &samples[((k as isize + o).rem_euclid(n as isize)) as usize];
    let mut out = VectorField::zeros(grid);
    if n >= 5 {
        let c = 1.0 / (12.0 * ds);
        out.axpy(-c, at(2));
        out.axpy(8.0 * c, at(1));
        out.axpy(-8.0 * c, at(-1));
        out.axpy(c, at(-2));
    } else {
        out.axpy(0.5 / ds, at(1));
        out.axpy(-0.5 / ds, at(-1));
    }
    out
}

/// Momentum residual of
/// `∂_s u + α(Ju - (Jy)·∇u) - ½u - ½y·∇u - Δu [+ u·∇u + ∇p]`
/// and divergence of `u`.
pub fn leray_residual(traj: &ProfileTrajectory, terms: ResidualTerms) -> Result<ResidualReport> {
    let grid = traj.grid;
    if grid.n() < 4 {
        return Err(Error::config("residual needs at least 4 nodes per direction"));
    }
    let full = terms == ResidualTerms::Full;
    let alpha = traj.alpha;
    let mut momentum = Vec::with_capacity(traj.n_s());
    let mut divs = Vec::with_capacity(traj.n_s());
    for k in 0..traj.n_s() {
        let u = &traj.velocity[k];
        let d = derivatives(u, &traj.pressure[k], traj.boundary, full);
        let ds_u = s_derivative(&traj.velocity, k, traj.ds());
        let vals: Vec<Vec3> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let y = grid.point(i);
                let uv = u.get(i);
                let mut r = [0.0; 3];
                let jy = apply_generator(y);
                let ju = apply_generator(uv);
                for c in 0..3 {
                    let grad = [d.jac[c][0][i], d.jac[c][1][i], d.jac[c][2][i]];
                    let ydg = y[0] * grad[0] + y[1] * grad[1] + y[2] * grad[2];
                    let jydg = jy[0] * grad[0] + jy[1] * grad[1] + jy[2] * grad[2];
                    r[c] = ds_u.comps[c][i] + alpha * (ju[c] - jydg) - 0.5 * uv[c] - 0.5 * ydg - d.lap.comps[c][i];
                    if full {
                        let udg = uv[0] * grad[0] + uv[1] * grad[1] + uv[2] * grad[2];
                        r[c] += udg + d.grad_p[c][i];
                    }
                }
                r
            })
            .collect();
        momentum.push(VectorField::from_values(grid, &vals));
        divs.push((0..grid.len()).map(|i| d.jac[0][0][i] + d.jac[1][1][i] + d.jac[2][2][i]).collect());
    }
    let (momentum_norm, divergence_norm) = interior_norms(&grid, &momentum, &divs);
    Ok(ResidualReport {
        momentum,
        momentum_norm,
        divergence_norm,
    })
}

/// Three-point derivative weights on a nonuniform time grid.
fn time_weights(t: &[f64], k: usize) -> [(usize, f64); 3] {
    let n = t.len();
    let (a, b, c) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    // derivative at t[k] of the quadratic through (a, b, c)
    let x = t[k];
    let (ta, tb, tc) = (t[a], t[b], t[c]);
    let wa = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
    let wb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
    let wc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
    [(a, wa), (b, wb), (c, wc)]
}

/// Momentum residual `∂_t v - Δv [+ v·∇v + ∇π]` and `div v` on a field
/// whose slices share one fixed-frame grid.
pub fn nse_residual(field: &PhysicalField, terms: ResidualTerms) -> Result<ResidualReport> {
    let first = &field.slices[0];
    let grid = first.grid;
    if grid.n() < 4 {
        return Err(Error::config("residual needs at least 4 nodes per direction"));
    }
    if field.slices.len() < 4 {
        return Err(Error::config("residual needs at least 4 time levels"));
    }
    if field.slices.iter().any(|s| s.grid != grid || s.angle != first.angle) {
        return Err(Error::config(
            "time slices must share one grid; resample onto a uniform layout first",
        ));
    }
    let full = terms == ResidualTerms::Full;
    let times = field.times();
    let mut momentum = Vec::new();
    let mut divs = Vec::new();
    for (k, slice) in field.slices.iter().enumerate() {
        let v = &slice.velocity;
        let d = derivatives(v, &slice.pressure, Boundary::Open, full);
        let mut dt = VectorField::zeros(grid);
        for (j, w) in time_weights(&times, k) {
            dt.axpy(w, &field.slices[j].velocity);
        }
        let vals: Vec<Vec3> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let vv = v.get(i);
                let mut r = [0.0; 3];
                for c in 0..3 {
                    r[c] = dt.comps[c][i] - d.lap.comps[c][i];
                    if full {
                        let grad = [d.jac[c][0][i], d.jac[c][1][i], d.jac[c][2][i]];
                        r[c] += vv[0] * grad[0] + vv[1] * grad[1] + vv[2] * grad[2] + d.grad_p[c][i];
                    }
                }
                r
            })
            .collect();
        momentum.push(VectorField::from_values(grid, &vals));
        divs.push((0..grid.len()).map(|i| d.jac[0][0][i] + d.jac[1][1][i] + d.jac[2][2][i]).collect());
    }
    let (momentum_norm, divergence_norm) = interior_norms(&grid, &momentum, &divs);
    Ok(ResidualReport {
        momentum,
        momentum_norm,
        divergence_norm,
    })
}
