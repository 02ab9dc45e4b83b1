//! Galerkin approximation of the perturbed Leray system for `U = A - W`,
//! its periodic orbit, pressure recovery and composition of `v = a + b`.

pub mod basis;
pub mod compose;
pub mod fixed_point;
pub mod integrate;
pub mod mollify;
pub mod pressure;
pub mod tensors;

pub use basis::{Basis, Mode, Parity};
pub use compose::{compose_solution, eq_a_residual, ComposedSolution};
pub use fixed_point::{absorbing_radius, certify_ball, find_fixed_point, BallCertificate, FixedPointOptions, FixedPointReport};
pub use integrate::{integrate, step_count, OdeSystem, Trajectory};
pub use mollify::{eta, eta_hat, mollify};
pub use pressure::{quadratic_flux, recover_pressure, recover_pressure_trajectory};
pub use tensors::{assemble_tensors, Assembly, DriftMask, GalerkinTensors};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::transform::{Boundary, ProfileLayout, ProfileTrajectory};

/// Interior cube `|y|_∞ ≤ fraction·L` on which solution norms are reported.
pub const REPORT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinOptions {
    pub modes: usize,
    /// Mollification radius `ε`.
    pub eps: f64,
    /// Upper bound on the time step.
    pub dt_max: f64,
    pub mask_inner: f64,
    pub mask_outer: f64,
    pub fixed_point: FixedPointOptions,
    /// Number of random probes for the ball certificate.
    pub probes: usize,
    pub seed: u64,
}

impl Default for GalerkinOptions {
    fn default() -> Self {
        Self {
            modes: 32,
            eps: 0.1,
            dt_max: 0.05,
            mask_inner: 0.6,
            mask_outer: 0.95,
            fixed_point: FixedPointOptions::default(),
            probes: 8,
            seed: 0,
        }
    }
}

/// Periodic Galerkin orbit and its diagnostics.
#[derive(Debug, Clone)]
pub struct GalerkinState {
    pub basis: Basis,
    pub tensors: GalerkinTensors,
    /// Orbit sampled at every time step of `[0, T]`.
    pub trajectory: Trajectory,
    pub fixed_point: FixedPointReport,
    pub certificate: BallCertificate,
    /// `δ` and `C₂` of the absorbing estimate.
    pub delta: f64,
    pub c2: f64,
    /// `|b(T) - b(0)|`.
    pub periodicity_defect: f64,
    pub steps: usize,
}

impl GalerkinState {
    pub fn eps(&self) -> f64 {
        self.tensors.eps
    }

    pub fn k(&self) -> usize {
        self.tensors.k
    }

    /// `|b(s)|²` along the orbit.
    pub fn energy(&self) -> Vec<f64> {
        self.trajectory.b.iter().map(|b| b.iter().map(|x| x * x).sum()).collect()
    }

    /// See [`orbit_energy_norm`].
    pub fn energy_norm(&self) -> f64 {
        orbit_energy_norm(&self.basis, &self.trajectory.b, self.tensors.period)
    }

    /// `max_s (e^{s/4}|b(s)|² - |b(0)|²) - e^{T/4}C₂T`; nonpositive when the
    /// absorbing estimate holds along the orbit.
    pub fn gronwall_margin(&self) -> f64 {
        let e = self.energy();
        let t = self.tensors.period;
        let worst = self
            .trajectory
            .s
            .iter()
            .zip(&e)
            .map(|(s, x)| (s / 4.0).exp() * x - e[0])
            .fold(f64::NEG_INFINITY, f64::max);
        worst - (t / 4.0).exp() * self.c2 * t
    }

    /// `U(y, s_k) = Σ b_i(s_k) a_i(y)` on the nodes of `layout`.
    pub fn profile(&self, layout: &ProfileLayout) -> Result<ProfileTrajectory> {
        self.basis.check_grid(&layout.grid)?;
        let nodes = self.trajectory.at_nodes(layout.n_s)?;
        let mut traj = ProfileTrajectory::zeros(layout, self.tensors.alpha, Boundary::Open);
        for (k, b) in nodes.iter().enumerate() {
            traj.velocity[k] = self.basis.synthesize(b, &layout.grid);
        }
        Ok(traj)
    }
}

/// `sup_s ‖U‖_{L²} + (∫₀ᵀ ‖U‖²_{H¹} ds)^{1/2}` for coefficient rows at
/// equally spaced times spanning `[0, T]`, trapezoidal in `s`.
pub fn orbit_energy_norm(basis: &Basis, rows: &[Vec<f64>], period: f64) -> f64 {
    let sup = rows
        .iter()
        .map(|b| b.iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt();
    let weights: Vec<f64> = basis.modes.iter().map(|m| 1.0 + m.wavenumber_squared()).collect();
    let h1: Vec<f64> = rows
        .iter()
        .map(|b| b.iter().zip(&weights).map(|(x, w)| w * x * x).sum())
        .collect();
    let dt = period / (rows.len().max(2) - 1) as f64;
    let integral: f64 = h1.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    sup + integral.sqrt()
}

/// `max_n |(|b_{n+1}|² - |b_n|²)/(2dt) - ½(E(s_n, b_n) + E(s_{n+1}, b_{n+1}))|`
/// with `E = bᵀAb + B(b,b,b) + C·b`.
pub fn energy_identity_defect(tensors: &GalerkinTensors, trajectory: &Trajectory) -> f64 {
    let e: Vec<f64> = trajectory.b.iter().map(|b| b.iter().map(|x| x * x).sum()).collect();
    let rates: Vec<f64> = trajectory.s.iter().zip(&trajectory.b).map(|(s, b)| tensors.energy_rate(*s, b)).collect();
    (0..e.len() - 1)
        .map(|n| {
            let dt = trajectory.s[n + 1] - trajectory.s[n];
            ((e[n + 1] - e[n]) / (2.0 * dt) - 0.5 * (rates[n] + rates[n + 1])).abs()
        })
        .fold(0.0, f64::max)
}

/// Assembles the system, finds the periodic orbit and certifies the
/// absorbing ball.
pub fn solve_periodic(
    basis: Basis,
    grid: Option<&Grid>,
    cutoff: Option<&ProfileTrajectory>,
    mild: Option<&ProfileTrajectory>,
    period: f64,
    alpha: f64,
    opts: &GalerkinOptions,
) -> Result<GalerkinState> {
    if let Some(g) = grid {
        basis.check_grid(g)?;
    }
    if !(period > 0.0) {
        return Err(Error::config(format!("period must be positive, got {period}")));
    }
    let mask = DriftMask::for_box(basis.half_width, opts.mask_inner, opts.mask_outer)?;
    let tensors = assemble_tensors(&Assembly {
        basis: &basis,
        mask: &mask,
        cutoff,
        mild,
        eps: opts.eps,
        period,
        alpha,
    })?;
    let n_s = tensors.n_s();
    let steps = step_count(period, tensors.explicit_bound(), opts.dt_max, n_s);
    let period_map = |b: &[f64]| -> Result<Vec<f64>> { Ok(integrate(&tensors, b, period, steps)?.last().to_vec()) };

    let mu = tensors.max_symmetric_eigenvalue();
    let delta = -2.0 * mu - 0.25;
    if delta <= 0.0 {
        return Err(Error::BallInvariance {
            rho: f64::INFINITY,
            suggested: f64::INFINITY,
        });
    }
    let c2 = tensors.forcing_norm().powi(2) / delta;
    let rho = absorbing_radius(c2, period);
    let certificate = certify_ball(&period_map, tensors.k, rho, opts.probes, opts.seed)?;

    let start = vec![0.0; tensors.k];
    let fixed_point = find_fixed_point(&period_map, &start, &opts.fixed_point)?;
    let trajectory = integrate(&tensors, &fixed_point.point, period, steps)?;
    let defect = trajectory
        .last()
        .iter()
        .zip(&trajectory.b[0])
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(GalerkinState {
        basis,
        tensors,
        trajectory,
        fixed_point,
        certificate,
        delta,
        c2,
        periodicity_defect: defect,
        steps,
    })
}
