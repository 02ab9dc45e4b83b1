//! Fixed points of the period map `b₀ ↦ b(T)` and the absorbing-ball
//! certificate.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial Picard damping `θ` in `x ← x + θ(T(x) - x)`.
    pub damping: f64,
    /// Anderson history length; zero disables acceleration.
    pub window: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            damping: 0.5,
            window: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub point: Vec<f64>,
    /// `|T(x) - x|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Picard iteration with Anderson mixing. The damping is halved
/// and the history cleared whenever the residual grows.
pub fn find_fixed_point(
    mut map: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    start: &[f64],
    opts: &FixedPointOptions,
) -> Result<FixedPointReport> {
    let mut x = start.to_vec();
    let mut theta = opts.damping;
    let mut history = Vec::new();
    let mut dx: Vec<Vec<f64>> = Vec::new();
    let mut dg: Vec<Vec<f64>> = Vec::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut best = (f64::INFINITY, x.clone());
    for it in 0..=opts.max_iter {
        let tx = map(&x)?;
        let g: Vec<f64> = tx.iter().zip(&x).map(|(a, b)| a - b).collect();
        let r = norm(&g);
        history.push(r);
        if r < best.0 {
            best = (r, x.clone());
        }
        if r < opts.tol {
            return Ok(FixedPointReport {
                point: x,
                residual: r,
                iterations: it,
                history,
            });
        }
        if it == opts.max_iter {
            break;
        }
        if let Some((px, pg)) = &prev {
            if r > history[history.len() - 2] {
                theta = (theta * 0.5).max(1e-3);
                dx.clear();
                dg.clear();
            } else if opts.window > 0 {
                dx.push(x.iter().zip(px).map(|(a, b)| a - b).collect());
                dg.push(g.iter().zip(pg).map(|(a, b)| a - b).collect());
                if dx.len() > opts.window {
                    dx.remove(0);
                    dg.remove(0);
                }
            }
        }
        let mut next: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + theta * b).collect();
        if !dg.is_empty() {
            let m = DMatrix::from_fn(g.len(), dg.len(), |i, j| dg[j][i]);
            let rhs = DVector::from_column_slice(&g);
            if let Ok(gamma) = m.clone().svd(true, true).solve(&rhs, 1e-12) {
                for (j, gj) in gamma.iter().enumerate() {
                    for i in 0..next.len() {
                        next[i] -= gj * (dx[j][i] + theta * dg[j][i]);
                    }
                }
            }
        }
        prev = Some((x, g));
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: best.0,
    })
}

/// `ρ² = C₂T / (1 - e^{-T/4})`: the smallest radius kept invariant by
/// `e^{s/4}|b(s)|² ≤ |b(0)|² + e^{T/4}C₂T` over one period `T`.
pub fn absorbing_radius(c2: f64, period: f64) -> f64 {
    (c2.max(0.0) * period / (1.0 - (-period / 4.0).exp())).sqrt().max(1e-12)
}

/// Probe outcomes of the ball-invariance check.
#[derive(Debug, Clone, PartialEq)]
pub struct BallCertificate {
    pub rho: f64,
    /// `|T(b)|` for each probe `b` on the sphere or inside the ball.
    pub images: Vec<f64>,
    pub passed: bool,
}

/// Samples `probes` points with `|b| ≤ rho` (half on the sphere) and checks
/// `|T(b)| ≤ rho`. A failure reports the largest image as a suggested radius.
pub fn certify_ball(
    mut map: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    dim: usize,
    rho: f64,
    probes: usize,
    seed: u64,
) -> Result<BallCertificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(probes + 1);
    for p in 0..=probes {
        let point: Vec<f64> = if p == 0 {
            vec![0.0; dim]
        } else {
            let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm(&raw).max(1e-300);
            let radius = if p % 2 == 1 { rho } else { rho * rng.gen::<f64>() };
            raw.iter().map(|x| x * radius / n).collect()
        };
        images.push(norm(&map(&point)?));
    }
    let worst = images.iter().copied().fold(0.0, f64::max);
    let passed = worst <= rho * (1.0 + 1e-12);
    let cert = BallCertificate { rho, images, passed };
    if !passed {
        return Err(Error::BallInvariance {
            rho,
            suggested: worst * 1.1,
        });
    }
    Ok(cert)
}
