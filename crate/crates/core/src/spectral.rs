//! Fourier-space operators on the periodic box.
//!
//! Transforms are unnormalized forward, `1/n³` inverse. Odd-order
//! derivatives zero the Nyquist plane so real fields stay real.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Grid, ScalarField, VectorField};

pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    /// Shared plan for `n³` transforms.
    pub fn get(n: usize) -> Arc<Fft3> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft3 {
                    n,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.forward);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, &self.inverse);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(buf.len(), n * n * n);
        buf.par_chunks_mut(n).for_each(|line| plan.process(line));
        buf.par_chunks_mut(n * n).for_each(|plane| {
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                for j in 0..n {
                    line[j] = plane[i + n * j];
                }
                plan.process(&mut line);
                for j in 0..n {
                    plane[i + n * j] = line[j];
                }
            }
        });
        let nn = n * n;
        let mut transposed = vec![Complex64::new(0.0, 0.0); buf.len()];
        for k in 0..n {
            for ij in 0..nn {
                transposed[ij * n + k] = buf[ij + nn * k];
            }
        }
        transposed.par_chunks_mut(n).for_each(|line| plan.process(line));
        for k in 0..n {
            for ij in 0..nn {
                buf[ij + nn * k] = transposed[ij * n + k];
            }
        }
    }
}

pub fn to_spectrum(grid: &Grid, data: &[f64]) -> Vec<Complex64> {
    Fft3::get(grid.n()).forward_real(data)
}

pub fn to_physical(grid: &Grid, spec: Vec<Complex64>) -> Vec<f64> {
    Fft3::get(grid.n()).inverse_real(spec)
}

/// Apply a real multiplier `symbol(ξ)` in Fourier space.
pub fn apply_multiplier(grid: &Grid, data: &[f64], symbol: impl Fn([f64; 3]) -> f64 + Sync) -> Vec<f64> {
    let mut spec = to_spectrum(grid, data);
    spec.par_iter_mut().enumerate().for_each(|(idx, c)| *c *= symbol(grid.wavevector(idx)));
    to_physical(grid, spec)
}

pub fn apply_multiplier_vector(
    field: &VectorField,
    symbol: impl Fn([f64; 3]) -> f64 + Sync,
) -> VectorField {
    let grid = field.grid;
    let mut out = VectorField::zeros(grid);
    for d in 0..3 {
        out.comps[d] = apply_multiplier(&grid, &field.comps[d], &symbol);
    }
    out
}

#[inline]
fn is_nyquist(grid: &Grid, idx: usize) -> bool {
    let n = grid.n();
    if n % 2 != 0 {
        return false;
    }
    let (i, j, k) = grid.triple(idx);
    i == n / 2 || j == n / 2 || k == n / 2
}

/// Spectral partial derivative along `axis`.
pub fn derivative(grid: &Grid, data: &[f64], axis: usize) -> Vec<f64> {
    let mut spec = to_spectrum(grid, data);
    spec.par_iter_mut().enumerate().for_each(|(idx, c)| {
        if is_nyquist(grid, idx) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            let kv = grid.wavevector(idx)[axis];
            *c *= Complex64::new(0.0, kv);
        }
    });
    to_physical(grid, spec)
}

pub fn gradient(grid: &Grid, data: &[f64]) -> [Vec<f64>; 3] {
    [
        derivative(grid, data, 0),
        derivative(grid, data, 1),
        derivative(grid, data, 2),
    ]
}

/// Full Jacobian `jac[c][d] = ∂_d v_c`.
pub fn jacobian(field: &VectorField) -> [[Vec<f64>; 3]; 3] {
    let g = field.grid;
    [
        gradient(&g, &field.comps[0]),
        gradient(&g, &field.comps[1]),
        gradient(&g, &field.comps[2]),
    ]
}

pub fn divergence(field: &VectorField) -> ScalarField {
    let grid = field.grid;
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    for d in 0..3 {
        let s = to_spectrum(&grid, &field.comps[d]);
        for (idx, (acc, c)) in spec.iter_mut().zip(s).enumerate() {
            if !is_nyquist(&grid, idx) {
                *acc += c * Complex64::new(0.0, grid.wavevector(idx)[d]);
            }
        }
    }
    ScalarField {
        grid,
        data: to_physical(&grid, spec),
    }
}

pub fn laplacian(grid: &Grid, data: &[f64]) -> Vec<f64> {
    apply_multiplier(grid, data, |k| -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))
}

pub fn laplacian_vector(field: &VectorField) -> VectorField {
    apply_multiplier_vector(field, |k| -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))
}

/// Solve `-Δφ = rhs` with the mean of `φ` set to zero.
pub fn poisson(grid: &Grid, rhs: &[f64]) -> Vec<f64> {
    apply_multiplier(grid, rhs, |k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2
        }
    })
}

/// Solenoidal projection `I - ξξᵀ/|ξ|²`; the mean is kept and the Nyquist
/// planes are dropped.
pub fn leray_project(field: &VectorField) -> VectorField {
    let grid = field.grid;
    let specs: Vec<Vec<Complex64>> = (0..3).map(|d| to_spectrum(&grid, &field.comps[d])).collect();
    let mut out = [
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
    ];
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            for d in 0..3 {
                out[d][idx] = specs[d][idx];
            }
            continue;
        }
        if is_nyquist(&grid, idx) {
            continue;
        }
        let kdotv = specs[0][idx] * k[0] + specs[1][idx] * k[1] + specs[2][idx] * k[2];
        for d in 0..3 {
            out[d][idx] = specs[d][idx] - kdotv * (k[d] / k2);
        }
    }
    let [o0, o1, o2] = out;
    VectorField {
        grid,
        comps: [to_physical(&grid, o0), to_physical(&grid, o1), to_physical(&grid, o2)],
    }
}

pub fn heat_scalar(grid: &Grid, data: &[f64], t: f64) -> Vec<f64> {
    apply_multiplier(grid, data, |k| (-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * t).exp())
}

pub fn heat_vector(field: &VectorField, t: f64) -> VectorField {
    apply_multiplier_vector(field, |k| (-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * t).exp())
}

/// Pressure from a symmetric quadratic flux: `p̂ = -Σ ξ_iξ_j Q̂_ij / |ξ|²`,
/// so that `-Δp = Σ ∂_i∂_j Q_ij`. Zero mean.
pub fn pressure_from_flux(grid: &Grid, flux: &[[Vec<f64>; 3]; 3]) -> Vec<f64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..3 {
        for j in i..3 {
            let s = to_spectrum(grid, &flux[i][j]);
            let factor = if i == j { 1.0 } else { 2.0 };
            for (idx, (a, c)) in acc.iter_mut().zip(s).enumerate() {
                let k = grid.wavevector(idx);
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 > 0.0 {
                    *a -= c * (factor * k[i] * k[j] / k2);
                }
            }
        }
    }
    to_physical(grid, acc)
}

/// `P∇·Q` for a symmetric flux `Q` (upper triangle used): the Leray
/// projection of the vector with components `Σ_j ∂_j Q_kj`.
pub fn projected_flux_divergence(grid: &Grid, flux: &[[Vec<f64>; 3]; 3]) -> VectorField {
    let mut div = [
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
    ];
    for i in 0..3 {
        for j in i..3 {
            let s = to_spectrum(grid, &flux[i][j]);
            for (idx, c) in s.into_iter().enumerate() {
                if is_nyquist(grid, idx) {
                    continue;
                }
                let k = grid.wavevector(idx);
                div[i][idx] += c * Complex64::new(0.0, k[j]);
                if i != j {
                    div[j][idx] += c * Complex64::new(0.0, k[i]);
                }
            }
        }
    }
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let kdotv = div[0][idx] * k[0] + div[1][idx] * k[1] + div[2][idx] * k[2];
        for d in 0..3 {
            div[d][idx] -= kdotv * (k[d] / k2);
        }
    }
    let [a, b, c] = div;
    VectorField {
        grid: *grid,
        comps: [to_physical(grid, a), to_physical(grid, b), to_physical(grid, c)],
    }
}

/// Coefficients of `f` against `cos(κ·y)` and `sin(κ·y)` for the integer
/// mode `m`, returned as `(Σ f cos, Σ f sin)` over the nodes (no volume
/// factor). Works from a precomputed spectrum of `f`.
#[inline]
pub fn trig_sums(grid: &Grid, spec: &[Complex64], m: [i64; 3]) -> (f64, f64) {
    let n = grid.n() as i64;
    let wrap = |v: i64| (((v % n) + n) % n) as usize;
    let idx = grid.index(wrap(m[0]), wrap(m[1]), wrap(m[2]));
    // nodes start at -L, giving a phase (-1)^(m0+m1+m2)
    let sign = if (m[0] + m[1] + m[2]).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let c = spec[idx] * sign;
    (c.re, -c.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16, PI).unwrap()
    }

    #[test]
    fn derivative_of_a_sine_is_exact() {
        let g = grid();
        let f = ScalarField::from_fn(g, |p| (2.0 * p[0]).sin() * p[1].cos());
        let d = derivative(&g, &f.data, 0);
        for (i, v) in d.iter().enumerate() {
            let p = g.point(i);
            assert!((v - 2.0 * (2.0 * p[0]).cos() * p[1].cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn projected_flux_divergence_matches_composition() {
        let g = grid();
        let v = VectorField::from_fn(g, |p| [p[1].sin(), (p[2] + p[0]).cos(), (2.0 * p[0]).sin()]);
        let flux: [[Vec<f64>; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| v.comps[i].iter().zip(&v.comps[j]).map(|(a, b)| a * b).collect())
        });
        let fast = projected_flux_divergence(&g, &flux);
        let mut div = VectorField::zeros(g);
        for i in 0..3 {
            for j in 0..3 {
                let d = derivative(&g, &flux[i][j], j);
                div.comps[i].iter_mut().zip(d).for_each(|(a, b)| *a += b);
            }
        }
        let slow = leray_project(&div);
        assert!(fast.sub(&slow).max_abs() < 1e-12);
    }

    #[test]
    fn leray_projection_kills_gradients_and_keeps_curls() {
        let g = grid();
        let grad = VectorField::from_fn(g, |p| [p[0].cos() * p[1].sin(), p[0].sin() * p[1].cos(), 0.0]);
        let curl = VectorField::from_fn(g, |p| [p[1].sin(), p[2].sin(), p[0].sin()]);
        assert!(leray_project(&grad).max_abs() < 1e-12);
        assert!(leray_project(&curl).sub(&curl).max_abs() < 1e-12);
    }

    #[test]
    fn poisson_inverts_the_laplacian() {
        let g = grid();
        let f = ScalarField::from_fn(g, |p| (p[0] + 2.0 * p[2]).sin() + (3.0 * p[1]).cos());
        let phi = poisson(&g, &f.data);
        let back = laplacian(&g, &phi);
        for (a, b) in back.iter().zip(&f.data) {
            assert!((a + b).abs() < 1e-11);
        }
    }

    #[test]
    fn trig_sums_pick_out_a_mode() {
        let g = grid();
        let f = ScalarField::from_fn(g, |p| 3.0 * (p[0] - 2.0 * p[2]).cos() + 0.5 * (p[0] - 2.0 * p[2]).sin());
        let spec = to_spectrum(&g, &f.data);
        let (c, s) = trig_sums(&g, &spec, [1, 0, -2]);
        let half = (g.len() / 2) as f64;
        assert!((c / half - 3.0).abs() < 1e-12);
        assert!((s / half - 0.5).abs() < 1e-12);
    }
}
