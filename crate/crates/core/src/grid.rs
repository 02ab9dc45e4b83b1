//! Uniform cubic lattices and the sampled fields that live on them.
//!
//! A [`Grid`] has `n` nodes per axis on `[-L, L)` with spacing `h = 2L/n`,
//! so node `n/2` sits at the origin. Storage is x-fastest:
//! `index = i + n * (j + n * k)`.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn scale(a: Vec3, c: f64) -> Vec3 {
    [a[0] * c, a[1] * c, a[2] * c]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::config(format!("grid needs at least 2 nodes per axis, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::config(format!("grid half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, half_width })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn triple(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.triple(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Signed integer frequency of DFT index `m` (Nyquist maps to `-n/2`).
    #[inline]
    pub fn signed_mode(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Angular wavenumber of DFT index `m`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> f64 {
        std::f64::consts::PI * self.signed_mode(m) as f64 / self.half_width
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> Vec3 {
        let (i, j, k) = self.triple(idx);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(k)]
    }

    /// `true` when the node lies inside the interior region used for reported
    /// norms: the max-norm coordinate is at most `fraction * L` and the node
    /// is at least two nodes away from every face, so centered stencils apply.
    #[inline]
    pub fn in_interior(&self, idx: usize, fraction: f64) -> bool {
        let (i, j, k) = self.triple(idx);
        let n = self.n;
        if [i, j, k].iter().any(|&m| m < 2 || m + 3 > n) {
            return false;
        }
        let p = self.point(idx);
        let lim = fraction * self.half_width + 1e-12;
        p.iter().all(|c| c.abs() <= lim)
    }

    /// Ball mask `|x| <= radius`.
    pub fn ball_mask(&self, radius: f64) -> Vec<bool> {
        (0..self.len()).map(|i| norm(self.point(i)) <= radius).collect()
    }

    /// Fractional index of a coordinate along one axis.
    #[inline]
    fn fractional(&self, c: f64) -> f64 {
        (c + self.half_width) / self.spacing()
    }
}

/// Interpolation order for sampling between nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    /// Trilinear.
    Linear,
    /// Tensor-product four-point Lagrange (stencil shifted inward at edges).
    Cubic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Vec3) -> f64 + Sync) -> Self {
        use rayon::prelude::*;
        let data = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        Self { grid, data }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn interpolate(&self, p: Vec3, order: Interp) -> Option<f64> {
        let stencil = Stencil::new(&self.grid, p, order)?;
        Some(stencil.apply(&self.data))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Vec3) -> Vec3 + Sync) -> Self {
        use rayon::prelude::*;
        let vals: Vec<Vec3> = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        Self::from_values(grid, &vals)
    }

    pub fn from_values(grid: Grid, vals: &[Vec3]) -> Self {
        let mut out = Self::zeros(grid);
        for (i, v) in vals.iter().enumerate() {
            out.set(i, *v);
        }
        out
    }

    #[inline]
    pub fn get(&self, i: usize) -> Vec3 {
        [self.comps[0][i], self.comps[1][i], self.comps[2][i]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: Vec3) {
        self.comps[0][i] = v[0];
        self.comps[1][i] = v[1];
        self.comps[2][i] = v[2];
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.len()).map(|i| norm(self.get(i))).collect()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_masked(|_| true)
    }

    pub fn l2_norm_masked(&self, keep: impl Fn(usize) -> bool) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len() {
            if keep(i) {
                let v = self.get(i);
                s += dot(v, v);
            }
        }
        (s * self.grid.cell_volume()).sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let h3 = self.grid.cell_volume();
        if p.is_infinite() {
            return self.magnitude().into_iter().fold(0.0, f64::max);
        }
        let s: f64 = (0..self.len()).map(|i| norm(self.get(i)).powf(p)).sum();
        (s * h3).powf(1.0 / p)
    }

    pub fn max_abs(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            comp.iter_mut().for_each(|v| *v *= c);
        }
        out
    }

    pub fn axpy(&mut self, c: f64, other: &VectorField) {
        for d in 0..3 {
            for (a, b) in self.comps[d].iter_mut().zip(&other.comps[d]) {
                *a += c * b;
            }
        }
    }

    fn zip_map(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64) -> VectorField {
        let mut out = self.clone();
        for d in 0..3 {
            for (a, b) in out.comps[d].iter_mut().zip(&other.comps[d]) {
                *a = f(*a, *b);
            }
        }
        out
    }

    /// Pointwise multiplication by a scalar weight.
    pub fn weighted(&self, w: &[f64]) -> VectorField {
        let mut out = self.clone();
        for comp in out.comps.iter_mut() {
            for (a, b) in comp.iter_mut().zip(w) {
                *a *= b;
            }
        }
        out
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        let mut s = 0.0;
        for d in 0..3 {
            s += self.comps[d].iter().zip(&other.comps[d]).map(|(a, b)| a * b).sum::<f64>();
        }
        s * self.grid.cell_volume()
    }

    pub fn interpolate(&self, p: Vec3, order: Interp) -> Option<Vec3> {
        let stencil = Stencil::new(&self.grid, p, order)?;
        Some([
            stencil.apply(&self.comps[0]),
            stencil.apply(&self.comps[1]),
            stencil.apply(&self.comps[2]),
        ])
    }
}

/// Precomputed interpolation weights at one sample point.
struct Stencil {
    start: [usize; 3],
    weights: [[f64; 4]; 3],
    width: usize,
    n: usize,
}

impl Stencil {
    fn new(grid: &Grid, p: Vec3, order: Interp) -> Option<Self> {
        let n = grid.n();
        let tol = 1e-9;
        let mut start = [0usize; 3];
        let mut weights = [[0.0; 4]; 3];
        let width = match order {
            Interp::Linear => 2,
            Interp::Cubic => 4.min(n),
        };
        for d in 0..3 {
            let f = grid.fractional(p[d]);
            if !f.is_finite() || f < -tol || f > (n - 1) as f64 + tol {
                return None;
            }
            let f = f.clamp(0.0, (n - 1) as f64);
            let mut base = f.floor() as usize;
            if base >= n - 1 {
                base = n - 2;
            }
            match order {
                Interp::Linear => {
                    let w = f - base as f64;
                    start[d] = base;
                    weights[d][0] = 1.0 - w;
                    weights[d][1] = w;
                }
                Interp::Cubic => {
                    let s = base.saturating_sub(1).min(n - width);
                    start[d] = s;
                    for a in 0..width {
                        let xa = (s + a) as f64;
                        let mut w = 1.0;
                        for b in 0..width {
                            if a != b {
                                let xb = (s + b) as f64;
                                w *= (f - xb) / (xa - xb);
                            }
                        }
                        weights[d][a] = w;
                    }
                }
            }
        }
        Some(Self {
            start,
            weights,
            width,
            n,
        })
    }

    fn apply(&self, data: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for c in 0..self.width {
            let wk = self.weights[2][c];
            if wk == 0.0 {
                continue;
            }
            let k = self.start[2] + c;
            for b in 0..self.width {
                let wj = self.weights[1][b];
                if wj == 0.0 {
                    continue;
                }
                let j = self.start[1] + b;
                let row = n * (j + n * k);
                for a in 0..self.width {
                    let wi = self.weights[0][a];
                    acc += wk * wj * wi * data[row + self.start[0] + a];
                }
            }
        }
        acc
    }
}
