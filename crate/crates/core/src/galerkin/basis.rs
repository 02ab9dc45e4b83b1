//! Real solenoidal Fourier basis on the periodic box `[-L, L)³`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::grid::{cross, dot, norm, scale, Grid, Vec3, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Cos,
    Sin,
}

/// `N · trig(κ·y) · e` with `κ = πm/L` and `N = (2/(2L)³)^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub m: [i64; 3],
    pub kappa: Vec3,
    pub direction: Vec3,
    pub parity: Parity,
}

impl Mode {
    pub fn wavenumber_squared(&self) -> f64 {
        dot(self.kappa, self.kappa)
    }

    /// Complex amplitude `c` with `mode = N·Re(c e^{iκ·y}) e`, up to `N`.
    pub fn phase(&self) -> (f64, f64) {
        match self.parity {
            Parity::Cos => (1.0, 0.0),
            Parity::Sin => (0.0, -1.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Basis {
    pub half_width: f64,
    pub modes: Vec<Mode>,
    pub normalization: f64,
}

fn lexicographically_positive(m: [i64; 3]) -> bool {
    m.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Polarizations `e₁ = κ×ẑ/|κ×ẑ|` (or `κ×x̂` when `κ ∥ ẑ`) and `e₂ = κ̂×e₁`.
pub fn polarizations(kappa: Vec3) -> (Vec3, Vec3) {
    let mut e1 = cross(kappa, [0.0, 0.0, 1.0]);
    if norm(e1) < 1e-12 * norm(kappa) {
        e1 = cross(kappa, [1.0, 0.0, 0.0]);
    }
    let e1 = scale(e1, 1.0 / norm(e1));
    let e2 = cross(scale(kappa, 1.0 / norm(kappa)), e1);
    (e1, e2)
}

impl Basis {
    /// First `k` modes ordered by `|m|²`, then lexicographically by `m`,
    /// then `(cos, e₁), (cos, e₂), (sin, e₁), (sin, e₂)`. Only wavevectors
    /// with first nonzero component positive are used.
    pub fn new(half_width: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("basis needs at least one mode"));
        }
        if !(half_width > 0.0) {
            return Err(Error::config(format!("box half-width must be positive, got {half_width}")));
        }
        let groups = k.div_ceil(4);
        let mut reach = 1i64;
        let mut vectors: Vec<[i64; 3]>;
        loop {
            vectors = Vec::new();
            for a in -reach..=reach {
                for b in -reach..=reach {
                    for c in -reach..=reach {
                        let m = [a, b, c];
                        if lexicographically_positive(m) {
                            vectors.push(m);
                        }
                    }
                }
            }
            let r2 = |m: &[i64; 3]| m.iter().map(|c| c * c).sum::<i64>();
            vectors.sort_by(|x, y| match r2(x).cmp(&r2(y)) {
                Ordering::Equal => x.cmp(y),
                o => o,
            });
            // every vector with |m|² ≤ reach² is present once reach covers it
            if vectors.len() >= groups && r2(&vectors[groups - 1]) <= reach * reach {
                break;
            }
            reach += 1;
        }
        let scale_k = std::f64::consts::PI / half_width;
        let mut modes = Vec::with_capacity(k);
        'outer: for m in vectors {
            let kappa = [m[0] as f64 * scale_k, m[1] as f64 * scale_k, m[2] as f64 * scale_k];
            let (e1, e2) = polarizations(kappa);
            for parity in [Parity::Cos, Parity::Sin] {
                for direction in [e1, e2] {
                    modes.push(Mode {
                        m,
                        kappa,
                        direction,
                        parity,
                    });
                    if modes.len() == k {
                        break 'outer;
                    }
                }
            }
        }
        Ok(Self {
            half_width,
            modes,
            normalization: (2.0 / (2.0 * half_width).powi(3)).sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Largest `|m_d|` over the modes.
    pub fn max_index(&self) -> i64 {
        self.modes.iter().flat_map(|m| m.m.iter().map(|c| c.abs())).max().unwrap_or(0)
    }

    /// Checks that `grid` matches the box and resolves every mode below its
    /// Nyquist index.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if (grid.half_width() - self.half_width).abs() > 1e-12 * self.half_width {
            return Err(Error::config(format!(
                "basis box half-width {} differs from grid half-width {}",
                self.half_width,
                grid.half_width()
            )));
        }
        if 2 * self.max_index() >= grid.n() as i64 {
            return Err(Error::config(format!(
                "{} modes need |m| up to {}, beyond the resolvable range of a {}-point grid",
                self.len(),
                self.max_index(),
                grid.n()
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize, y: Vec3) -> Vec3 {
        let mode = &self.modes[i];
        let phase = dot(mode.kappa, y);
        let t = match mode.parity {
            Parity::Cos => phase.cos(),
            Parity::Sin => phase.sin(),
        };
        scale(mode.direction, self.normalization * t)
    }

    /// `Σ b_i a_i` sampled on `grid`.
    pub fn synthesize(&self, coefficients: &[f64], grid: &Grid) -> VectorField {
        VectorField::from_fn(*grid, |y| {
            let mut v = [0.0; 3];
            for (i, &c) in coefficients.iter().enumerate() {
                if c != 0.0 {
                    let a = self.value(i, y);
                    for d in 0..3 {
                        v[d] += c * a[d];
                    }
                }
            }
            v
        })
    }
}
