//! Coefficients of the Galerkin system
//! `b_j' = Σ_i A_ij b_i + Σ_{i,l} B_ilj b_i b_l + C_j`.
//!
//! The drift `½u + ½y·∇u` is multiplied by a radial mask `m` that vanishes
//! before the box faces, and a sponge `-σu` with
//! `σ = ¼(1 - m) - ¼ r m'(r)` is added so that the pair contributes exactly
//! `-¼‖u‖²` to the energy balance. Drift, sponge, rotation and the cubic
//! term act on trigonometric modes and are integrated in closed form using
//! the radial Fourier transform of `m`; couplings to `W` and `B` and the
//! forcing use grid quadrature.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::smooth_transition;
use crate::error::{Error, Result};
use crate::grid::{dot, Grid, Vec3, VectorField};
use crate::quadrature::gauss_legendre_on;
use crate::spectral::{to_spectrum, trig_sums};
use crate::stencil;
use crate::symmetry::apply_generator;
use crate::transform::{leray_residual, ProfileTrajectory, ResidualTerms};

use super::basis::{Basis, Parity};
use super::mollify::eta_hat;

/// Smooth radial mask: one on `r ≤ inner`, zero on `r ≥ outer`, `C^∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMask {
    pub inner: f64,
    pub outer: f64,
    rule: Vec<(f64, f64)>,
}

fn j0(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

fn j1(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        x / 3.0 - x.powi(3) / 30.0
    } else {
        x.sin() / (x * x) - x.cos() / x
    }
}

impl DriftMask {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) {
            return Err(Error::config(format!("drift mask radii must satisfy 0 < inner < outer, got {inner}, {outer}")));
        }
        let cells = (outer / 0.05).ceil() as usize;
        let mut rule = Vec::with_capacity(cells * 16);
        for c in 0..cells {
            let a = outer * c as f64 / cells as f64;
            let b = outer * (c + 1) as f64 / cells as f64;
            rule.extend(gauss_legendre_on(16, a, b));
        }
        Ok(Self { inner, outer, rule })
    }

    /// Mask radii as fractions of the box half-width; the outer radius must
    /// stay inside the box.
    pub fn for_box(half_width: f64, inner_fraction: f64, outer_fraction: f64) -> Result<Self> {
        if outer_fraction >= 1.0 {
            return Err(Error::config("drift mask must vanish before the box faces (outer fraction < 1)"));
        }
        Self::new(inner_fraction * half_width, outer_fraction * half_width)
    }

    fn ramp(&self, r: f64) -> (f64, f64) {
        let width = self.outer - self.inner;
        let (t, dt) = smooth_transition((r - self.inner) / width);
        (t, dt / width)
    }

    pub fn value(&self, r: f64) -> f64 {
        1.0 - self.ramp(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        -self.ramp(r).1
    }

    /// `σ(r) = ¼(1 - m) - ¼ r m'(r)`.
    pub fn sponge(&self, r: f64) -> f64 {
        0.25 * (1.0 - self.value(r)) - 0.25 * r * self.derivative(r)
    }

    /// `M(ρ) = ∫ m(|y|) e^{iξ·y} dy` and `M'(ρ)` for `|ξ| = ρ`.
    pub fn transform(&self, rho: f64) -> (f64, f64) {
        let four_pi = 4.0 * std::f64::consts::PI;
        let mut m = 0.0;
        let mut dm = 0.0;
        for &(r, w) in &self.rule {
            let mv = self.value(r);
            if mv == 0.0 {
                continue;
            }
            m += w * four_pi * mv * r * r * j0(rho * r);
            dm -= w * four_pi * mv * r * r * r * j1(rho * r);
        }
        (m, dm)
    }
}

fn add3(a: [i64; 3], b: [i64; 3], sb: i64) -> [i64; 3] {
    [a[0] + sb * b[0], a[1] + sb * b[1], a[2] + sb * b[2]]
}

fn phase(basis: &Basis, i: usize) -> Complex64 {
    let (re, im) = basis.modes[i].phase();
    Complex64::new(re, im)
}

fn wavevector(basis: &Basis, m: [i64; 3]) -> Vec3 {
    let c = std::f64::consts::PI / basis.half_width;
    [m[0] as f64 * c, m[1] as f64 * c, m[2] as f64 * c]
}

/// `(D a_i, a_j)` with `D u = m(½u + ½y·∇u) - σu`, row-major `[i·k + j]`.
pub fn drift_matrix(basis: &Basis, mask: &DriftMask) -> Vec<f64> {
    let k = basis.len();
    let l3 = basis.half_width.powi(3);
    let n2 = basis.normalization * basis.normalization;
    let entries: Vec<f64> = (0..k * k)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / k, ij % k);
            let (mi, mj) = (&basis.modes[i], &basis.modes[j]);
            let pol = dot(mi.direction, mj.direction);
            if pol == 0.0 {
                return 0.0;
            }
            // X(ξ) = ½M + ½(κ_i·ξ)M'/ρ - I_σ(ξ), I_σ = 2L³δ_ξ0 + ½M + ¼ρM'
            let x = |m: [i64; 3]| -> f64 {
                let xi = wavevector(basis, m);
                let rho = dot(xi, xi).sqrt();
                let (mm, dm) = mask.transform(rho);
                let directional = if rho == 0.0 { 0.0 } else { dot(mi.kappa, xi) * dm / rho };
                let box_term = if rho == 0.0 { 2.0 * l3 } else { 0.0 };
                0.5 * mm + 0.5 * directional - box_term - 0.5 * mm - 0.25 * rho * dm
            };
            let (ci, cj) = (phase(basis, i), phase(basis, j));
            let plus = ci * cj * x(add3(mi.m, mj.m, 1));
            let minus = ci * cj.conj() * x(add3(mi.m, mj.m, -1));
            n2 * pol * 0.5 * (plus + minus).re
        })
        .collect();
    entries
}

/// `(Ja_i - m(Jy)·∇a_i, a_j)`, row-major.
pub fn rotation_matrix(basis: &Basis, mask: &DriftMask) -> Vec<f64> {
    let k = basis.len();
    let l3 = basis.half_width.powi(3);
    let n2 = basis.normalization * basis.normalization;
    (0..k * k)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / k, ij % k);
            let (mi, mj) = (&basis.modes[i], &basis.modes[j]);
            let (ci, cj) = (phase(basis, i), phase(basis, j));
            let mut total = 0.0;
            // (Ja_i, a_j) = (Je_i·e_j) 4L³ Re(c_i c̄_j) δ_{m_i m_j}
            if mi.m == mj.m {
                total += dot(apply_generator(mi.direction), mj.direction) * 4.0 * l3 * (ci * cj.conj()).re;
            }
            let pol = dot(mi.direction, mj.direction);
            if pol != 0.0 {
                // κ_i·(Jy) = (Jᵀκ_i)·y
                let g = [mi.kappa[1], -mi.kappa[0], 0.0];
                let p = |m: [i64; 3]| -> f64 {
                    let xi = wavevector(basis, m);
                    let rho = dot(xi, xi).sqrt();
                    if rho == 0.0 {
                        return 0.0;
                    }
                    dot(g, xi) * mask.transform(rho).1 / rho
                };
                let plus = ci * cj * p(add3(mi.m, mj.m, 1));
                let minus = ci * cj.conj() * p(add3(mi.m, mj.m, -1));
                total -= pol * 0.5 * (plus + minus).re;
            }
            n2 * total
        })
        .collect()
}

/// Nonzero entries `(i, l, j, B_ilj)` of `B_ilj = -((η_ε*a_i)·∇a_l, a_j)`.
pub fn trilinear_tensor(basis: &Basis, eps: f64) -> Vec<(u32, u32, u32, f64)> {
    let k = basis.len();
    let n3 = basis.normalization.powi(3);
    let l3 = basis.half_width.powi(3);
    let damping: Vec<f64> = basis.modes.iter().map(|m| eta_hat(eps * dot(m.kappa, m.kappa).sqrt())).collect();
    let rows: Vec<Vec<(u32, u32, u32, f64)>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            let mi = &basis.modes[i];
            let ci = phase(basis, i);
            for l in 0..k {
                let ml = &basis.modes[l];
                let coupling = dot(mi.direction, ml.kappa);
                if coupling == 0.0 {
                    continue;
                }
                let cl = phase(basis, l) * Complex64::new(0.0, 1.0);
                for j in 0..k {
                    let mj = &basis.modes[j];
                    let pol = dot(ml.direction, mj.direction);
                    if pol == 0.0 {
                        continue;
                    }
                    let cj = phase(basis, j);
                    let hit = |a: i64, b: i64, c: i64| {
                        (0..3).all(|d| a * mi.m[d] + b * ml.m[d] + c * mj.m[d] == 0)
                    };
                    let mut sum = Complex64::new(0.0, 0.0);
                    if hit(1, 1, 1) {
                        sum += ci * cl * cj;
                    }
                    if hit(1, 1, -1) {
                        sum += ci * cl * cj.conj();
                    }
                    if hit(1, -1, 1) {
                        sum += ci * cl.conj() * cj;
                    }
                    if hit(-1, 1, 1) {
                        sum += ci.conj() * cl * cj;
                    }
                    if sum.re == 0.0 {
                        continue;
                    }
                    // ∫ Re(X)Re(Y)Re(Z) = ¼ Re Σ, each exponential integrates to 8L³
                    let value = -damping[i] * coupling * pol * n3 * 2.0 * l3 * sum.re;
                    if value != 0.0 {
                        row.push((i as u32, l as u32, j as u32, value));
                    }
                }
            }
            row
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// `(f, a_j)` for every mode, by the trapezoidal rule on `f`'s grid.
pub fn project(basis: &Basis, field: &VectorField) -> Vec<f64> {
    let grid = field.grid;
    let specs: Vec<Vec<Complex64>> = (0..3).map(|d| to_spectrum(&grid, &field.comps[d])).collect();
    let h3 = grid.cell_volume();
    basis
        .modes
        .iter()
        .map(|mode| {
            let mut total = 0.0;
            for d in 0..3 {
                if mode.direction[d] == 0.0 {
                    continue;
                }
                let (c, s) = trig_sums(&grid, &specs[d], mode.m);
                total += mode.direction[d] * if mode.parity == Parity::Cos { c } else { s };
            }
            h3 * basis.normalization * total
        })
        .collect()
}

/// `-(a_i·∇V + V·∇a_i, a_j)` row-major, with `∇V` by finite differences.
pub fn coupling_matrix(basis: &Basis, v: &VectorField) -> Vec<f64> {
    let grid = v.grid;
    let k = basis.len();
    let jac = stencil::jacobian(v);
    let rows: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let mode = &basis.modes[i];
            let mut f = VectorField::zeros(grid);
            for idx in 0..grid.len() {
                let y = grid.point(idx);
                let a = basis.value(i, y);
                let vv = v.get(idx);
                let arg = dot(mode.kappa, y);
                let dtrig = match mode.parity {
                    Parity::Cos => -arg.sin(),
                    Parity::Sin => arg.cos(),
                };
                let transport = basis.normalization * dot(vv, mode.kappa) * dtrig;
                let mut out = [0.0; 3];
                for c in 0..3 {
                    out[c] = a[0] * jac[c][0][idx] + a[1] * jac[c][1][idx] + a[2] * jac[c][2][idx]
                        + transport * mode.direction[c];
                }
                f.set(idx, out);
            }
            project(basis, &f).into_iter().map(|x| -x).collect()
        })
        .collect();
    rows.concat()
}

/// `ℛ(W) = ∂_sW + α(JW - (Jy)·∇W) - ΔW - ½W - ½y·∇W + B·∇W + W·∇B + W·∇W`
/// at every `s` node.
pub fn cutoff_residual(w: &ProfileTrajectory, bfield: Option<&ProfileTrajectory>) -> Result<Vec<VectorField>> {
    let mut linear = leray_residual(w, ResidualTerms::Linear)?.momentum;
    if let Some(b) = bfield {
        if b.layout() != w.layout() {
            return Err(Error::config("background and mild profiles use different layouts"));
        }
    }
    for (k, out) in linear.iter_mut().enumerate() {
        let wk = &w.velocity[k];
        let jw = stencil::jacobian(wk);
        let total = match bfield {
            Some(b) => wk.add(&b.velocity[k]),
            None => wk.clone(),
        };
        let jb = bfield.map(|b| stencil::jacobian(&b.velocity[k]));
        for idx in 0..wk.len() {
            let tv = total.get(idx);
            let wv = wk.get(idx);
            let mut o = out.get(idx);
            for c in 0..3 {
                // (W + B)·∇W + W·∇B
                o[c] += tv[0] * jw[c][0][idx] + tv[1] * jw[c][1][idx] + tv[2] * jw[c][2][idx];
                if let Some(jb) = &jb {
                    o[c] += wv[0] * jb[c][0][idx] + wv[1] * jb[c][1][idx] + wv[2] * jb[c][2][idx];
                }
            }
            out.set(idx, o);
        }
    }
    Ok(linear)
}

/// Assembled system with `A(s)`, `C(s)` at `n_s` nodes, linear in between.
#[derive(Debug, Clone)]
pub struct GalerkinTensors {
    pub k: usize,
    pub period: f64,
    pub alpha: f64,
    pub eps: f64,
    /// `A_ij` per node, row-major.
    pub a: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub trilinear: Vec<(u32, u32, u32, f64)>,
    /// `-|κ_i|²`, the part handled by the integrating factor.
    pub stiff: Vec<f64>,
}

impl GalerkinTensors {
    pub fn n_s(&self) -> usize {
        self.a.len()
    }

    fn bracket(&self, s: f64) -> (usize, usize, f64) {
        let n = self.n_s();
        if n == 1 {
            return (0, 0, 0.0);
        }
        let f = (s / (self.period / n as f64)).rem_euclid(n as f64);
        let k0 = f.floor() as usize % n;
        (k0, (k0 + 1) % n, f - f.floor())
    }

    /// `A(s)` row-major, interpolated.
    pub fn a_at(&self, s: f64) -> Vec<f64> {
        let (p, q, w) = self.bracket(s);
        self.a[p].iter().zip(&self.a[q]).map(|(x, y)| (1.0 - w) * x + w * y).collect()
    }

    pub fn c_at(&self, s: f64) -> Vec<f64> {
        let (p, q, w) = self.bracket(s);
        self.c[p].iter().zip(&self.c[q]).map(|(x, y)| (1.0 - w) * x + w * y).collect()
    }

    /// `Σ_{i,l} B_ilj x_i x_l` into `out` (added).
    pub fn add_quadratic(&self, x: &[f64], out: &mut [f64]) {
        for &(i, l, j, v) in &self.trilinear {
            out[j as usize] += v * x[i as usize] * x[l as usize];
        }
    }

    /// `Σ B_ilj x_i x_l x_j`.
    pub fn trilinear_form(&self, x: &[f64]) -> f64 {
        let mut q = vec![0.0; self.k];
        self.add_quadratic(x, &mut q);
        q.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `½ d/ds ‖b‖² = bᵀA b + B(b,b,b) + C·b` along the flow.
    pub fn energy_rate(&self, s: f64, b: &[f64]) -> f64 {
        let mut rhs = vec![0.0; self.k];
        self.full_rhs(s, b, &mut rhs);
        rhs.iter().zip(b).map(|(r, x)| r * x).sum()
    }

    pub fn full_rhs(&self, s: f64, b: &[f64], out: &mut [f64]) {
        let a = self.a_at(s);
        let c = self.c_at(s);
        let k = self.k;
        for j in 0..k {
            let mut acc = c[j];
            for i in 0..k {
                acc += a[i * k + j] * b[i];
            }
            out[j] = acc;
        }
        self.add_quadratic(b, out);
    }

    /// `max_s max_j Σ_i |A_ij - stiff_j δ_ij|`.
    pub fn explicit_bound(&self) -> f64 {
        let k = self.k;
        let mut best: f64 = 0.0;
        for a in &self.a {
            for j in 0..k {
                let sum: f64 = (0..k)
                    .map(|i| {
                        let v = a[i * k + j] - if i == j { self.stiff[j] } else { 0.0 };
                        v.abs()
                    })
                    .sum();
                best = best.max(sum);
            }
        }
        best
    }

    /// Largest eigenvalue of the symmetric part of `A` over the nodes.
    pub fn max_symmetric_eigenvalue(&self) -> f64 {
        let k = self.k;
        self.a
            .iter()
            .map(|a| {
                let m = nalgebra::DMatrix::from_fn(k, k, |i, j| 0.5 * (a[i * k + j] + a[j * k + i]));
                m.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup_s |C(s)|`.
    pub fn forcing_norm(&self) -> f64 {
        self.c.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max)
    }
}

/// Inputs to [`assemble_tensors`].
pub struct Assembly<'a> {
    pub basis: &'a Basis,
    pub mask: &'a DriftMask,
    /// Cutoff field `W`, if any.
    pub cutoff: Option<&'a ProfileTrajectory>,
    /// Mild-solution profile `B`, if any.
    pub mild: Option<&'a ProfileTrajectory>,
    pub eps: f64,
    pub period: f64,
    pub alpha: f64,
}

pub fn assemble_tensors(input: &Assembly<'_>) -> Result<GalerkinTensors> {
    let basis = input.basis;
    let k = basis.len();
    let drift = drift_matrix(basis, input.mask);
    let rotation = if input.alpha != 0.0 {
        rotation_matrix(basis, input.mask)
    } else {
        vec![0.0; k * k]
    };
    let stiff: Vec<f64> = basis.modes.iter().map(|m| -m.wavenumber_squared()).collect();
    let mut base = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            base[i * k + j] = drift[i * k + j] - input.alpha * rotation[i * k + j];
        }
        base[i * k + i] += stiff[i];
    }
    let reference = input.cutoff.or(input.mild);
    let (a, c) = match reference {
        None => (vec![base], vec![vec![0.0; k]]),
        Some(r) => {
            let grid: Grid = r.grid;
            basis.check_grid(&grid)?;
            if let (Some(w), Some(b)) = (input.cutoff, input.mild) {
                if w.layout() != b.layout() {
                    return Err(Error::config("cutoff and mild profiles use different layouts"));
                }
            }
            if (r.period - input.period).abs() > 1e-12 * input.period.max(1.0) {
                return Err(Error::config("profile period differs from the Galerkin period"));
            }
            let residual = match input.cutoff {
                Some(w) => Some(cutoff_residual(w, input.mild)?),
                None => None,
            };
            let mut a_nodes = Vec::with_capacity(r.n_s());
            let mut c_nodes = Vec::with_capacity(r.n_s());
            for n in 0..r.n_s() {
                let mut v = VectorField::zeros(grid);
                if let Some(w) = input.cutoff {
                    v.axpy(1.0, &w.velocity[n]);
                }
                if let Some(b) = input.mild {
                    v.axpy(1.0, &b.velocity[n]);
                }
                let mut a = base.clone();
                if v.max_abs() > 0.0 {
                    for (x, y) in a.iter_mut().zip(coupling_matrix(basis, &v)) {
                        *x += y;
                    }
                }
                a_nodes.push(a);
                c_nodes.push(match &residual {
                    Some(res) => project(basis, &res[n]).into_iter().map(|x| -x).collect(),
                    None => vec![0.0; k],
                });
            }
            (a_nodes, c_nodes)
        }
    };
    Ok(GalerkinTensors {
        k,
        period: input.period,
        alpha: input.alpha,
        eps: input.eps,
        a,
        c,
        trilinear: trilinear_tensor(basis, input.eps),
        stiff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mask(l: f64) -> DriftMask {
        DriftMask::for_box(l, 0.6, 0.95).unwrap()
    }

    #[test]
    fn mask_transform_matches_cartesian_sum() {
        let l = 4.0;
        let m = mask(l);
        let grid = Grid::new(48, l).unwrap();
        let xi = [0.5, 0.25, 0.0];
        let rho = dot(xi, xi).sqrt();
        let mut direct = 0.0;
        for idx in 0..grid.len() {
            let y = grid.point(idx);
            direct += m.value(dot(y, y).sqrt()) * dot(xi, y).cos() * grid.cell_volume();
        }
        let (mm, _) = m.transform(rho);
        assert!((mm - direct).abs() < 1e-6 * mm.abs(), "{mm} {direct}");
        let h = 1e-4;
        let fd = (m.transform(rho + h).0 - m.transform(rho - h).0) / (2.0 * h);
        assert!((fd - m.transform(rho).1).abs() < 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn single_mode_entry_matches_hand_value() {
        let basis = Basis::new(4.0, 1).unwrap();
        let t = assemble_tensors(&Assembly {
            basis: &basis,
            mask: &mask(4.0),
            cutoff: None,
            mild: None,
            eps: 0.0,
            period: 1.0,
            alpha: 0.0,
        })
        .unwrap();
        let kappa2 = (std::f64::consts::PI / 4.0).powi(2);
        assert!((t.a[0][0] - (-kappa2 - 0.25)).abs() < 1e-8, "{}", t.a[0][0]);
        assert_eq!(t.c[0], vec![0.0]);
    }

    #[test]
    fn drift_matches_grid_quadrature() {
        let l = 3.0;
        let basis = Basis::new(l, 12).unwrap();
        let m = mask(l);
        let exact = drift_matrix(&basis, &m);
        let grid = Grid::new(64, l).unwrap();
        let k = basis.len();
        for i in 0..k {
            let a = VectorField::from_fn(grid, |y| basis.value(i, y));
            let jac = spectral::jacobian(&a);
            let mut d = VectorField::zeros(grid);
            for idx in 0..grid.len() {
                let y = grid.point(idx);
                let r = dot(y, y).sqrt();
                let (mv, sg) = (m.value(r), m.sponge(r));
                let av = a.get(idx);
                let mut o = [0.0; 3];
                for c in 0..3 {
                    let ydot = y[0] * jac[c][0][idx] + y[1] * jac[c][1][idx] + y[2] * jac[c][2][idx];
                    o[c] = mv * (0.5 * av[c] + 0.5 * ydot) - sg * av[c];
                }
                d.set(idx, o);
            }
            let row = project(&basis, &d);
            for j in 0..k {
                assert!((row[j] - exact[i * k + j]).abs() < 1e-4, "({i},{j}) {} {}", row[j], exact[i * k + j]);
            }
        }
    }

    #[test]
    fn drift_energy_is_minus_a_quarter() {
        let basis = Basis::new(4.0, 32).unwrap();
        let d = drift_matrix(&basis, &mask(4.0));
        let k = basis.len();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e: f64 = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| x[i] * d[i * k + j] * x[j]).sum();
        let n2: f64 = x.iter().map(|v| v * v).sum();
        assert!((e + 0.25 * n2).abs() < 1e-9 * n2, "{e} {n2}");
    }

    #[test]
    fn rotation_matches_grid_quadrature() {
        let l = 3.0;
        let basis = Basis::new(l, 12).unwrap();
        let m = mask(l);
        let exact = rotation_matrix(&basis, &m);
        let grid = Grid::new(64, l).unwrap();
        let k = basis.len();
        for i in 0..k {
            let a = VectorField::from_fn(grid, |y| basis.value(i, y));
            let jac = spectral::jacobian(&a);
            let mut d = VectorField::zeros(grid);
            for idx in 0..grid.len() {
                let y = grid.point(idx);
                let mv = m.value(dot(y, y).sqrt());
                let jy = apply_generator(y);
                let ja = apply_generator(a.get(idx));
                let mut o = [0.0; 3];
                for c in 0..3 {
                    o[c] = ja[c] - mv * (jy[0] * jac[c][0][idx] + jy[1] * jac[c][1][idx] + jy[2] * jac[c][2][idx]);
                }
                d.set(idx, o);
            }
            let row = project(&basis, &d);
            for j in 0..k {
                assert!((row[j] - exact[i * k + j]).abs() < 1e-4, "({i},{j}) {} {}", row[j], exact[i * k + j]);
            }
        }
    }

    #[test]
    fn rotation_is_energy_neutral() {
        let basis = Basis::new(4.0, 24).unwrap();
        let r = rotation_matrix(&basis, &mask(4.0));
        let k = basis.len();
        for i in 0..k {
            for j in 0..k {
                assert!((r[i * k + j] + r[j * k + i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trilinear_is_antisymmetric() {
        let basis = Basis::new(4.0, 48).unwrap();
        let tensor = trilinear_tensor(&basis, 0.1);
        assert!(!tensor.is_empty());
        let k = basis.len();
        let mut dense = vec![0.0; k * k * k];
        for &(i, l, j, v) in &tensor {
            dense[(i as usize * k + l as usize) * k + j as usize] = v;
        }
        for i in 0..k {
            for l in 0..k {
                for j in 0..k {
                    let a = dense[(i * k + l) * k + j];
                    let b = dense[(i * k + j) * k + l];
                    assert!((a + b).abs() < 1e-12);
                }
            }
        }
        let t = GalerkinTensors {
            k,
            period: 1.0,
            alpha: 0.0,
            eps: 0.1,
            a: vec![vec![0.0; k * k]],
            c: vec![vec![0.0; k]],
            trilinear: tensor,
            stiff: vec![0.0; k],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(t.trilinear_form(&x).abs() < 1e-10);
        }
    }

    #[test]
    fn trilinear_matches_grid_quadrature() {
        let l = 2.0;
        let basis = Basis::new(l, 16).unwrap();
        let tensor = trilinear_tensor(&basis, 0.0);
        let grid = Grid::new(16, l).unwrap();
        let k = basis.len();
        let fields: Vec<VectorField> = (0..k).map(|i| VectorField::from_fn(grid, |y| basis.value(i, y))).collect();
        let mut dense = vec![0.0; k * k * k];
        for &(i, l, j, v) in &tensor {
            dense[(i as usize * k + l as usize) * k + j as usize] = v;
        }
        for i in 0..k {
            for l in 0..k {
                let jac = spectral::jacobian(&fields[l]);
                let mut f = VectorField::zeros(grid);
                for idx in 0..grid.len() {
                    let a = fields[i].get(idx);
                    let mut o = [0.0; 3];
                    for c in 0..3 {
                        o[c] = -(a[0] * jac[c][0][idx] + a[1] * jac[c][1][idx] + a[2] * jac[c][2][idx]);
                    }
                    f.set(idx, o);
                }
                for (j, v) in project(&basis, &f).into_iter().enumerate() {
                    assert!((v - dense[(i * k + l) * k + j]).abs() < 1e-12);
                }
            }
        }
    }
}
