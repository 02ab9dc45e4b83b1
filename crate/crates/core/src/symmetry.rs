//! Scaling and rotation symmetries about the `x₃` axis.
//!
//! A field is discretely self-similar with factor `λ` and phase `φ` when
//! `v(x,t) = λ R(-φ) v(λ R(φ) x, λ² t)`; with `φ = 0` this is plain DSS, and
//! holding for every `λ` (with `φ = 2α log λ`) gives the continuous classes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{norm, Grid, Interp, Vec3, VectorField};
use crate::transform::{PhysicalField, Slice};

pub type Mat3 = [[f64; 3]; 3];

/// Generator of rotations about `x₃`: `dR/ds = J R`.
pub const GENERATOR: Mat3 = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];

/// Factor used when a continuous class is checked through one discrete map.
pub const CONTINUOUS_TEST_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryKind {
    SS,
    DSS,
    RSS,
    RDSS,
}

impl SymmetryKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ss" => Some(Self::SS),
            "dss" => Some(Self::DSS),
            "rss" => Some(Self::RSS),
            "rdss" => Some(Self::RDSS),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SS => "ss",
            Self::DSS => "dss",
            Self::RSS => "rss",
            Self::RDSS => "rdss",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::DSS | Self::RDSS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetrySpec {
    pub kind: SymmetryKind,
    /// Scale factor; only meaningful for the discrete classes.
    pub lambda: f64,
    /// Angular speed per unit log-time (RSS).
    pub alpha: f64,
    /// Phase per period (RDSS).
    pub phi: f64,
}

impl SymmetrySpec {
    pub fn ss() -> Self {
        Self {
            kind: SymmetryKind::SS,
            lambda: CONTINUOUS_TEST_FACTOR,
            alpha: 0.0,
            phi: 0.0,
        }
    }

    pub fn dss(lambda: f64) -> Self {
        Self {
            kind: SymmetryKind::DSS,
            lambda,
            alpha: 0.0,
            phi: 0.0,
        }
    }

    pub fn rss(alpha: f64) -> Self {
        Self {
            kind: SymmetryKind::RSS,
            lambda: CONTINUOUS_TEST_FACTOR,
            alpha,
            phi: 0.0,
        }
    }

    pub fn rdss(lambda: f64, phi: f64) -> Self {
        Self {
            kind: SymmetryKind::RDSS,
            lambda,
            alpha: 0.0,
            phi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SymmetryKind::DSS | SymmetryKind::RDSS if !(self.lambda > 1.0 && self.lambda.is_finite()) => {
                Err(Error::config(format!(
                    "{} symmetry needs lambda > 1, got {}",
                    self.kind.name(),
                    self.lambda
                )))
            }
            SymmetryKind::RDSS if !self.phi.is_finite() => Err(Error::config("rdss phase must be finite")),
            SymmetryKind::RSS if !self.alpha.is_finite() => Err(Error::config("rss angular speed must be finite")),
            SymmetryKind::DSS if self.phi != 0.0 || self.alpha != 0.0 => {
                Err(Error::config("dss symmetry takes no rotation; use rdss"))
            }
            SymmetryKind::SS if self.phi != 0.0 || self.alpha != 0.0 => {
                Err(Error::config("ss symmetry takes no rotation; use rss"))
            }
            _ => Ok(()),
        }
    }

    /// Log-time period `T = 2 log λ` of the profile.
    pub fn period(&self) -> f64 {
        2.0 * self.lambda.ln()
    }

    /// The `(λ, φ)` pair actually tested: the continuous classes are
    /// restricted to `λ = self.lambda` with `φ = 2α log λ`.
    pub fn discrete_pair(&self) -> (f64, f64) {
        match self.kind {
            SymmetryKind::SS | SymmetryKind::DSS => (self.lambda, 0.0),
            SymmetryKind::RSS => (self.lambda, 2.0 * self.alpha * self.lambda.ln()),
            SymmetryKind::RDSS => (self.lambda, self.phi),
        }
    }

    /// Restriction of a continuous class to factor `lambda`.
    pub fn restricted(&self, lambda: f64) -> SymmetrySpec {
        match self.kind {
            SymmetryKind::SS => SymmetrySpec::dss(lambda),
            SymmetryKind::RSS => SymmetrySpec::rdss(lambda, 2.0 * self.alpha * lambda.ln()),
            _ => *self,
        }
    }

    /// Frame angular speed `α = φ/T` for the profile equation.
    pub fn frame_speed(&self) -> f64 {
        match self.kind {
            SymmetryKind::SS | SymmetryKind::DSS => 0.0,
            SymmetryKind::RSS => self.alpha,
            SymmetryKind::RDSS => self.phi / self.period(),
        }
    }

    /// All angular speeds compatible with an RDSS phase:
    /// `α_k = (2kπ + φ)/T`.
    pub fn compatible_speed(&self, k: i32) -> f64 {
        (2.0 * PI * k as f64 + self.discrete_pair().1) / self.period()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationFrame {
    pub angle: f64,
    pub matrix: Mat3,
}

impl RotationFrame {
    pub fn new(angle: f64) -> Self {
        Self {
            angle,
            matrix: rotation_matrix(angle),
        }
    }

    pub fn generator(&self) -> Mat3 {
        GENERATOR
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        mat_vec(&self.matrix, v)
    }
}

pub fn rotation_matrix(s: f64) -> Mat3 {
    let (sn, c) = s.sin_cos();
    [[c, -sn, 0.0], [sn, c, 0.0], [0.0, 0.0, 1.0]]
}

#[inline]
pub fn rotate(s: f64, v: Vec3) -> Vec3 {
    if s == 0.0 {
        return v;
    }
    let (sn, c) = s.sin_cos();
    [c * v[0] - sn * v[1], sn * v[0] + c * v[1], v[2]]
}

#[inline]
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// `J v = (-v₂, v₁, 0)`.
#[inline]
pub fn apply_generator(v: Vec3) -> Vec3 {
    [-v[1], v[0], 0.0]
}

/// `λ R(-φ) v(λ R(φ) x, λ² t)` sampled on the layout of `v` itself.
pub fn apply_similarity_symmetry(v: &PhysicalField, lambda: f64, phi: f64) -> Result<PhysicalField> {
    apply_similarity_symmetry_on(v, lambda, phi, &v.layout())
}

/// As [`apply_similarity_symmetry`], sampled on an explicit target layout.
pub fn apply_similarity_symmetry_on(
    v: &PhysicalField,
    lambda: f64,
    phi: f64,
    target: &[crate::transform::SliceLayout],
) -> Result<PhysicalField> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("scale factor must be positive, got {lambda}")));
    }
    let mut slices = Vec::with_capacity(target.len());
    for lay in target {
        let mut vel = VectorField::zeros(lay.grid);
        let mut pre = crate::grid::ScalarField::zeros(lay.grid);
        for idx in 0..lay.grid.len() {
            let x = lay.position(idx);
            let image = scale3(rotate(phi, x), lambda);
            let (u, p) = v.sample(image, lambda * lambda * lay.t)?;
            vel.set(idx, scale3(rotate(-phi, u), lambda));
            pre.data[idx] = lambda * lambda * p;
        }
        slices.push(Slice {
            t: lay.t,
            grid: lay.grid,
            angle: lay.angle,
            velocity: vel,
            pressure: pre,
        });
    }
    PhysicalField::new(slices)
}

#[inline]
fn scale3(v: Vec3, c: f64) -> Vec3 {
    [v[0] * c, v[1] * c, v[2] * c]
}

/// Relative L² defect `‖v - λR(-φ)v(λR(φ)·, λ²·)‖ / ‖v‖`, taken over all
/// nodes whose image lies inside the sampled domain.
pub fn symmetry_defect(v: &PhysicalField, spec: &SymmetrySpec) -> Result<f64> {
    spec.validate()?;
    let (lambda, phi) = spec.discrete_pair();
    let mut diff = 0.0;
    let mut base = 0.0;
    for slice in &v.slices {
        let h3 = slice.grid.cell_volume();
        for idx in 0..slice.grid.len() {
            let x = slice.position(idx);
            let image = scale3(rotate(phi, x), lambda);
            let Ok((u, _)) = v.sample(image, lambda * lambda * slice.t) else {
                continue;
            };
            let w = scale3(rotate(-phi, u), lambda);
            let here = slice.velocity.get(idx);
            for d in 0..3 {
                diff += (here[d] - w[d]).powi(2) * h3;
                base += here[d] * here[d] * h3;
            }
        }
    }
    Ok(diff.sqrt() / base.sqrt().max(1e-30))
}

/// Defect of initial data on a single grid: compares `v(x)` with
/// `λR(-φ)v(λR(φ)x)` at nodes whose image stays in the box.
pub fn data_symmetry_defect(v0: &VectorField, spec: &SymmetrySpec) -> Result<f64> {
    spec.validate()?;
    let (lambda, phi) = spec.discrete_pair();
    let grid = v0.grid;
    let mut diff = 0.0;
    let mut base = 0.0;
    for idx in 0..grid.len() {
        let x = grid.point(idx);
        let image = scale3(rotate(phi, x), lambda);
        let Some(u) = v0.interpolate(image, Interp::Linear) else {
            continue;
        };
        let w = scale3(rotate(-phi, u), lambda);
        let here = v0.get(idx);
        for d in 0..3 {
            diff += (here[d] - w[d]).powi(2);
            base += here[d] * here[d];
        }
    }
    Ok(diff.sqrt() / base.sqrt().max(1e-30))
}

/// Samples of initial data on a fundamental domain.
///
/// Sphere data stores the profile `σ` at cell-centred colatitudes and
/// uniform longitudes. Annulus data stores `|x| v₀(x)` on `1 ≤ |x| < λ`
/// with log-uniform radii, so power-law data is represented exactly in the
/// radial direction.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalDomainData {
    pub shape: DomainShape,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Values ordered `(radius, theta, phi)` with `phi` fastest.
    pub values: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainShape {
    Sphere,
    Annulus { n_r: usize, lambda: f64 },
}

impl FundamentalDomainData {
    pub fn n_radial(&self) -> usize {
        match self.shape {
            DomainShape::Sphere => 1,
            DomainShape::Annulus { n_r, .. } => n_r,
        }
    }

    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * PI / self.n_theta as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    pub fn radius(&self, r: usize) -> f64 {
        match self.shape {
            DomainShape::Sphere => 1.0,
            DomainShape::Annulus { n_r, lambda } => lambda.powf(r as f64 / n_r as f64),
        }
    }

    /// Tabulate the profile `σ(x̂)` on the sphere.
    pub fn sphere(n_theta: usize, n_phi: usize, sigma: impl Fn(Vec3) -> Vec3) -> Self {
        let mut data = Self {
            shape: DomainShape::Sphere,
            n_theta,
            n_phi,
            values: Vec::with_capacity(n_theta * n_phi),
        };
        for i in 0..n_theta {
            for j in 0..n_phi {
                let dir = direction(data.theta(i), data.phi(j));
                data.values.push(sigma(dir));
            }
        }
        data
    }

    /// Tabulate `v₀` on the annulus `1 ≤ |x| < λ`.
    pub fn annulus(lambda: f64, n_r: usize, n_theta: usize, n_phi: usize, v0: impl Fn(Vec3) -> Vec3) -> Self {
        let mut data = Self {
            shape: DomainShape::Annulus { n_r, lambda },
            n_theta,
            n_phi,
            values: Vec::with_capacity(n_r * n_theta * n_phi),
        };
        for r in 0..n_r {
            let rad = data.radius(r);
            for i in 0..n_theta {
                for j in 0..n_phi {
                    let x = scale3(direction(data.theta(i), data.phi(j)), rad);
                    data.values.push(scale3(v0(x), rad));
                }
            }
        }
        data
    }

    fn node(&self, r: usize, i: usize, j: usize) -> Vec3 {
        self.values[(r * self.n_theta + i) * self.n_phi + j]
    }

    /// Bilinear interpolation on shell `r` at direction `dir`; rows beyond
    /// a pole continue on the opposite meridian.
    fn on_shell(&self, r: usize, dir: Vec3) -> Vec3 {
        let theta = dir[2].clamp(-1.0, 1.0).acos();
        let phi = dir[1].atan2(dir[0]).rem_euclid(2.0 * PI);
        let ft = theta * self.n_theta as f64 / PI - 0.5;
        let i0 = ft.floor() as i64;
        let wt = ft - i0 as f64;
        let lower = self.on_row(r, i0, phi);
        let upper = self.on_row(r, i0 + 1, phi);
        let mut out = [0.0; 3];
        for d in 0..3 {
            out[d] = (1.0 - wt) * lower[d] + wt * upper[d];
        }
        out
    }

    fn on_row(&self, r: usize, i: i64, phi: f64) -> Vec3 {
        let nt = self.n_theta as i64;
        let (row, phi) = if i < 0 {
            (0, phi + PI)
        } else if i >= nt {
            (self.n_theta - 1, phi + PI)
        } else {
            (i as usize, phi)
        };
        let fp = phi.rem_euclid(2.0 * PI) * self.n_phi as f64 / (2.0 * PI);
        let j0 = (fp.floor() as usize) % self.n_phi;
        let j1 = (j0 + 1) % self.n_phi;
        let wp = fp - fp.floor();
        let (a, b) = (self.node(r, row, j0), self.node(r, row, j1));
        [
            (1.0 - wp) * a[0] + wp * b[0],
            (1.0 - wp) * a[1] + wp * b[1],
            (1.0 - wp) * a[2] + wp * b[2],
        ]
    }
}

#[inline]
fn direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Value of the extended field at `x`; `Ok(None)` marks the singular origin.
pub fn extended_value(
    data: &FundamentalDomainData,
    spec: &SymmetrySpec,
    x: Vec3,
    max_applications: u32,
) -> Result<Vec3> {
    let r = norm(x);
    if r == 0.0 {
        return Ok([0.0; 3]);
    }
    match data.shape {
        DomainShape::Sphere => {
            if spec.kind.is_discrete() {
                return Err(Error::config("sphere data extends only continuous (ss/rss) classes"));
            }
            let angle = 2.0 * spec.alpha * r.ln();
            let dir = scale3(rotate(-angle, x), 1.0 / r);
            Ok(scale3(rotate(angle, data.on_shell(0, dir)), 1.0 / r))
        }
        DomainShape::Annulus { n_r, lambda } => {
            if (spec.lambda - lambda).abs() > 1e-12 * lambda {
                return Err(Error::config(format!(
                    "annulus tabulated for lambda = {lambda} but spec has lambda = {}",
                    spec.lambda
                )));
            }
            let (_, phi) = spec.discrete_pair();
            let k = (r.ln() / lambda.ln()).floor();
            if k.abs() > max_applications as f64 {
                return Err(Error::Range(format!(
                    "point at |x| = {r:e} needs {k} symmetry applications (limit {max_applications})"
                )));
            }
            let k = k as i32;
            // pull back into the annulus: x_f = λ^{-k} R(-kφ) x
            let xf = scale3(rotate(-(k as f64) * phi, x), lambda.powi(-k));
            let rf = norm(xf);
            let fr = (rf.ln() / lambda.ln() * n_r as f64).clamp(0.0, n_r as f64);
            let r0 = (fr.floor() as usize).min(n_r - 1);
            let w = fr - r0 as f64;
            let dir = scale3(xf, 1.0 / rf);
            let lower = data.on_shell(r0, dir);
            let upper = if r0 + 1 < n_r {
                data.on_shell(r0 + 1, dir)
            } else {
                // shell n_r is the image of shell 0 under the symmetry
                rotate(phi, data.on_shell(0, rotate(-phi, dir)))
            };
            let mut nv = [0.0; 3];
            for d in 0..3 {
                nv[d] = (1.0 - w) * lower[d] + w * upper[d];
            }
            // nv approximates |x_f| v(x_f); map back to x
            let v_f = scale3(nv, 1.0 / rf);
            Ok(scale3(rotate(k as f64 * phi, v_f), lambda.powi(-k)))
        }
    }
}

/// Extend fundamental-domain data to every node of `target`.
pub fn extend_from_fundamental_domain(
    data: &FundamentalDomainData,
    spec: &SymmetrySpec,
    target: &Grid,
    max_applications: u32,
) -> Result<VectorField> {
    spec.validate()?;
    let mut out = VectorField::zeros(*target);
    for idx in 0..target.len() {
        out.set(idx, extended_value(data, spec, target.point(idx), max_applications)?);
    }
    Ok(out)
}

/// Extend a spacetime field known on one cell `1 ≤ t < λ²` to the periods
/// `k ∈ periods`. Each slice at `t` is copied to `λ^{2k} t` with its grid
/// scaled by `λ^k`, its frame rotated by `kφ`, velocity scaled by `λ^{-k}`
/// and pressure by `λ^{-2k}`; no interpolation is involved.
pub fn extend_spacetime_cell(
    cell: &PhysicalField,
    spec: &SymmetrySpec,
    periods: std::ops::Range<i32>,
    max_applications: u32,
) -> Result<PhysicalField> {
    spec.validate()?;
    let (lambda, phi) = spec.discrete_pair();
    let mut slices = Vec::new();
    for k in periods {
        if k.unsigned_abs() > max_applications {
            return Err(Error::Range(format!(
                "period {k} exceeds the limit of {max_applications} symmetry applications"
            )));
        }
        let scale = lambda.powi(k);
        for s in &cell.slices {
            let grid = Grid::new(s.grid.n(), s.grid.half_width() * scale)?;
            let mut velocity = VectorField::zeros(grid);
            for idx in 0..grid.len() {
                velocity.set(idx, scale3(rotate(k as f64 * phi, s.velocity.get(idx)), 1.0 / scale));
            }
            let mut pressure = s.pressure.clone();
            pressure.grid = grid;
            pressure.data.iter_mut().for_each(|p| *p /= scale * scale);
            slices.push(Slice {
                t: s.t * scale * scale,
                grid,
                angle: s.angle + k as f64 * phi,
                velocity,
                pressure,
            });
        }
    }
    PhysicalField::new(slices)
}
