//! Run configuration: flat `key = value` text with dotted section keys.
//!
//! Blank lines and lines starting with `#` are ignored. Every key has a
//! default, so an empty file is a valid configuration for the zero-data run.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::galerkin::{Basis, GalerkinOptions};
use crate::grid::Grid;
use crate::linear::MildOptions;
use crate::symmetry::{SymmetryKind, SymmetrySpec};
use crate::transform::ProfileLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Zero,
    Swirl,
    Radial,
    Tabulated,
}

impl ProfileKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "zero" => Self::Zero,
            "swirl" => Self::Swirl,
            "radial" => Self::Radial,
            "tabulated" => Self::Tabulated,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Swirl => "swirl",
            Self::Radial => "radial",
            Self::Tabulated => "tabulated",
        }
    }
}

/// How `v₀` is divided between the Galerkin and mild-solution paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Truncate the profile so that `b₀` is small in the critical Besov norm.
    Auto,
    /// `a₀ = v₀`, `b₀ = 0`.
    Galerkin,
    /// `a₀ = 0`, `b₀ = v₀`.
    Mild,
}

impl SplitMode {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "auto" => Self::Auto,
            "galerkin" => Self::Galerkin,
            "mild" => Self::Mild,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Galerkin => "galerkin",
            Self::Mild => "mild",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub profile: ProfileKind,
    pub amplitude: f64,
    pub gamma: f64,
    pub modulation: f64,
    pub lambda: f64,
    /// Fundamental-domain samples for tabulated data.
    pub file: Option<PathBuf>,
    /// Symmetry class of tabulated data; closed forms carry their own.
    pub symmetry: SymmetryKind,
    pub alpha: f64,
    pub phi: f64,
    /// Integrability index of the Besov space used for splitting.
    pub p: f64,
    /// Smallness threshold for `b₀`; `None` starts at [`AUTO_SPLIT_EPS`] and
    /// halves until the mild iteration converges.
    pub eps: Option<f64>,
    pub split: SplitMode,
}

pub const AUTO_SPLIT_EPS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    pub local_energy: bool,
    pub apriori: bool,
    pub rates: bool,
    /// Number of periods of the physical solution reconstructed for checks.
    pub periods: usize,
    pub c0: f64,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k: Vec<usize>,
    pub eps_moll: Vec<f64>,
    pub grid: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub data: DataConfig,
    pub grid_n: usize,
    pub half_width: f64,
    pub s_nodes: usize,
    /// Smallness `‖W‖_{L^∞_s L^q} ≤ α` of the cutoff field.
    pub w_alpha: f64,
    pub w_q: f64,
    pub mild: MildOptions,
    pub galerkin: GalerkinOptions,
    pub diagnostics: DiagnosticsConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output: None,
            data: DataConfig {
                profile: ProfileKind::Zero,
                amplitude: 0.0,
                gamma: 0.0,
                modulation: 0.0,
                lambda: 2.0,
                file: None,
                symmetry: SymmetryKind::SS,
                alpha: 0.0,
                phi: 0.0,
                p: 4.0,
                eps: None,
                split: SplitMode::Auto,
            },
            grid_n: 32,
            half_width: 8.0,
            s_nodes: 4,
            w_alpha: 0.5,
            w_q: 4.0,
            mild: MildOptions::default(),
            galerkin: GalerkinOptions::default(),
            diagnostics: DiagnosticsConfig {
                local_energy: true,
                apriori: true,
                rates: true,
                periods: 2,
                c0: crate::diagnostics::DEFAULT_C0,
                radii: vec![1.0, 2.0, 3.0],
            },
            sweep: SweepConfig {
                k: vec![16, 32, 64],
                eps_moll: vec![0.2, 0.1, 0.05],
                grid: vec![16, 32, 64],
            },
        }
    }
}

fn list<T: std::str::FromStr>(v: &str) -> Option<Vec<T>> {
    v.split(',').map(|x| x.trim().parse().ok()).collect()
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Parses and validates configuration text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line_no = number + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: line_no,
                    key: line.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            cfg.set(key, value).map_err(|message| Error::Parse {
                line: line_no,
                key: key.to_string(),
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override and revalidates.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("override `{assignment}` is not key=value")))?;
        let key = key.trim();
        self.set(key, value.trim())
            .map_err(|message| Error::Argument(format!("override `{key}`: {message}")))?;
        self.validate()
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse `{v}`"))
        }
        fn flag(v: &str) -> std::result::Result<bool, String> {
            match v {
                "true" | "yes" | "on" => Ok(true),
                "false" | "no" | "off" => Ok(false),
                _ => Err(format!("expected a boolean, got `{v}`")),
            }
        }
        fn nums<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
            list(v).ok_or_else(|| format!("cannot parse list `{v}`"))
        }
        let d = &mut self.data;
        let g = &mut self.galerkin;
        match key {
            "seed" => self.seed = num(value)?,
            "output.dir" => self.output = Some(PathBuf::from(value)),
            "data.profile" => d.profile = ProfileKind::parse(value).ok_or(format!("unknown profile `{value}`"))?,
            "data.amplitude" => d.amplitude = num(value)?,
            "data.gamma" => d.gamma = num(value)?,
            "data.modulation" => d.modulation = num(value)?,
            "data.lambda" => d.lambda = num(value)?,
            "data.file" => d.file = Some(PathBuf::from(value)),
            "data.symmetry" => d.symmetry = SymmetryKind::parse(value).ok_or(format!("unknown symmetry `{value}`"))?,
            "data.alpha" => d.alpha = num(value)?,
            "data.phi" => d.phi = num(value)?,
            "data.p" => d.p = num(value)?,
            "data.eps" => d.eps = if value == "auto" { None } else { Some(num(value)?) },
            "data.split" => d.split = SplitMode::parse(value).ok_or(format!("unknown split mode `{value}`"))?,
            "grid.n" => self.grid_n = num(value)?,
            "grid.half_width" => self.half_width = num(value)?,
            "time.s_nodes" => self.s_nodes = num(value)?,
            "background.alpha" => self.w_alpha = num(value)?,
            "background.q" => self.w_q = num(value)?,
            "mild.tol" => self.mild.tol = num(value)?,
            "mild.max_iter" => self.mild.max_iter = num(value)?,
            "mild.quad_nodes" => self.mild.quad_nodes = num(value)?,
            "mild.cells" => self.mild.cells = num(value)?,
            "solver.modes" => g.modes = num(value)?,
            "solver.eps_moll" => g.eps = num(value)?,
            "solver.dt" => g.dt_max = num(value)?,
            "solver.mask_inner" => g.mask_inner = num(value)?,
            "solver.mask_outer" => g.mask_outer = num(value)?,
            "solver.probes" => g.probes = num(value)?,
            "fixed_point.tol" => g.fixed_point.tol = num(value)?,
            "fixed_point.max_iter" => g.fixed_point.max_iter = num(value)?,
            "fixed_point.damping" => g.fixed_point.damping = num(value)?,
            "fixed_point.window" => g.fixed_point.window = num(value)?,
            "diagnostics.local_energy" => self.diagnostics.local_energy = flag(value)?,
            "diagnostics.apriori" => self.diagnostics.apriori = flag(value)?,
            "diagnostics.rates" => self.diagnostics.rates = flag(value)?,
            "diagnostics.periods" => self.diagnostics.periods = num(value)?,
            "diagnostics.c0" => self.diagnostics.c0 = num(value)?,
            "diagnostics.radii" => self.diagnostics.radii = nums(value)?,
            "sweep.k" => self.sweep.k = nums(value)?,
            "sweep.eps_moll" => self.sweep.eps_moll = nums(value)?,
            "sweep.grid" => self.sweep.grid = nums(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !self.grid_n.is_power_of_two() || self.grid_n < 8 {
            return bad(format!("grid.n must be a power of two and at least 8, got {}", self.grid_n));
        }
        let grid = self.grid()?;
        if self.s_nodes == 0 {
            return bad("time.s_nodes must be positive".into());
        }
        let positive = [
            ("mild.tol", self.mild.tol),
            ("solver.eps_moll", self.galerkin.eps),
            ("solver.dt", self.galerkin.dt_max),
            ("fixed_point.tol", self.galerkin.fixed_point.tol),
            ("fixed_point.damping", self.galerkin.fixed_point.damping),
            ("diagnostics.c0", self.diagnostics.c0),
            ("background.q", self.w_q),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(eps) = self.data.eps {
            if !(eps > 0.0) {
                return bad(format!("data.eps must be positive or `auto`, got {eps}"));
            }
        }
        if !(self.w_alpha > 0.0 && self.w_alpha < 1.0) {
            return bad(format!("background.alpha must lie in (0, 1), got {}", self.w_alpha));
        }
        if self.galerkin.fixed_point.damping > 1.0 {
            return bad("fixed_point.damping must not exceed 1".into());
        }
        if self.data.profile == ProfileKind::Tabulated && self.data.file.is_none() {
            return bad("tabulated data needs data.file".into());
        }
        if self.diagnostics.periods == 0 {
            return bad("diagnostics.periods must be positive".into());
        }
        self.symmetry()?;
        Basis::new(self.half_width, self.galerkin.modes)?.check_grid(&grid)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n, self.half_width)
    }

    /// Symmetry class of the configured data.
    pub fn symmetry(&self) -> Result<SymmetrySpec> {
        let d = &self.data;
        let spec = match d.profile {
            ProfileKind::Swirl if d.modulation != 0.0 => SymmetrySpec::dss(d.lambda),
            ProfileKind::Zero | ProfileKind::Swirl | ProfileKind::Radial => SymmetrySpec::ss(),
            ProfileKind::Tabulated => match d.symmetry {
                SymmetryKind::SS => SymmetrySpec::ss(),
                SymmetryKind::DSS => SymmetrySpec::dss(d.lambda),
                SymmetryKind::RSS => SymmetrySpec::rss(d.alpha),
                SymmetryKind::RDSS => SymmetrySpec::rdss(d.lambda, d.phi),
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn layout(&self) -> Result<ProfileLayout> {
        Ok(ProfileLayout {
            grid: self.grid()?,
            period: self.symmetry()?.period(),
            n_s: self.s_nodes,
        })
    }

    /// Canonical text form; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let d = &self.data;
        let g = &self.galerkin;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("seed", self.seed.to_string());
        if let Some(o) = &self.output {
            put("output.dir", o.display().to_string());
        }
        put("data.profile", d.profile.name().into());
        put("data.amplitude", format!("{:?}", d.amplitude));
        put("data.gamma", format!("{:?}", d.gamma));
        put("data.modulation", format!("{:?}", d.modulation));
        put("data.lambda", format!("{:?}", d.lambda));
        if let Some(f) = &d.file {
            put("data.file", f.display().to_string());
        }
        put("data.symmetry", d.symmetry.name().into());
        put("data.alpha", format!("{:?}", d.alpha));
        put("data.phi", format!("{:?}", d.phi));
        put("data.p", format!("{:?}", d.p));
        put("data.eps", d.eps.map_or("auto".into(), |e| format!("{e:?}")));
        put("data.split", d.split.name().into());
        put("grid.n", self.grid_n.to_string());
        put("grid.half_width", format!("{:?}", self.half_width));
        put("time.s_nodes", self.s_nodes.to_string());
        put("background.alpha", format!("{:?}", self.w_alpha));
        put("background.q", format!("{:?}", self.w_q));
        put("mild.tol", format!("{:?}", self.mild.tol));
        put("mild.max_iter", self.mild.max_iter.to_string());
        put("mild.quad_nodes", self.mild.quad_nodes.to_string());
        put("mild.cells", self.mild.cells.to_string());
        put("solver.modes", g.modes.to_string());
        put("solver.eps_moll", format!("{:?}", g.eps));
        put("solver.dt", format!("{:?}", g.dt_max));
        put("solver.mask_inner", format!("{:?}", g.mask_inner));
        put("solver.mask_outer", format!("{:?}", g.mask_outer));
        put("solver.probes", g.probes.to_string());
        put("fixed_point.tol", format!("{:?}", g.fixed_point.tol));
        put("fixed_point.max_iter", g.fixed_point.max_iter.to_string());
        put("fixed_point.damping", format!("{:?}", g.fixed_point.damping));
        put("fixed_point.window", g.fixed_point.window.to_string());
        let diag = &self.diagnostics;
        put("diagnostics.local_energy", diag.local_energy.to_string());
        put("diagnostics.apriori", diag.apriori.to_string());
        put("diagnostics.rates", diag.rates.to_string());
        put("diagnostics.periods", diag.periods.to_string());
        put("diagnostics.c0", format!("{:?}", diag.c0));
        put("diagnostics.radii", join(&diag.radii));
        put("sweep.k", join(&self.sweep.k));
        put("sweep.eps_moll", join(&self.sweep.eps_moll));
        put("sweep.grid", join(&self.sweep.grid));
        out
    }
}
