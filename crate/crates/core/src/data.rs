//! Initial data families of degree `-1` and their heat flows.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::grid::{norm, Grid, Vec3, VectorField};
use crate::special::heat_factor;
use crate::symmetry::{extended_value, FundamentalDomainData, SymmetrySpec};

/// Symmetry applications allowed when extending tabulated data.
pub const MAX_APPLICATIONS: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum DataProfile {
    Zero,
    /// `A (-x₂, x₁, 0)/|x|² · (sin θ)^{-γ} · (1 + δ cos(2π log|x| / log λ))`.
    ///
    /// Azimuthal with axisymmetric magnitude, hence divergence free for
    /// every `γ`, `δ`. Self-similar when `δ = 0`, `λ`-DSS otherwise. The
    /// profile is bounded for `γ ≤ 1` and lies in `L^p(S²)` for
    /// `p(γ - 1) < 2`.
    Swirl {
        amplitude: f64,
        gamma: f64,
        modulation: f64,
        lambda: f64,
    },
    /// `A x/|x|²`: self-similar, bounded profile, not divergence free.
    Radial { amplitude: f64 },
    /// Data extended from a fundamental domain.
    Tabulated {
        data: Arc<FundamentalDomainData>,
        spec: SymmetrySpec,
    },
    /// `inner` restricted to where the profile magnitude `|x||v₀(x)|` is at
    /// most (`keep_below`) or above (`!keep_below`) `level`.
    Truncated {
        inner: Box<DataProfile>,
        level: f64,
        keep_below: bool,
    },
}

impl DataProfile {
    pub fn swirl(amplitude: f64) -> Self {
        DataProfile::Swirl {
            amplitude,
            gamma: 0.0,
            modulation: 0.0,
            lambda: 2.0,
        }
    }

    pub fn value(&self, x: Vec3) -> Vec3 {
        match self {
            DataProfile::Zero => [0.0; 3],
            DataProfile::Swirl {
                amplitude,
                gamma,
                modulation,
                lambda,
            } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let rho2 = x[0] * x[0] + x[1] * x[1];
                if rho2 == 0.0 {
                    return [0.0; 3];
                }
                let mut c = amplitude / r2;
                if *gamma != 0.0 {
                    c *= (rho2 / r2).powf(-0.5 * gamma);
                }
                if *modulation != 0.0 {
                    c *= 1.0 + modulation * (PI * r2.ln() / lambda.ln()).cos();
                }
                [-c * x[1], c * x[0], 0.0]
            }
            DataProfile::Radial { amplitude } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                if r2 == 0.0 {
                    return [0.0; 3];
                }
                let c = amplitude / r2;
                [c * x[0], c * x[1], c * x[2]]
            }
            DataProfile::Tabulated { data, spec } => {
                extended_value(data, spec, x, MAX_APPLICATIONS).unwrap_or([0.0; 3])
            }
            DataProfile::Truncated {
                inner,
                level,
                keep_below,
            } => {
                let v = inner.value(x);
                let sigma = norm(x) * norm(v);
                if (sigma <= *level) == *keep_below {
                    v
                } else {
                    [0.0; 3]
                }
            }
        }
    }

    /// `|x| |v₀(x)|`, the magnitude of the angular profile.
    pub fn profile_magnitude(&self, x: Vec3) -> f64 {
        norm(x) * norm(self.value(x))
    }

    pub fn symmetry(&self) -> SymmetrySpec {
        match self {
            DataProfile::Swirl {
                modulation, lambda, ..
            } if *modulation != 0.0 => SymmetrySpec::dss(*lambda),
            DataProfile::Zero | DataProfile::Swirl { .. } | DataProfile::Radial { .. } => SymmetrySpec::ss(),
            DataProfile::Tabulated { spec, .. } => *spec,
            DataProfile::Truncated { inner, .. } => inner.symmetry(),
        }
    }

    /// Whether `|x||v₀|` is bounded, i.e. the data lies in weak `L³`.
    pub fn bounded_profile(&self) -> bool {
        match self {
            DataProfile::Swirl { gamma, .. } => *gamma <= 1.0,
            DataProfile::Truncated {
                inner, keep_below, ..
            } => *keep_below || inner.bounded_profile(),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DataProfile::Zero => true,
            DataProfile::Swirl { amplitude, .. } | DataProfile::Radial { amplitude } => *amplitude == 0.0,
            _ => false,
        }
    }

    /// Closed-form `e^{Δ}v₀` when one is known.
    pub fn heat_profile(&self, y: Vec3) -> Option<Vec3> {
        match self {
            DataProfile::Zero => Some([0.0; 3]),
            DataProfile::Swirl {
                amplitude,
                gamma,
                modulation,
                ..
            } if *gamma == 0.0 && *modulation == 0.0 => {
                let c = amplitude * heat_factor(norm(y));
                Some([-c * y[1], c * y[0], 0.0])
            }
            DataProfile::Radial { amplitude } => {
                let c = amplitude * heat_factor(norm(y));
                Some([c * y[0], c * y[1], c * y[2]])
            }
            _ => None,
        }
    }

    pub fn has_closed_heat_flow(&self) -> bool {
        self.heat_profile([1.0, 0.0, 0.0]).is_some()
    }

    pub fn sample(&self, grid: &Grid) -> VectorField {
        VectorField::from_fn(*grid, |x| self.value(x))
    }

    pub fn describe(&self) -> String {
        match self {
            DataProfile::Zero => "zero".into(),
            DataProfile::Swirl {
                amplitude,
                gamma,
                modulation,
                lambda,
            } => format!("swirl(amplitude={amplitude}, gamma={gamma}, modulation={modulation}, lambda={lambda})"),
            DataProfile::Radial { amplitude } => format!("radial(amplitude={amplitude})"),
            DataProfile::Tabulated { data, spec } => format!(
                "tabulated({:?}, {}x{}, {})",
                data.shape,
                data.n_theta,
                data.n_phi,
                spec.kind.name()
            ),
            DataProfile::Truncated {
                inner,
                level,
                keep_below,
            } => format!(
                "{}[{} {level}]",
                inner.describe(),
                if *keep_below { "<=" } else { ">" }
            ),
        }
    }
}
