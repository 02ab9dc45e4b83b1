//! The bump `η(y) ∝ exp(-1/(1-|y|²))` on the unit ball, its rescalings
//! `η_ε = ε⁻³η(·/ε)` and its Fourier transform.

use std::sync::OnceLock;

use crate::grid::{norm, VectorField};
use crate::quadrature::gauss_legendre_on;
use crate::spectral::apply_multiplier_vector;

const CELLS: usize = 40;
const NODES: usize = 12;

fn bump(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

fn radial_rule() -> &'static Vec<(f64, f64)> {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut rule = Vec::with_capacity(CELLS * NODES);
        for c in 0..CELLS {
            let (a, b) = (c as f64 / CELLS as f64, (c + 1) as f64 / CELLS as f64);
            rule.extend(gauss_legendre_on(NODES, a, b));
        }
        rule
    })
}

fn mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        radial_rule()
            .iter()
            .map(|&(r, w)| w * 4.0 * std::f64::consts::PI * r * r * bump(r))
            .sum()
    })
}

/// `η(y)` normalized to unit mass.
pub fn eta(r: f64) -> f64 {
    bump(r) / mass()
}

/// `η̂(ρ) = ∫ η(y) e^{-iξ·y} dy` for `|ξ| = ρ`; `η̂(0) = 1`.
pub fn eta_hat(rho: f64) -> f64 {
    if rho == 0.0 {
        return 1.0;
    }
    let total: f64 = radial_rule()
        .iter()
        .map(|&(r, w)| {
            let x = rho * r;
            let j0 = if x < 1e-4 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            w * 4.0 * std::f64::consts::PI * r * r * bump(r) * j0
        })
        .sum();
    total / mass()
}

/// `η_ε * f` as the Fourier multiplier `η̂(ε|ξ|)`; `ε = 0` is the identity.
pub fn mollify(f: &VectorField, eps: f64) -> VectorField {
    if eps == 0.0 {
        return f.clone();
    }
    apply_multiplier_vector(f, |k| eta_hat(eps * norm(k)))
}
