//! `A = U + W`, `a = from_profile(A)`, `v = a + b`, `π = p_a + p_b`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::stencil;
use crate::transform::{from_profile, leray_residual, Boundary, PhysicalField, ProfileTrajectory, ResidualTerms};

use super::pressure::recover_pressure_trajectory;
use super::REPORT_FRACTION;

#[derive(Debug, Clone)]
pub struct ComposedSolution {
    /// `A = U + W` with pressure `p_A`.
    pub profile_a: ProfileTrajectory,
    /// `U + W + B` with `p_A + p_B`.
    pub profile_v: ProfileTrajectory,
    pub a: PhysicalField,
    pub b: Option<PhysicalField>,
    pub v: PhysicalField,
    /// `sup_s` interior L² norm of the residual of the `A` equation.
    pub eq_a_residual: f64,
    /// The same, divided by `sup_s ‖A‖` on the interior.
    pub eq_a_relative: f64,
}

/// Residual of
/// `∂_sA + α(JA - (Jy)·∇A) - ΔA - ½A - ½y·∇A + A·∇A + ∇p_A + A·∇B + B·∇A`
/// per node.
pub fn eq_a_residual(a: &ProfileTrajectory, b: Option<&ProfileTrajectory>) -> Result<Vec<VectorField>> {
    let mut res = leray_residual(a, ResidualTerms::Full)?.momentum;
    let Some(b) = b else {
        return Ok(res);
    };
    if b.layout() != a.layout() {
        return Err(Error::config("A and B profiles use different layouts"));
    }
    for (k, out) in res.iter_mut().enumerate() {
        let (av, bv) = (&a.velocity[k], &b.velocity[k]);
        let ja = stencil::jacobian(av);
        let jb = stencil::jacobian(bv);
        for idx in 0..av.len() {
            let (x, y) = (av.get(idx), bv.get(idx));
            let mut o = out.get(idx);
            for c in 0..3 {
                for d in 0..3 {
                    o[c] += x[d] * jb[c][d][idx] + y[d] * ja[c][d][idx];
                }
            }
            out.set(idx, o);
        }
    }
    Ok(res)
}

/// Builds the solution from the Galerkin profile `U`, the cutoff field `W`
/// and the mild profile `B` (with its pressure), over `periods`.
pub fn compose_solution(
    u: &ProfileTrajectory,
    w: Option<&ProfileTrajectory>,
    b: Option<&ProfileTrajectory>,
    window: Option<&[f64]>,
    periods: Range<i32>,
) -> Result<ComposedSolution> {
    let mut a = match w {
        Some(w) => u.add(w)?,
        None => u.clone(),
    };
    a.boundary = Boundary::Open;
    a.pressure = recover_pressure_trajectory(&a, b, window)?;
    let residual = eq_a_residual(&a, b)?;
    let grid = a.grid;
    let keep = |i: usize| grid.in_interior(i, REPORT_FRACTION);
    let eq_a = residual.iter().map(|r| r.l2_norm_masked(keep)).fold(0.0, f64::max);
    let scale = a.sup_l2_interior(REPORT_FRACTION);
    let profile_v = match b {
        Some(b) => a.add(b)?,
        None => a.clone(),
    };
    let a_phys = from_profile(&a, periods.clone())?;
    let b_phys = b.map(|b| from_profile(b, periods.clone())).transpose()?;
    let v = match &b_phys {
        Some(bp) => a_phys.add(bp)?,
        None => a_phys.clone(),
    };
    Ok(ComposedSolution {
        profile_a: a,
        profile_v,
        a: a_phys,
        b: b_phys,
        v,
        eq_a_residual: eq_a,
        eq_a_relative: if scale > 0.0 { eq_a / scale } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::transform::ProfileLayout;

    #[test]
    fn zero_inputs_give_zero_solution() {
        let layout = ProfileLayout {
            grid: Grid::new(8, 2.0).unwrap(),
            period: 1.0,
            n_s: 4,
        };
        let z = ProfileTrajectory::zeros(&layout, 0.0, Boundary::Open);
        let sol = compose_solution(&z, Some(&z), None, None, 0..1).unwrap();
        assert!(sol.v.slices.iter().all(|s| s.velocity.max_abs() == 0.0 && s.pressure.max_abs() == 0.0));
        assert_eq!(sol.eq_a_residual, 0.0);
    }

    #[test]
    fn without_b_the_a_equation_is_the_leray_system() {
        let layout = ProfileLayout {
            grid: Grid::new(12, 3.0).unwrap(),
            period: 0.5,
            n_s: 6,
        };
        let u = ProfileTrajectory::from_fn(&layout, 0.0, Boundary::Open, |y, s| {
            let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 2.0).exp() * (1.0 + 0.1 * (4.0 * std::f64::consts::PI * s).sin());
            ([-y[1] * g, y[0] * g, 0.0], 0.0)
        });
        let sol = compose_solution(&u, None, None, None, 0..1).unwrap();
        let mut with_p = sol.profile_a.clone();
        with_p.pressure = recover_pressure_trajectory(&u, None, None).unwrap();
        let direct = leray_residual(&with_p, ResidualTerms::Full).unwrap();
        let ours = eq_a_residual(&sol.profile_a, None).unwrap();
        for (x, y) in direct.momentum.iter().zip(&ours) {
            assert_eq!(x.sub(y).max_abs(), 0.0);
        }
        assert!(sol.b.is_none());
        assert_eq!(sol.v.slices.len(), sol.a.slices.len());
        assert_eq!(sol.v.slices.len(), 6);
    }
}
