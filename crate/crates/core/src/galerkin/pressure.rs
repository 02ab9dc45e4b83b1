//! Pressure `p_A = Σ R_iR_j(A_iA_j + A_iB_j + B_iA_j)` on the periodic box.

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};
use crate::spectral::pressure_from_flux;
use crate::transform::ProfileTrajectory;

/// Upper triangle of `w·(A⊗A + A⊗B + B⊗A)`.
pub fn quadratic_flux(a: &VectorField, b: Option<&VectorField>, window: Option<&[f64]>) -> [[Vec<f64>; 3]; 3] {
    let n = a.len();
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if j < i {
                return Vec::new();
            }
            (0..n)
                .map(|idx| {
                    let mut q = a.comps[i][idx] * a.comps[j][idx];
                    if let Some(b) = b {
                        q += a.comps[i][idx] * b.comps[j][idx] + b.comps[i][idx] * a.comps[j][idx];
                    }
                    window.map_or(q, |w| w[idx] * q)
                })
                .collect()
        })
    })
}

pub fn recover_pressure(a: &VectorField, b: Option<&VectorField>, window: Option<&[f64]>) -> ScalarField {
    let grid = a.grid;
    ScalarField {
        grid,
        data: pressure_from_flux(&grid, &quadratic_flux(a, b, window)),
    }
}

/// [`recover_pressure`] at every node of matching trajectories.
pub fn recover_pressure_trajectory(
    a: &ProfileTrajectory,
    b: Option<&ProfileTrajectory>,
    window: Option<&[f64]>,
) -> Result<Vec<ScalarField>> {
    if let Some(b) = b {
        if b.layout() != a.layout() {
            return Err(Error::config("pressure inputs use different layouts"));
        }
    }
    Ok((0..a.n_s())
        .map(|k| recover_pressure(&a.velocity[k], b.map(|b| &b.velocity[k]), window))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::spectral;
    use std::f64::consts::PI;

    #[test]
    fn zero_fields_give_zero_pressure() {
        let grid = Grid::new(8, PI).unwrap();
        let z = VectorField::zeros(grid);
        assert_eq!(recover_pressure(&z, Some(&z), None).max_abs(), 0.0);
    }

    #[test]
    fn shear_pair_has_closed_form_pressure() {
        // A = (sin y₂, sin y₁, 0): ∂_i∂_j(A_iA_j) = 2cos y₁ cos y₂, p = cos y₁ cos y₂
        let grid = Grid::new(16, PI).unwrap();
        let a = VectorField::from_fn(grid, |y| [y[1].sin(), y[0].sin(), 0.0]);
        let p = recover_pressure(&a, None, None);
        for idx in 0..grid.len() {
            let y = grid.point(idx);
            assert!((p.data[idx] - y[0].cos() * y[1].cos()).abs() < 1e-10);
        }
        // a single solenoidal mode carries no pressure
        let mode = VectorField::from_fn(grid, |y| [(y[1] + y[2]).cos(), 0.0, 0.0]);
        assert!(recover_pressure(&mode, None, None).max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_identity_with_coupling() {
        let grid = Grid::new(16, PI).unwrap();
        let a = VectorField::from_fn(grid, |y| [y[1].sin() * y[2].cos(), (y[0] + y[2]).cos(), y[0].sin()]);
        let b = VectorField::from_fn(grid, |y| [(2.0 * y[2]).sin(), y[0].cos(), (y[0] - y[1]).sin()]);
        let p = recover_pressure(&a, Some(&b), None);
        let lap = spectral::laplacian(&grid, &p.data);
        let flux = quadratic_flux(&a, Some(&b), None);
        let mut rhs = vec![0.0; grid.len()];
        for i in 0..3 {
            for j in 0..3 {
                let q = if j >= i { &flux[i][j] } else { &flux[j][i] };
                let d = spectral::derivative(&grid, &spectral::derivative(&grid, q, i), j);
                rhs.iter_mut().zip(d).for_each(|(r, x)| *r += x);
            }
        }
        let worst = lap.iter().zip(&rhs).map(|(l, r)| (l + r).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }
}
