//! Periodic Galerkin orbit forced by the cutoff background, with its
//! absorbing-ball certificate.

use lprf::data::DataProfile;
use lprf::galerkin::basis::Basis;
use lprf::galerkin::{solve_periodic, GalerkinOptions};
use lprf::grid::Grid;
use lprf::linear::{build_u0, build_w};
use lprf::transform::ProfileLayout;

fn main() -> lprf::Result<()> {
    let grid = Grid::new(32, 8.0)?;
    let layout = ProfileLayout {
        grid,
        period: 2.0 * 2f64.ln(),
        n_s: 4,
    };
    let background = build_u0(&DataProfile::swirl(0.05), &layout, 0.0, 4.0)?;
    let cutoff = build_w(&background, 0.5, 4.0)?;
    let opts = GalerkinOptions {
        modes: 16,
        ..GalerkinOptions::default()
    };
    let basis = Basis::new(grid.half_width(), opts.modes)?;
    println!("modes                {}", basis.len());
    let state = solve_periodic(basis, Some(&grid), Some(&cutoff.w), None, layout.period, 0.0, &opts)?;
    println!("time steps           {}", state.steps);
    println!("fixed point residual {:.3e}", state.fixed_point.residual);
    println!("periodicity defect   {:.3e}", state.periodicity_defect);
    println!("energy norm          {:.4e}", state.energy_norm());
    println!("absorbing radius     {:.3e}", state.certificate.rho);
    println!("ball certified       {}", state.certificate.passed);
    Ok(())
}
