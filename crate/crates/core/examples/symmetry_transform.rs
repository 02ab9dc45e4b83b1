//! Build a periodic profile, map it to a discretely self-similar field and
//! back, and measure how far each representation is from its symmetry.

use std::f64::consts::PI;

use lprf::grid::Grid;
use lprf::symmetry::{symmetry_defect, SymmetrySpec};
use lprf::transform::{from_profile, periodicity_defect, to_profile, Boundary, ProfileLayout, ProfileTrajectory};

fn main() -> lprf::Result<()> {
    let spec = SymmetrySpec::dss(2.0);
    let layout = ProfileLayout {
        grid: Grid::new(16, 2.0)?,
        period: spec.period(),
        n_s: 4,
    };
    let period = layout.period;
    let profile = ProfileTrajectory::from_fn(&layout, spec.frame_speed(), Boundary::Open, |y, s| {
        let g = (-(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 3.0).exp();
        let w = 2.0 * PI * s / period;
        ([-y[1] * g * (1.0 + 0.4 * w.cos()), y[0] * g, 0.2 * g * w.sin()], 0.0)
    });

    let physical = from_profile(&profile, 0..2)?;
    println!("time slices          {}", physical.slices.len());
    println!("DSS defect           {:.2e}", symmetry_defect(&physical, &spec)?);
    println!(
        "periodicity defect   {:.2e}",
        periodicity_defect(&physical, spec.frame_speed(), &layout.grid, period)?
    );

    let back = to_profile(&physical, spec.frame_speed(), &layout)?;
    let err = back
        .velocity
        .iter()
        .zip(&profile.velocity)
        .map(|(a, b)| a.sub(b).max_abs())
        .fold(0.0, f64::max);
    println!("round-trip error     {err:.2e}");
    Ok(())
}
