//! Heat-flow background for self-similar swirl data, its assumption report
//! and the divergence-free cutoff that makes it small in L4.

use lprf::data::DataProfile;
use lprf::grid::Grid;
use lprf::linear::{build_u0, build_w, verify_assumption_u0};
use lprf::transform::ProfileLayout;

fn main() -> lprf::Result<()> {
    let layout = ProfileLayout {
        grid: Grid::new(32, 8.0)?,
        period: 2.0 * 2f64.ln(),
        n_s: 2,
    };
    let background = build_u0(&DataProfile::swirl(0.1), &layout, 0.0, 4.0)?;
    let report = verify_assumption_u0(&background)?;
    println!("closed form          {}", background.closed_form);
    println!("equation residual    {:.3e}", report.residual);
    println!("sup L4               {:.3e}", report.sup_l4);
    println!("variation in s       {:.1e}", report.s_variation);
    for (r, theta) in &report.theta {
        println!("  tail L4 beyond {r:>4.1}  {theta:.3e}");
    }

    let cutoff = build_w(&background, 0.5, 4.0)?;
    println!("cutoff radius        {}", cutoff.r0);
    println!("sup L4 of W          {:.3e}", cutoff.sup_lq);
    println!("divergence defect    {:.1e}", cutoff.divergence_defect);
    println!("energy gap           {:.3e}", cutoff.energy_gap);
    Ok(())
}
