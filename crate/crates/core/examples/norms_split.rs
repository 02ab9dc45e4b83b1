//! Littlewood–Paley blocks, critical norms and the splitting of singular
//! data into a bounded-profile part and a small remainder.

use lprf::analysis::{norm_report, split_initial_data, BesovIndex};
use lprf::data::DataProfile;
use lprf::grid::Grid;

fn main() -> lprf::Result<()> {
    let grid = Grid::new(48, 8.0)?;
    let (p, lambda) = (4.0, 2.0);
    let v0 = DataProfile::Swirl {
        amplitude: 0.3,
        gamma: 1.6,
        modulation: 0.0,
        lambda,
    };
    println!("data: {}", v0.describe());

    let norms = norm_report(&v0.sample(&grid), BesovIndex::critical(p, lambda))?;
    println!("critical Besov norm  {:.4e}", norms.besov_value);
    println!("weak L3 norm         {:.4e}", norms.weak_l3);
    println!("uniform local L2     {:.4e}", norms.l2_uloc);
    for (j, m) in &norms.blocks {
        println!("  block {j:>3}  {m:.3e}");
    }

    let split = split_initial_data(&v0, &grid, 0.1, p, lambda)?;
    println!("truncation level     {:?}", split.level);
    println!("Besov norm of b0     {:.4e}", split.besov_b0);
    println!("weak L3 norm of a0   {:.4e}", split.weak_l3_a0);
    println!("bisection steps      {}", split.bisection_steps);
    Ok(())
}
