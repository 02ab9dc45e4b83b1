//! Picard iteration for the small-data mild solution in profile variables.

use lprf::data::DataProfile;
use lprf::grid::Grid;
use lprf::linear::{mild_solve_small, MildOptions};
use lprf::transform::ProfileLayout;

fn main() -> lprf::Result<()> {
    let layout = ProfileLayout {
        grid: Grid::new(24, 8.0)?,
        period: 2.0 * 2f64.ln(),
        n_s: 2,
    };
    let data = DataProfile::Swirl {
        amplitude: 0.05,
        gamma: 0.0,
        modulation: 0.3,
        lambda: 2.0,
    };
    let mild = mild_solve_small(&data, &layout, 0.0, &MildOptions::default())?;
    for (i, inc) in mild.history.iter().enumerate() {
        println!("iteration {i:>2}  relative increment {inc:.3e}");
    }
    println!("Duhamel residual     {:.3e}", mild.duhamel_residual);
    let growth = mild
        .profile
        .velocity
        .iter()
        .zip(&mild.heat.velocity)
        .map(|(b, h)| b.sub(h).l2_norm() / h.l2_norm())
        .fold(0.0, f64::max);
    println!("distance from heat   {growth:.3e}");
    for (t, norm) in mild.decay_samples(2.0, 4) {
        println!("  t = {t:>8.3}  L2 distance from heat on the growing ball  {norm:.3e}");
    }
    Ok(())
}
