//! Local energy inequality tested against a seeded bump battery on a
//! solved self-similar run.

use lprf::config::RunConfig;
use lprf::diagnostics::{local_energy_battery, LocalEnergyInput};
use lprf::pipeline::{cmd_solve, LOCAL_ENERGY_FACTOR};

fn main() -> lprf::Result<()> {
    let cfg = RunConfig::parse("data.profile = swirl\ndata.amplitude = 0.05\ngrid.n = 32\nsolver.modes = 16\n")?;
    let run = cmd_solve(&cfg, None)?;
    let input = LocalEnergyInput::Profile {
        a: &run.artifacts.a,
        b: Some(&run.artifacts.b),
    };
    for (i, case) in local_energy_battery(&input, 11)?.iter().enumerate() {
        println!(
            "case {i:>2}  lhs {:.3e}  rhs {:.3e}  slack {:+.3e}  tol {:.1e}  {}",
            case.lhs,
            case.rhs,
            case.slack,
            case.quadrature_tol,
            if case.passes(LOCAL_ENERGY_FACTOR) { "ok" } else { "violated" }
        );
    }
    Ok(())
}
