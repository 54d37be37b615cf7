//! Critical price of the American put against time to maturity, next to
//! the lattice boundary.

use mellin_levy::oracles::binomial_american_put;
use mellin_levy::pricing::{default_contour, solve_boundary};
use mellin_levy::{CharacteristicModel, OptionSpec};
use nalgebra::DMatrix;

fn main() -> mellin_levy::Result<()> {
    let (k, r, sigma, t) = (100.0, 0.05, 0.3, 1.0);
    let model = CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1))?;
    let spec = OptionSpec::basket_put(k, t, vec![100.0], r)?.american();
    let contour = default_contour(&spec, &model)?;
    let curve = solve_boundary(&spec, &model, &contour, 64)?;
    let lat = binomial_american_put(100.0, k, r, sigma, t, 10_000);

    println!("tau      mellin    lattice");
    for (tau, s) in curve.times.iter().zip(&curve.s_star).step_by(4) {
        // last lattice node at or below tau
        let lattice = lat
            .boundary
            .iter()
            .take_while(|(x, _)| x <= tau)
            .last()
            .map(|p| format!("{:.4}", p.1))
            .unwrap_or_default();
        println!("{tau:<8.4} {s:<9.4} {lattice}");
    }
    Ok(())
}
