//! Single-asset American put against a 10 000-step binomial lattice.

use std::time::Instant;

use mellin_levy::oracles::binomial_american_put;
use mellin_levy::pricing::{default_contour, price_american};
use mellin_levy::{CharacteristicModel, OptionSpec};
use nalgebra::DMatrix;

fn main() -> mellin_levy::Result<()> {
    let (k, r, sigma, t) = (100.0, 0.05, 0.2, 1.0);
    let model = CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1))?;

    println!("spot   mellin     european   premium    lattice    difference");
    for s in [80.0, 90.0, 100.0, 110.0, 120.0] {
        let spec = OptionSpec::basket_put(k, t, vec![s], r)?.american();
        let contour = default_contour(&spec, &model)?;
        let res = price_american(&spec, &model, &contour, 64)?;
        let lat = binomial_american_put(s, k, r, sigma, t, 10_000);
        println!(
            "{s:<6} {:<10.6} {:<10.6} {:<10.6} {:<10.6} {:+.2e}",
            res.price,
            res.european_part,
            res.premium_part,
            lat.american,
            res.price - lat.american
        );
    }

    // the time grid drives the premium error
    let spec = OptionSpec::basket_put(k, t, vec![100.0], r)?.american();
    let contour = default_contour(&spec, &model)?;
    let lat = binomial_american_put(100.0, k, r, sigma, t, 10_000).american;
    for steps in [16, 32, 64, 128] {
        let start = Instant::now();
        let p = price_american(&spec, &model, &contour, steps)?.price;
        println!(
            "time steps {steps:<4} price {p:.6}  vs lattice {:+.2e}  ({:.2?})",
            p - lat,
            start.elapsed()
        );
    }
    Ok(())
}
