//! Single-asset European put under geometric Brownian motion against the
//! Black–Scholes formula, and the effect of the node count.

use mellin_levy::oracles::black_scholes_put;
use mellin_levy::pricing::{default_contour, price_european};
use mellin_levy::{CharacteristicModel, ContourSpec, OptionSpec};
use nalgebra::DMatrix;

fn main() -> mellin_levy::Result<()> {
    let (k, r, sigma, t) = (100.0, 0.05, 0.2, 1.0);
    let model = CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1))?;

    println!("spot    mellin        black-scholes  difference");
    for s in [60.0, 80.0, 100.0, 120.0, 150.0] {
        let spec = OptionSpec::basket_put(k, t, vec![s], r)?;
        let contour = default_contour(&spec, &model)?;
        let p = price_european(&spec, &model, &contour)?.price;
        let bs = black_scholes_put(s, k, r, sigma, t);
        println!("{s:<7} {p:<13.9} {bs:<14.9} {:+.2e}", p - bs);
    }

    let spec = OptionSpec::basket_put(k, t, vec![100.0], r)?;
    let auto = default_contour(&spec, &model)?;
    println!(
        "\nautomatic contour: abscissa {:?}, half-width {:?}, nodes {:?}",
        auto.abscissa, auto.half_width, auto.nodes
    );
    let bs = black_scholes_put(100.0, k, r, sigma, t);
    for nodes in [16, 32, 64, 128, 256] {
        let c = ContourSpec::new(auto.abscissa.clone(), auto.half_width.clone(), vec![nodes])?;
        let p = price_european(&spec, &model, &c)?.price;
        println!("nodes {nodes:<4} error {:+.3e}", p - bs);
    }
    Ok(())
}
