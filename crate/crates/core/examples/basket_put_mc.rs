//! European basket puts on two and three correlated assets, checked against
//! Monte Carlo.

use std::time::Instant;

use mellin_levy::oracles::{mc_european, McConfig};
use mellin_levy::pricing::{default_contour, price_european};
use mellin_levy::{CharacteristicModel, OptionSpec};
use nalgebra::DMatrix;

fn compare(model: &CharacteristicModel, spec: &OptionSpec) -> mellin_levy::Result<()> {
    let start = Instant::now();
    let contour = default_contour(spec, model)?;
    let p = price_european(spec, model, &contour)?;
    let elapsed = start.elapsed();
    let mc = McConfig {
        antithetic: true,
        ..McConfig::new(400_000, 5)
    };
    let est = mc_european(spec, model, &mc)?;
    println!(
        "n = {}  mellin {:.6} ({elapsed:.2?}, nodes {:?})  mc {:.6} +- {:.6}  z = {:+.2}",
        spec.dim(),
        p.price,
        p.diagnostics.nodes,
        est.price,
        est.std_error,
        (p.price - est.price) / est.std_error
    );
    Ok(())
}

fn main() -> mellin_levy::Result<()> {
    for rho in [-0.5, 0.0, 0.5] {
        let model = CharacteristicModel::gbm(
            vec![0.2, 0.3],
            DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]),
        )?;
        print!("rho {rho:+.1}: ");
        compare(
            &model,
            &OptionSpec::basket_put(100.0, 1.0, vec![50.0, 50.0], 0.05)?,
        )?;
    }

    let corr = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.0]);
    let model = CharacteristicModel::gbm(vec![0.2, 0.25, 0.3], corr)?;
    print!("three assets: ");
    compare(
        &model,
        &OptionSpec::basket_put(100.0, 0.5, vec![30.0, 35.0, 35.0], 0.05)?,
    )
}
