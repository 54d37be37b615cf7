//! Feeds the Black–Scholes price into the pricing equation and shows the
//! finite-difference residual shrinking with the grid spacing.

use mellin_levy::oracles::black_scholes_put;
use mellin_levy::pricing::{pide_residual, PriceGrid};
use mellin_levy::{CharacteristicModel, JumpSpec, OptionSpec};
use nalgebra::DMatrix;

fn main() -> mellin_levy::Result<()> {
    let (k, r, sigma, t) = (100.0, 0.05, 0.2, 1.0);
    let spec = OptionSpec::basket_put(k, t, vec![100.0], r)?;
    let model = CharacteristicModel::gbm(vec![sigma], DMatrix::identity(1, 1))?;

    let mut prev: Option<f64> = None;
    for h in [2.0, 1.0, 0.5, 0.25] {
        let count = (40.0 / h as f64).round() as usize + 1;
        let grid = PriceGrid::sample(&[80.0], &[h], &[count], 0.5, 1e-4, |s, u| {
            black_scholes_put(s[0], k, r, sigma, t - u)
        })?;
        let e = pide_residual(&spec, &model, &grid)?.max_abs();
        match prev {
            Some(p) => println!("h {h:<5} max residual {e:.3e}  order {:.3}", (p / e).log2()),
            None => println!("h {h:<5} max residual {e:.3e}"),
        }
        prev = Some(e);
    }

    // the basket level itself solves the equation under a martingale model
    let jumpy = CharacteristicModel::with_jumps(
        vec![0.2, 0.3],
        DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]),
        vec![
            JumpSpec::Merton {
                intensity: 1.0,
                mean: -0.1,
                std: 0.2,
            },
            JumpSpec::Kou {
                intensity: 0.5,
                p_up: 0.4,
                eta_up: 10.0,
                eta_down: 6.0,
            },
        ],
    )?;
    let spec2 = OptionSpec::basket_put(k, t, vec![50.0, 50.0], r)?;
    let grid = PriceGrid::sample(&[30.0, 30.0], &[1.0, 1.0], &[41, 41], 0.5, 1e-3, |s, _| {
        s[0] + s[1]
    })?;
    println!(
        "V = S1 + S2 under merton/kou jumps: max residual {:.3e}",
        pide_residual(&spec2, &jumpy, &grid)?.max_abs()
    );
    Ok(())
}
