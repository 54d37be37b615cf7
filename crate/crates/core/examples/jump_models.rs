//! European puts under Merton and Kou jump diffusions, with the
//! martingale condition on the characteristic exponent and a Monte Carlo
//! check.

use mellin_levy::oracles::{black_scholes_put, mc_european, McConfig};
use mellin_levy::pricing::{default_contour, price_european};
use mellin_levy::{CharacteristicModel, JumpSpec, OptionSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> mellin_levy::Result<()> {
    let (k, r, sigma, t) = (100.0, 0.05, 0.2, 1.0);
    let jumps = [
        ("none", JumpSpec::None),
        (
            "merton",
            JumpSpec::Merton {
                intensity: 1.0,
                mean: -0.1,
                std: 0.15,
            },
        ),
        (
            "kou",
            JumpSpec::Kou {
                intensity: 1.0,
                p_up: 0.4,
                eta_up: 10.0,
                eta_down: 5.0,
            },
        ),
    ];
    println!(
        "bs reference {:.6}",
        black_scholes_put(100.0, k, r, sigma, t)
    );
    for (name, jump) in jumps {
        let model =
            CharacteristicModel::with_jumps(vec![sigma], DMatrix::identity(1, 1), vec![jump])?;
        let psi = model.char_exponent(&[Complex64::new(0.0, -1.0)])?;
        let spec = OptionSpec::basket_put(k, t, vec![100.0], r)?;
        let contour = default_contour(&spec, &model)?;
        let p = price_european(&spec, &model, &contour)?.price;
        let mc = McConfig {
            antithetic: true,
            ..McConfig::new(400_000, 9)
        };
        let est = mc_european(&spec, &model, &mc)?;
        println!(
            "{name:<7} psi(-i) {:.1e}  mellin {p:.6}  mc {:.6} +- {:.6}",
            psi.norm(),
            est.price,
            est.std_error
        );
    }
    Ok(())
}
