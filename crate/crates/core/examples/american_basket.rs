//! Two-asset American basket put: Mellin price with its exercise boundary,
//! compared with a Longstaff–Schwartz estimate.

use std::time::Instant;

use mellin_levy::oracles::{mc_american_lsq, McConfig};
use mellin_levy::pricing::{default_contour, price_american};
use mellin_levy::{CharacteristicModel, OptionSpec};
use nalgebra::DMatrix;

fn main() -> mellin_levy::Result<()> {
    let model = CharacteristicModel::gbm(
        vec![0.2, 0.3],
        DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]),
    )?;
    let spec = OptionSpec::basket_put(100.0, 1.0, vec![50.0, 50.0], 0.05)?.american();
    let contour = default_contour(&spec, &model)?;

    let start = Instant::now();
    let res = price_american(&spec, &model, &contour, 64)?;
    println!(
        "mellin    price {:.6}  european {:.6}  premium {:.6}  ({:.2?})",
        res.price,
        res.european_part,
        res.premium_part,
        start.elapsed()
    );
    for note in &res.diagnostics.notes {
        println!("  note: {note}");
    }

    let start = Instant::now();
    let mc = McConfig::new(200_000, 7);
    let lsq = mc_american_lsq(&spec, &model, &mc, 50)?;
    println!(
        "lsq       price {:.6}  se {:.6}  ({:.2?})",
        lsq.price,
        lsq.std_error,
        start.elapsed()
    );

    if let Some(curve) = &res.diagnostics.boundary {
        println!("tau       s_star");
        for (t, s) in curve.times.iter().zip(&curve.s_star).step_by(8) {
            println!("{t:<9.4} {s:.4}");
        }
    }
    Ok(())
}
