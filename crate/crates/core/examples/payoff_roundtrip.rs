//! Inverts the basket put transform alone and compares with the payoff.
//! The transform decays only algebraically, so the contour uses a taper.

use mellin_levy::mellin::inverse_mellin_many;
use mellin_levy::payoffs::{basket_put_function, basket_put_payoff};
use mellin_levy::{ContourSpec, Window};

fn main() -> mellin_levy::Result<()> {
    let k = 100.0;
    // (abscissa, half-width, spacing) per dimension count
    let settings = [(2.0, 256.0, 0.5), (3.0, 192.0, 1.0), (3.0, 128.0, 1.0)];
    for (n, &(a, b, h)) in (1..=3).zip(&settings) {
        let contour = ContourSpec::with_spacing(vec![a; n], vec![b; n], h)?
            .window(Window::Exponential { order: 2 });
        let points: Vec<Vec<f64>> = [0.4, 0.7, 0.9, 1.1, 1.3, 1.6]
            .iter()
            .map(|level| vec![level * k / n as f64; n])
            .collect();
        let inv = inverse_mellin_many(&basket_put_function(n, k), &contour, &points)?;
        println!("n = {n}, nodes {:?}", contour.nodes);
        for (x, r) in points.iter().zip(&inv) {
            let exact = basket_put_payoff(x, k)?;
            println!(
                "  sum S = {:6.1}  inverted {:12.8}  payoff {:8.4}  error {:+.2e}",
                x.iter().sum::<f64>(),
                r.value,
                exact,
                r.value - exact
            );
        }
    }
    Ok(())
}
