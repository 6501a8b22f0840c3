//! A Dolinar receiver tuned to the wrong amplitude, and its average over a
//! heterodyne estimate of α (Estimate & Discriminate).

use agnostic_dolinar::dolinar::{eande_success, eande_success_hermite, miscalibrated_propagate, miscalibrated_success};
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    let alpha = ComplexAmplitude::real(0.625);
    for (re, im) in [(0.625, 0.0), (0.4, 0.0), (0.9, 0.0), (0.5, 0.3), (0.0, 0.6), (-0.625, 0.0)] {
        let beta = ComplexAmplitude::new(re, im);
        let closed = miscalibrated_success(beta, alpha)?;
        let numeric = miscalibrated_propagate(beta, alpha, 2000)?.terminal();
        println!("beta = ({re:>6}, {im:>4})  closed {closed:.8}  propagated {numeric:.8}");
    }
    for n in [1u32, 4, 16, 64] {
        let radial = eande_success(alpha, n)?;
        let hermite = eande_success_hermite(alpha, n, 64)?;
        println!(
            "n = {n:<3} E&D {radial:.8}  hermite {:.8} (doubling change {:.1e})",
            hermite.value, hermite.doubling_change
        );
    }
    Ok(())
}
