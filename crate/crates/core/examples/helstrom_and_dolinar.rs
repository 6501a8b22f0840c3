//! The Dolinar receiver reaches the Helstrom limit when it knows α.

use agnostic_dolinar::bounds::helstrom_success;
use agnostic_dolinar::dolinar::{dolinar_ode_solve, dolinar_success};
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "|a|", "helstrom", "closed form", "ode (1e4)");
    for x in [0.1, 0.25, 0.625, 1.0, 2.0] {
        let a = ComplexAmplitude::real(x);
        let h = helstrom_success(0.5, 0.5, a, -a)?;
        let closed = dolinar_success(0.5, 0.5, x * x, 1.0)?;
        let ode = dolinar_ode_solve(0.5, x * x, 10_000)?.terminal();
        println!("{x:>6} {h:>12.9} {closed:>12.9} {ode:>12.9}");
    }

    // Success probability builds up over the pulse.
    let sol = dolinar_ode_solve(0.5, 0.390625, 1000)?;
    for t in [0.0, 0.1, 0.25, 0.5, 1.0] {
        println!("t = {t:<4}  P_c = {:.6}", sol.at(t));
    }
    Ok(())
}
