//! Dolinar receiver built from K weak displaced measurements; the gap to
//! Helstrom closes as K grows.

use agnostic_dolinar::bounds::helstrom_success;
use agnostic_dolinar::telegraph::discretized_dolinar;
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    for x in [0.25, 0.625] {
        let a = ComplexAmplitude::real(x);
        let h = helstrom_success(0.5, 0.5, a, -a)?;
        for k in [10usize, 100, 1000, 10_000] {
            let p = discretized_dolinar(k, a, 0.5)?;
            println!("|a| = {x:<5} K = {k:<6} P_c = {p:.8}  gap {:.2e}", h - p);
        }
    }
    Ok(())
}
