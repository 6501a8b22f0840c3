//! Minimum error of any strategy that is not told the phase of α, against
//! the number of training copies, with the Fock-sector cross-check.

use agnostic_dolinar::bounds::{
    helstrom_error_symmetric, mec_optimal_error, mec_optimal_error_asymptotic, mec_optimal_error_oracle,
};
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    let x: f64 = 0.625;
    let a2 = x * x;
    println!("helstrom error {:.8}", helstrom_error_symmetric(a2));
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "series", "fock oracle", "asymptotic");
    for n in [1u32, 2, 5, 10, 20, 50, 100, 1000] {
        let series = mec_optimal_error(n, a2)?;
        let oracle = if n <= 20 { format!("{:.8}", mec_optimal_error_oracle(n, ComplexAmplitude::real(x))?) } else { "-".into() };
        let asym = if n >= 2 { format!("{:.8}", mec_optimal_error_asymptotic(n, a2)?) } else { "-".into() };
        println!("{n:>6} {series:>12.8} {oracle:>12} {asym:>12}");
    }
    Ok(())
}
