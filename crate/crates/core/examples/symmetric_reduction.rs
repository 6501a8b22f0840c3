//! Any pair of training amplitudes reduces to the symmetric ±α′ problem by
//! a passive three-port interferometer.

use agnostic_dolinar::optics::{reduce_to_symmetric, scattering_matrix, GeneralProblem};
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    let a1 = ComplexAmplitude::new(0.9, 0.2);
    let a2 = ComplexAmplitude::new(0.1, -0.4);
    let n = 3;
    println!("orthogonality defect {:.1e}", scattering_matrix(n)?.orthogonality_defect());
    for class1 in [true, false] {
        let r = reduce_to_symmetric(&GeneralProblem::new(a1, a2, n, class1)?)?;
        println!(
            "test state is class {}: alpha' = {:.6}{:+.6}i, test mode = {:.6}{:+.6}i, copies = {}",
            if class1 { 1 } else { 2 },
            r.problem.alpha.re(),
            r.problem.alpha.im(),
            r.test_mode.re(),
            r.test_mode.im(),
            r.problem.n
        );
    }
    Ok(())
}
