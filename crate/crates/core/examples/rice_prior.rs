//! Errors averaged over a Rice prior on |α|: the phase-invariant bound and
//! the estimate-then-discriminate receivers.

use agnostic_dolinar::bounds::{mec_optimal_error_with_prior, RicePrior};
use agnostic_dolinar::estimate::{rice_averaged_error, EstimatorKind};

fn main() -> agnostic_dolinar::Result<()> {
    let sigma = 0.1;
    println!("{:>5} {:>3} {:>10} {:>10} {:>10}", "x_c", "n", "bound", "photon", "heterodyne");
    for x_c in [0.2, 0.5, 0.8, 1.1] {
        let prior = RicePrior::new(sigma, x_c)?;
        for n in [4u32, 8] {
            println!(
                "{x_c:>5} {n:>3} {:>10.6} {:>10.6} {:>10.6}",
                mec_optimal_error_with_prior(n, &prior)?,
                rice_averaged_error(n, &prior, EstimatorKind::PhotonCounting)?,
                rice_averaged_error(n, &prior, EstimatorKind::Heterodyne)?,
            );
        }
    }
    Ok(())
}
