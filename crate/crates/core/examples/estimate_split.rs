//! Spend m of n copies estimating |α|, then run the agnostic receiver on
//! the rest, calibrated to the estimate.

use agnostic_dolinar::estimate::{apriori_m, split_performance, EstimatorKind, SplitConfig};
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    let n = 15;
    let alpha = ComplexAmplitude::real(0.54);
    println!("n = {n}, |a| = 0.54, a-priori m = {}", apriori_m(n)?);
    println!("{:>3} {:>12} {:>12}", "m", "photon", "heterodyne");
    for m in 0..n {
        let split = SplitConfig::new(n, m)?;
        let ph = split_performance(alpha, split, EstimatorKind::PhotonCounting)?;
        let het = split_performance(alpha, split, EstimatorKind::Heterodyne)?;
        println!("{m:>3} {ph:>12.8} {het:>12.8}");
    }
    Ok(())
}
