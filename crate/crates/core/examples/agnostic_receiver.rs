//! Agnostic Dolinar receiver: the control law, its trajectory and the
//! three ways of computing the terminal success probability.

use agnostic_dolinar::agnostic::{
    agnostic_ode_solve, invert_implicit, optimal_control, terminal_success, AgnosticConfig, ControlTrajectory,
};
use agnostic_dolinar::bounds::mec_optimal_error;

fn main() -> agnostic_dolinar::Result<()> {
    let (n, a2) = (8u32, 0.25);
    let cfg = AgnosticConfig::calibrated(n, a2)?;
    let sol = agnostic_ode_solve(&cfg, 1000)?;
    let control = ControlTrajectory::optimal(n, a2, 1000)?;
    for t in [0.0, 0.1, 0.3, 0.6, 1.0] {
        let xi = sol.at(t) - 0.5;
        println!("t = {t:<4} P_c = {:.6}  theta = {:.5} (law {:.5})", sol.at(t), control.theta_at(t), optimal_control(xi, n));
    }
    println!("ode       {:.10}", sol.terminal());
    println!("implicit  {:.10}", 0.5 + invert_implicit(1.0, a2, n)?);
    println!("joint rk4 {:.10}", terminal_success(&cfg, 1000)?);

    // The receiver approaches the bound as training copies accumulate.
    for n in [1u32, 4, 16, 64] {
        let pe = 1.0 - terminal_success(&AgnosticConfig::calibrated(n, a2)?, 1000)?;
        println!("n = {n:<3} agnostic {pe:.6}  bound {:.6}", mec_optimal_error(n, a2)?);
    }
    Ok(())
}
