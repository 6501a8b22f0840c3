//! Photon-click simulation of the receivers, checked against their ODEs.

use agnostic_dolinar::agnostic::{terminal_success, AgnosticConfig};
use agnostic_dolinar::dolinar::dolinar_success;
use agnostic_dolinar::telegraph::{
    q_pair_ode, simulate_q_pair, simulate_receiver, AgnosticSchedule, McConfig, OptimalDolinar,
};
use agnostic_dolinar::ComplexAmplitude;

fn main() -> agnostic_dolinar::Result<()> {
    let mc = McConfig::new(200_000, 4000, 7)?;

    let dolinar = OptimalDolinar { p_plus: 0.5, alpha: ComplexAmplitude::real(0.625) };
    let r = simulate_receiver(&dolinar, mc, 0.5)?;
    let exact = dolinar_success(0.5, 0.5, 0.390625, 1.0)?;
    println!("dolinar   mc {:.5} +- {:.5}  exact {exact:.5}  z {:.2}", r.success_rate, r.std_error, r.z_score(exact));

    let agnostic = AgnosticSchedule::calibrated(8, 0.25, 1000)?;
    let r = simulate_receiver(&agnostic, mc, 0.5)?;
    let ode = terminal_success(&AgnosticConfig::calibrated(8, 0.25)?, 1000)?;
    println!("agnostic  mc {:.5} +- {:.5}  ode {ode:.5}  z {:.2}", r.success_rate, r.std_error, r.z_score(ode));

    // Probability that the receiver currently favours the right answer,
    // conditioned on each hypothesis.
    let checkpoints = [0.1, 0.5, 1.0];
    let sim = simulate_q_pair(&agnostic, mc, &checkpoints)?;
    let ode = q_pair_ode(&agnostic, &checkpoints, 1000)?;
    for (s, o) in sim.iter().zip(&ode) {
        println!("t = {:<4} q+ {:.4} ({:.4})  q- {:.4} ({:.4})", s.t, s.q_plus, o.q_plus, s.q_minus, o.q_minus);
    }
    Ok(())
}
