//! Solves every reduced problem with the barrier method and compares the
//! optimum with its closed form.

use qcm::cloners::{closed_form_fidelity, IdealMapKind};
use qcm::reduced_sdp::{ew_linear_program, solve_primal, SdpProblem};

fn main() -> qcm::Result<()> {
    for kind in IdealMapKind::ALL {
        for d in 2..=5 {
            let value = if kind == IdealMapKind::UniversalTransposeCloner {
                ew_linear_program(d)?.value
            } else {
                let sol = solve_primal(&SdpProblem::build(kind.family(), d)?, 1e-9)?;
                println!("  {} d={d}: {} Newton steps, gap bound {:.1e}", kind.slug(), sol.newton_steps, sol.barrier_gap);
                sol.value
            };
            let exact = closed_form_fidelity(kind, d)?;
            println!("{:<28} d={d}  sdp {value:.9}  closed form {exact:.9}", kind.slug());
        }
    }
    Ok(())
}
