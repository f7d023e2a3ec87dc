//! Builds each optimal channel as a Choi matrix, checks it is CPTP, and
//! shows what the qubit cloner does to an equatorial state.

use qcm::cloners::{closed_form_fidelity, optimal_channel, process_fidelity_analytic, IdealMapKind};
use qcm::qcore::{apply_channel, partial_trace, phase_state, DenseOperator};

fn main() -> qcm::Result<()> {
    for kind in IdealMapKind::ALL {
        let d = 3;
        let channel = optimal_channel(kind, d)?;
        let diag = channel.diagnostics()?;
        println!(
            "{:<28} cptp={} min eig {:+.1e} tp residual {:.1e}  F = {:.6} (closed form {:.6})",
            kind.slug(),
            diag.is_cptp(),
            diag.min_eigenvalue,
            diag.tp_residual,
            process_fidelity_analytic(&channel, kind)?,
            closed_form_fidelity(kind, d)?
        );
    }

    let cloner = optimal_channel(IdealMapKind::PhaseCloner, 2)?;
    let psi = phase_state(&[0.0, 0.7])?;
    let out = apply_channel(&cloner, &DenseOperator::projector(&psi))?;
    let copy = partial_trace(&out, &[0])?;
    println!("\nqubit copy of (|0⟩ + e^0.7i|1⟩)/√2:\n{:.4}", copy.matrix());
    Ok(())
}
