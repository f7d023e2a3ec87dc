//! Single-copy fidelity of the process-optimal cloner next to the
//! best phase-covariant value and the value `(d+1)/(2d−1)` quoted for it.

use qcm::cloners::{
    claimed_single_qudit_fidelity, optimal_channel, phase_covariant_single_optimum, single_qudit_fidelity,
    IdealMapKind,
};

fn main() -> qcm::Result<()> {
    for d in 2..=4 {
        let channel = optimal_channel(IdealMapKind::PhaseCloner, d)?;
        let est = single_qudit_fidelity(&channel, 100_000, 42)?;
        println!(
            "d={d}  measured {:.6} ± {:.1e}   (d+1)/(2d−1) = {:.6}   single-copy optimum {:.6}",
            est.mean,
            est.stderr,
            claimed_single_qudit_fidelity(d),
            phase_covariant_single_optimum(d)
        );
    }
    Ok(())
}
