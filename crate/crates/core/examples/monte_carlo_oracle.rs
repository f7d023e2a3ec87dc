//! Brute-force fidelity estimates next to the exact values, for the optimal
//! channels and for a random channel, which has nonzero spread.

use qcm::cloners::{optimal_channel, process_fidelity_analytic, IdealMapKind};
use qcm::oracle_mc::{mc_process_fidelity, random_channel, sample_rng, SamplerConfig};
use qcm::qcore::SystemShape;

fn main() -> qcm::Result<()> {
    let samples = 20_000;
    for kind in IdealMapKind::ALL {
        let channel = optimal_channel(kind, 2)?;
        let est = mc_process_fidelity(&channel, kind, &SamplerConfig::for_kind(kind, 42, samples)?)?;
        let exact = process_fidelity_analytic(&channel, kind)?;
        println!("{:<28} mc {:.6} ± {:.1e}  exact {exact:.6}", kind.slug(), est.mean, est.stderr);
    }

    let kind = IdealMapKind::PhaseCloner;
    let noisy = random_channel(2, &SystemShape::uniform(2, 2)?, 3, &mut sample_rng(7, 0))?;
    let est = mc_process_fidelity(&noisy, kind, &SamplerConfig::for_kind(kind, 42, samples)?)?;
    let exact = process_fidelity_analytic(&noisy, kind)?;
    println!("random channel               mc {:.6} ± {:.1e}  exact {exact:.6}  ({:.1} sigma)", est.mean, est.stderr, (est.mean - exact) / est.stderr);
    Ok(())
}
