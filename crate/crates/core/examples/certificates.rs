//! Verifies the closed-form primal/dual pairs. A zero gap between two
//! feasible points proves optimality without trusting any solver.

use qcm::invariant_bases::FamilyKind;
use qcm::reduced_sdp::{known_certificates, verify_certificate, SdpProblem};

fn main() -> qcm::Result<()> {
    let kinds = [FamilyKind::Cloner9, FamilyKind::Transpose6, FamilyKind::Transpose3, FamilyKind::Hybrid9, FamilyKind::EwR];
    for kind in kinds {
        for d in 2..=6 {
            let problem = SdpProblem::build(kind, d)?;
            let (x, dual) = known_certificates(kind, d)?;
            let cert = verify_certificate(&problem, &x, &dual)?;
            println!(
                "{kind:<11} d={d}  value {:.8}  gap {:.1e}  min eig primal {:+.1e} dual {:+.1e}  {}",
                cert.primal_value, cert.gap, cert.primal_min_eig, cert.dual_min_eig, cert.verdict
            );
        }
    }
    Ok(())
}
