mod common;

use common::{random_cptp, real_part};
use proptest::prelude::*;
use qcm::cloners::{closed_form_fidelity, IdealMapKind};
use qcm::invariant_bases::{BasisFamily, FamilyKind};
use qcm::reduced_sdp::{known_certificates, solve_primal, verify_certificate, SdpProblem};
use qcm::symmetry::average_choi;

const SOLVED: [IdealMapKind; 4] =
    [IdealMapKind::PhaseCloner, IdealMapKind::PhaseTransposeCloner, IdealMapKind::PhaseTranspose, IdealMapKind::Hybrid];

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    /// A feasible point built from an actual channel never beats the dual
    /// certificate.
    #[test]
    fn weak_duality(k in 0usize..4, d in 2usize..=4, seed in any::<u64>()) {
        let kind = SOLVED[k];
        let fam = BasisFamily::build(kind.family(), d).unwrap();
        let spec = fam.averaging_spec().unwrap();
        let avg = average_choi(random_cptp(d, kind.num_outputs(), 3, seed).choi(), &spec).unwrap();
        let (x, _) = fam.project(&real_part(&avg)).unwrap();
        prop_assert!(fam.assemble(&x).unwrap().min_eigenvalue() >= -1e-9);
        let (_, dual) = known_certificates(kind.family(), d).unwrap();
        prop_assert!(fam.objective(&x).unwrap() <= dual.z + 1e-9);
    }
}

#[test]
fn solver_lands_between_the_bounds() {
    for kind in SOLVED {
        for d in 2..=6 {
            let problem = SdpProblem::build(kind.family(), d).unwrap();
            let sol = solve_primal(&problem, 1e-8).unwrap();
            let (_, dual) = known_certificates(kind.family(), d).unwrap();
            let closed = closed_form_fidelity(kind, d).unwrap();
            assert!(sol.value >= closed - 1e-6, "{kind} d={d}: {} < {closed}", sol.value);
            assert!(sol.value <= dual.z + 1e-6, "{kind} d={d}: {} > {}", sol.value, dual.z);
            assert!(sol.min_eig >= -1e-9);
        }
    }
}

#[test]
fn solver_is_deterministic() {
    for kind in [FamilyKind::Cloner9, FamilyKind::Transpose6] {
        let problem = SdpProblem::build(kind, 4).unwrap();
        let a = solve_primal(&problem, 1e-8).unwrap();
        let b = solve_primal(&problem, 1e-8).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.point, b.point);
    }
}

#[test]
fn closed_form_certificates_verify() {
    for kind in [FamilyKind::Cloner9, FamilyKind::Transpose6, FamilyKind::Transpose3, FamilyKind::Hybrid9, FamilyKind::EwR] {
        for d in 2..=8 {
            let problem = SdpProblem::build(kind, d).unwrap();
            let (x, dual) = known_certificates(kind, d).unwrap();
            let cert = verify_certificate(&problem, &x, &dual).unwrap();
            assert!(cert.verdict.is_optimal(), "{kind} d={d}: {}", cert.verdict);
        }
    }
}

#[test]
fn a_shifted_dual_is_rejected() {
    let problem = SdpProblem::build(FamilyKind::Cloner9, 3).unwrap();
    let (x, mut dual) = known_certificates(FamilyKind::Cloner9, 3).unwrap();
    dual.z -= 1e-3;
    let cert = verify_certificate(&problem, &x, &dual).unwrap();
    assert!(!cert.verdict.is_optimal());
}
