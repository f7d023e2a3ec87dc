mod common;

use common::{random_cptp, real_part};
use proptest::prelude::*;
use qcm::invariant_bases::{BasisFamily, FamilyKind};
use qcm::qcore::{partial_trace, DenseOperator, Ket, SystemShape};
use qcm::symmetry::{average_choi, AveragingSpec};

const KINDS: [FamilyKind; 5] =
    [FamilyKind::Cloner9, FamilyKind::Transpose6, FamilyKind::Transpose3, FamilyKind::Hybrid9, FamilyKind::EwR];

#[test]
fn cloner_elements_are_fixed_by_the_average() {
    for d in 2..=4 {
        let fam = BasisFamily::cloner9(d).unwrap();
        for el in fam.elements() {
            let x = el.to_dense(fam.shape()).unwrap();
            let avg = average_choi(&x, &AveragingSpec::cloner()).unwrap();
            assert!(avg.max_abs_diff(&x) <= 1e-12, "{} at d={d}", el.name());
        }
    }
}

#[test]
fn every_symmetric_family_is_fixed_by_its_average() {
    for kind in [FamilyKind::Transpose6, FamilyKind::Transpose3, FamilyKind::Hybrid9] {
        for d in 2..=4 {
            let fam = BasisFamily::build(kind, d).unwrap();
            let spec = fam.averaging_spec().unwrap();
            for el in fam.elements() {
                let x = el.to_dense(fam.shape()).unwrap();
                assert!(average_choi(&x, &spec).unwrap().max_abs_diff(&x) <= 1e-12, "{kind} {}", el.name());
            }
        }
    }
}

fn random_x(kind: FamilyKind, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut r = common::rng(seed);
    (0..kind.len()).map(|_| r.random_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    /// The averaged Choi matrix is complex in general; its real part, which
    /// carries the same fidelity and constraints, lies in the real span.
    #[test]
    fn averaged_channels_lie_in_the_span(d in 2usize..=4, seed in any::<u64>(), transpose in any::<bool>()) {
        let (kind, spec) = if transpose {
            (FamilyKind::Transpose6, AveragingSpec::transpose_cloner())
        } else {
            (FamilyKind::Cloner9, AveragingSpec::cloner())
        };
        let avg = average_choi(random_cptp(d, 2, 2, seed).choi(), &spec).unwrap();
        let fam = BasisFamily::build(kind, d).unwrap();
        let (x, residual) = fam.project(&real_part(&avg)).unwrap();
        prop_assert!(residual <= 1e-9, "residual {residual}");
        prop_assert!(fam.assemble(&x).unwrap().max_abs_diff(&real_part(&avg)) <= 1e-9);
        prop_assert!((fam.trace_value(&x).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn a_is_the_output_trace(k in 0usize..5, d in 2usize..=4, seed in any::<u64>()) {
        let kind = KINDS[k];
        let fam = BasisFamily::build(kind, d).unwrap();
        let x = fam.point(random_x(kind, seed)).unwrap();
        let marginal = partial_trace(&fam.assemble(&x).unwrap(), &[0]).unwrap();
        let want = DenseOperator::identity(SystemShape::new(vec![d]).unwrap()).scale(fam.trace_value(&x).unwrap());
        prop_assert!(marginal.max_abs_diff(&want) <= 1e-10);
    }

    #[test]
    fn c_is_the_overlap_with_the_reference(k in 0usize..5, d in 2usize..=4, seed in any::<u64>()) {
        let kind = KINDS[k];
        let fam = BasisFamily::build(kind, d).unwrap();
        let x = fam.point(random_x(kind, seed)).unwrap();
        let j = fam.assemble(&x).unwrap();
        let reference = fam.reference_state().unwrap();
        prop_assert!((reference.expectation(&j).re - fam.objective(&x).unwrap()).abs() <= 1e-10);
        if kind != FamilyKind::EwR {
            let phi = Ket::phi_plus(d).unwrap().tensor_power(kind.num_factors()).unwrap();
            prop_assert!((phi.expectation(&j).re - fam.objective(&x).unwrap()).abs() <= 1e-10);
        }
    }
}
