mod common;

use qcm::cloners::{closed_form_fidelity, optimal_channel, IdealMapKind};
use qcm::oracle_mc::{haar_unitary, ks_critical_1pct, ks_statistic, mc_process_fidelity, sample_rng, SamplerConfig};

#[test]
fn same_seed_same_bits() {
    let channel = common::random_cptp(2, 2, 3, 11);
    let cfg = SamplerConfig::for_kind(IdealMapKind::PhaseCloner, 42, 5000).unwrap();
    let a = mc_process_fidelity(&channel, IdealMapKind::PhaseCloner, &cfg).unwrap();
    let b = mc_process_fidelity(&channel, IdealMapKind::PhaseCloner, &cfg).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    let other = mc_process_fidelity(&channel, IdealMapKind::PhaseCloner, &SamplerConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(a.mean.to_bits(), other.mean.to_bits());
}

#[test]
fn estimates_agree_with_the_optimum() {
    for kind in IdealMapKind::ALL {
        for d in 2..=3 {
            let cfg = SamplerConfig::for_kind(kind, 42, 100_000).unwrap();
            let est = mc_process_fidelity(&optimal_channel(kind, d).unwrap(), kind, &cfg).unwrap();
            let exact = closed_form_fidelity(kind, d).unwrap();
            assert!(est.stderr <= 2e-3);
            assert!(est.agrees_with(exact, 3.0), "{kind} d={d}: {} ± {} vs {exact}", est.mean, est.stderr);
        }
    }
}

#[test]
fn haar_measure_is_left_invariant() {
    let d = 3;
    let n = 10_000;
    let v = haar_unitary(d, &mut sample_rng(5, u64::MAX)).unwrap();
    let draw = |seed: u64, rotate: bool| -> Vec<f64> {
        (0..n as u64)
            .map(|k| {
                let u = haar_unitary(d, &mut sample_rng(seed, k)).unwrap();
                let u = if rotate { v.matmul(&u).unwrap() } else { u };
                u.matrix()[(0, 0)].norm_sqr()
            })
            .collect()
    };
    let plain = draw(1, false);
    let rotated = draw(2, true);
    assert!(ks_statistic(&plain, &rotated) < ks_critical_1pct(n, n));
}
