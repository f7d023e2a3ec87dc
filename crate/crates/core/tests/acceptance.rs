//! Acceptance criteria 1–10, one PASS/FAIL line each. Every criterion is
//! evaluated before the final assertion so a failure never hides the rest.
//! Run with `--nocapture` to see the lines.

mod common;

use std::time::Instant;

use common::random_cptp;
use qcm::cloners::{
    claimed_single_qudit_fidelity, closed_form_fidelity, optimal_channel, phase_covariant_single_optimum,
    process_fidelity_analytic, single_qudit_fidelity, IdealMapKind,
};
use qcm::composition::{modular_cloner, modular_transpose_cloner, stated_modular_fidelity};
use qcm::invariant_bases::FamilyKind;
use qcm::oracle_mc::{mc_process_fidelity, quadrature_twirl_check, random_phases, sample_rng, SamplerConfig};
use qcm::qcore::{apply_channel, fidelity_pure, partial_trace, phase_state, DenseOperator, Ket, SystemShape};
use qcm::reduced_sdp::{
    cloner_dual, cloner_primal, ew_linear_program, solve_primal, transpose_cloner_certificates, verify_certificate,
    SdpProblem,
};
use qcm::symmetry::{
    average_choi, basis_permutation_unitary, phase_twirl, subsystem_permutation, AveragingSpec, Permutation,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(problems: Vec<String>, summary: String) -> Outcome {
    if problems.is_empty() {
        Outcome { pass: true, detail: summary }
    } else {
        Outcome { pass: false, detail: format!("{summary}; {}", problems.join("; ")) }
    }
}

fn cloner_optimum() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for d in 2..=6 {
        let want = (2.0 * d as f64 - 1.0) / (d * d) as f64;
        let problem = SdpProblem::build(FamilyKind::Cloner9, d).unwrap();
        let sol = solve_primal(&problem, 1e-8).unwrap();
        if (sol.value - want).abs() > 1e-6 {
            problems.push(format!("d={d} solver {:.9} vs {want:.9}", sol.value));
        }
        let cert = verify_certificate(&problem, &cloner_primal(d).unwrap(), &cloner_dual(d).unwrap()).unwrap();
        worst_gap = worst_gap.max(cert.gap);
        if cert.gap > 1e-9 || cert.primal_min_eig < -1e-9 || cert.dual_min_eig < -1e-9 {
            problems.push(format!("d={d} certificate {}", cert.verdict));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 5.0 {
        problems.push(format!("took {secs:.2} s"));
    }
    outcome(problems, format!("cloner (2d−1)/d², d=2..6, max gap {worst_gap:.1e}, {secs:.2} s"))
}

fn transpose_cloner_optimum() -> Outcome {
    let mut problems = Vec::new();
    for d in 2..=6 {
        let want = if d == 2 { 0.75 } else { 6.0 / (d * d) as f64 };
        let problem = SdpProblem::build(FamilyKind::Transpose6, d).unwrap();
        let sol = solve_primal(&problem, 1e-8).unwrap();
        if (sol.value - want).abs() > 1e-6 {
            problems.push(format!("d={d} solver {:.9} vs {want:.9}", sol.value));
        }
        let (x, dual) = transpose_cloner_certificates(d).unwrap();
        let cert = verify_certificate(&problem, &x, &dual).unwrap();
        if cert.gap > 1e-9 || !cert.verdict.is_optimal() {
            problems.push(format!("d={d} certificate {} gap {:.1e}", cert.verdict, cert.gap));
        }
    }
    outcome(problems, "transpose cloner 3/4 and 6/d², d=2..6".into())
}

fn universal_transpose_cloner() -> Outcome {
    let mut problems = Vec::new();
    for d in 2..=8 {
        let want = 6.0 / (d * d + 3 * d + 2) as f64;
        let lp = ew_linear_program(d).unwrap();
        // "Exact" up to rounding of the two equivalent closed forms.
        if (lp.value - want).abs() > 4.0 * f64::EPSILON * want {
            problems.push(format!("d={d} LP {:e} vs {want:e}", lp.value));
        }
        if lp.coefficients[1..].iter().any(|&c| c != 0.0) {
            problems.push(format!("d={d} optimum is not c₊R₊: {:?}", lp.coefficients));
        }
        let diag = optimal_channel(IdealMapKind::UniversalTransposeCloner, d).unwrap().diagnostics().unwrap();
        if diag.min_eigenvalue < -1e-9 || diag.tp_residual > 1e-9 || diag.hermiticity_residual > 1e-9 {
            problems.push(format!("d={d} channel {diag:?}"));
        }
    }
    outcome(problems, "universal transpose cloner 6/(d²+3d+2), d=2..8".into())
}

fn transpose_map() -> Outcome {
    let mut problems = Vec::new();
    for d in 2..=6 {
        let f = process_fidelity_analytic(&optimal_channel(IdealMapKind::PhaseTranspose, d).unwrap(), IdealMapKind::PhaseTranspose)
            .unwrap();
        if (f - 2.0 / d as f64).abs() > 1e-10 {
            problems.push(format!("d={d} F={f:.12}"));
        }
    }
    let channel = optimal_channel(IdealMapKind::PhaseTranspose, 2).unwrap();
    let mut rng = sample_rng(42, 0);
    let mut worst: f64 = 1.0;
    for _ in 0..20 {
        let theta = random_phases(2, &mut rng);
        let out = apply_channel(&channel, &DenseOperator::projector(&phase_state(&theta).unwrap())).unwrap();
        let conj = phase_state(&theta.iter().map(|t| -t).collect::<Vec<_>>()).unwrap();
        worst = worst.min(fidelity_pure(&conj, &out));
    }
    if worst < 1.0 - 1e-10 {
        problems.push(format!("qubit conjugation fidelity {worst:.12}"));
    }
    outcome(problems, format!("transpose 2/d, d=2..6; worst qubit conjugate fidelity 1−{:.1e}", 1.0 - worst))
}

fn hybrid_equivalence() -> Outcome {
    let mut problems = Vec::new();
    let swap = Permutation::transposition(3, 0, 2).unwrap();
    for d in 2..=4 {
        let cloner = optimal_channel(IdealMapKind::PhaseCloner, d).unwrap();
        let hybrid = optimal_channel(IdealMapKind::Hybrid, d).unwrap();
        let fc = process_fidelity_analytic(&cloner, IdealMapKind::PhaseCloner).unwrap();
        let fh = process_fidelity_analytic(&hybrid, IdealMapKind::Hybrid).unwrap();
        if (fc - fh).abs() > 1e-10 {
            problems.push(format!("d={d} {fh} vs {fc}"));
        }
        let v = subsystem_permutation(&swap, d).unwrap();
        let diff = cloner.choi().conjugate_by(&v).unwrap().max_abs_diff(hybrid.choi());
        if diff > 1e-12 {
            problems.push(format!("d={d} swap identity off by {diff:.1e}"));
        }
    }
    outcome(problems, "hybrid equals cloner up to swapping input and second output, d=2..4".into())
}

fn modular_values() -> Vec<(usize, f64, f64, f64)> {
    (2..=5)
        .map(|d| {
            let fc = process_fidelity_analytic(&modular_cloner(d).unwrap(), IdealMapKind::PhaseCloner).unwrap();
            let ft = process_fidelity_analytic(&modular_transpose_cloner(d).unwrap(), IdealMapKind::PhaseTransposeCloner)
                .unwrap();
            (d, fc, ft, stated_modular_fidelity(d))
        })
        .collect()
}

fn modular_composition() -> Outcome {
    let mut problems = Vec::new();
    for (d, fc, ft, stated) in modular_values() {
        if (fc - stated).abs() > 1e-9 || (ft - stated).abs() > 1e-9 {
            problems.push(format!("d={d} composites {fc:.6}, {ft:.6} vs stated {stated:.6}"));
        }
    }
    outcome(problems, "modular circuits vs (3d−4)/(d(d−1)(2d−1)), d=2..5".into())
}

fn oracle_agreement() -> Outcome {
    let mut problems = Vec::new();
    let mut slowest: f64 = 0.0;
    let mut largest_err: f64 = 0.0;
    for kind in IdealMapKind::ALL {
        for d in 2..=3 {
            let start = Instant::now();
            let channel = optimal_channel(kind, d).unwrap();
            let exact = process_fidelity_analytic(&channel, kind).unwrap();
            let cfg = SamplerConfig::for_kind(kind, 42, 100_000).unwrap();
            let est = mc_process_fidelity(&channel, kind, &cfg).unwrap();
            let secs = start.elapsed().as_secs_f64();
            slowest = slowest.max(secs);
            largest_err = largest_err.max(est.stderr);
            if !est.agrees_with(exact, 3.0) || est.stderr > 2e-3 || secs >= 30.0 {
                problems.push(format!("{kind} d={d}: {} ± {:.1e} vs {exact}, {secs:.1} s", est.mean, est.stderr));
            }
        }
    }
    outcome(problems, format!("Monte Carlo 1e5 samples, seed 42, max stderr {largest_err:.1e}, slowest {slowest:.2} s"))
}

fn optimality_bound() -> Outcome {
    let mut problems = Vec::new();
    let mut closest = f64::NEG_INFINITY;
    for kind in IdealMapKind::ALL {
        for d in 2..=3 {
            let best = closed_form_fidelity(kind, d).unwrap();
            for seed in 0..50u64 {
                let rank = 1 + (seed as usize % 4);
                let ch = random_cptp(d, kind.num_outputs(), rank, 10_000 * d as u64 + seed);
                let f = process_fidelity_analytic(&ch, kind).unwrap();
                closest = closest.max(f - best);
                if f > best + 1e-8 {
                    problems.push(format!("{kind} d={d} seed {seed}: {f} > {best}"));
                }
            }
        }
    }
    outcome(problems, format!("50 random channels per problem, d=2,3, max F − optimum {closest:.3}"))
}

fn symmetry_violations(spec: &AveragingSpec, d: usize, seed: u64) -> Vec<String> {
    let mut problems = Vec::new();
    let n = spec.signature().num_factors();
    let ch = random_cptp(d, n - 1, 2, seed);
    let avg = average_choi(ch.choi(), spec).unwrap();
    let off = |u: &DenseOperator| avg.conjugate_by(u).unwrap().max_abs_diff(&avg);
    let mut rng = sample_rng(seed, 1);
    for _ in 0..20 {
        let u = spec.signature().phase_operator(&random_phases(d, &mut rng)).unwrap();
        if off(&u) > 1e-9 {
            problems.push(format!("d={d} phase"));
        }
    }
    for pi in Permutation::all(d) {
        let one = basis_permutation_unitary(&pi).unwrap();
        let u = one.tensor(&one).unwrap().tensor(&one).unwrap();
        if off(&u) > 1e-9 {
            problems.push(format!("d={d} relabeling {:?}", pi.images()));
        }
    }
    for sigma in spec.subsystem_group() {
        if off(&subsystem_permutation(sigma, d).unwrap()) > 1e-9 {
            problems.push(format!("d={d} subsystem {:?}", sigma.images()));
        }
    }
    if avg.min_eigenvalue() < -1e-9 {
        problems.push(format!("d={d} not PSD"));
    }
    let eye = DenseOperator::identity(SystemShape::new(vec![d]).unwrap());
    if partial_trace(&avg, &[0]).unwrap().max_abs_diff(&eye) > 1e-9 {
        problems.push(format!("d={d} output trace"));
    }
    let phi = Ket::phi_plus(d).unwrap().tensor_power(3).unwrap();
    let twirled = phase_twirl(ch.choi(), spec.signature()).unwrap();
    if (phi.expectation(&avg) - phi.expectation(&twirled)).norm() > 1e-9 {
        problems.push(format!("d={d} fidelity moved"));
    }
    let quad = quadrature_twirl_check(ch.choi(), spec.signature(), 32).unwrap();
    if quad.max_abs_diff(&twirled) > 1e-9 {
        problems.push(format!("d={d} quadrature twirl"));
    }
    problems
}

fn symmetry_suite() -> Outcome {
    let mut problems = Vec::new();
    for d in 2..=3 {
        for seed in 0..10 {
            problems.extend(symmetry_violations(&AveragingSpec::cloner(), d, seed));
            problems.extend(symmetry_violations(&AveragingSpec::transpose_cloner(), d, 50 + seed));
        }
    }
    outcome(problems, "averaged Choi symmetries, PSD, marginals and twirl quadrature, d=2,3".into())
}

fn single_qudit_report() -> Outcome {
    let mut problems = Vec::new();
    let mut cells = Vec::new();
    for d in 2..=4 {
        let channel = optimal_channel(IdealMapKind::PhaseCloner, d).unwrap();
        let est = single_qudit_fidelity(&channel, 100_000, 42).unwrap();
        let table = phase_covariant_single_optimum(d);
        cells.push(format!(
            "d={d}: measured {:.6}±{:.1e}, printed {:.6}, optimum {table:.6}",
            est.mean,
            est.stderr,
            claimed_single_qudit_fidelity(d)
        ));
        if est.stderr > 2e-3 || !est.mean.is_finite() {
            problems.push(format!("d={d} stderr {:.1e}", est.stderr));
        }
    }
    outcome(problems, cells.join(" | "))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("cloner optimum", cloner_optimum),
        ("transpose cloner optimum", transpose_cloner_optimum),
        ("universal transpose cloner", universal_transpose_cloner),
        ("transpose map", transpose_map),
        ("hybrid equivalence", hybrid_equivalence),
        ("modular composition", modular_composition),
        ("oracle agreement", oracle_agreement),
        ("optimality bound", optimality_bound),
        ("symmetry suite", symmetry_suite),
        ("single-qudit report", single_qudit_report),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", k + 1, o.detail);
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

/// Both modular circuits are claimed to reach the same fidelity. Only d = 2
/// bears this out: the transpose step mixes in a different hybrid marginal
/// in each wiring, and the two marginals differ once d > 2.
#[test]
fn modular_circuits_reach_the_same_fidelity() {
    let mismatches: Vec<String> = modular_values()
        .into_iter()
        .filter(|(_, fc, ft, _)| (fc - ft).abs() > 1e-9)
        .map(|(d, fc, ft, _)| format!("d={d}: cloner {fc:.9}, transpose cloner {ft:.9}"))
        .collect();
    assert!(mismatches.is_empty(), "{}", mismatches.join("; "));
}
