//! Averages a random channel over the cloner symmetry group and shows that
//! the result lies in the nine-element invariant span, with the fidelity
//! unchanged.

use qcm::cloners::{process_fidelity_analytic, IdealMapKind};
use qcm::invariant_bases::BasisFamily;
use qcm::oracle_mc::{quadrature_twirl_check, random_channel, sample_rng};
use qcm::qcore::{ChannelChoi, DenseOperator, SystemShape};
use qcm::symmetry::{average_choi, phase_twirl, AveragingSpec, PhaseSignature};

fn main() -> qcm::Result<()> {
    let d = 3;
    let out = SystemShape::uniform(d, 2)?;
    let channel = random_channel(d, &out, 2, &mut sample_rng(3, 0))?;
    let averaged = average_choi(channel.choi(), &AveragingSpec::cloner())?;
    let smoothed = ChannelChoi::new(d, out, averaged.clone())?;

    let kind = IdealMapKind::PhaseCloner;
    println!("fidelity before {:.12}", process_fidelity_analytic(&channel, kind)?);
    println!("fidelity after  {:.12}", process_fidelity_analytic(&smoothed, kind)?);

    // Only the real part is expanded; see the crate docs on the X4 orbit.
    let real = DenseOperator::new(averaged.shape().clone(), averaged.matrix().map(|z| z.re.into()))?;
    let family = BasisFamily::cloner9(d)?;
    let (x, residual) = family.project(&real)?;
    println!("coefficients {:.5?}", x.x());
    println!("span residual {residual:.1e}, trace condition a·x = {:.12}", family.trace_value(&x)?);

    let exact = phase_twirl(channel.choi(), &PhaseSignature::cloner())?;
    let quad = quadrature_twirl_check(channel.choi(), &PhaseSignature::cloner(), 7)?;
    println!("quadrature vs exact twirl {:.1e}", quad.max_abs_diff(&exact));
    Ok(())
}
