//! Hybrid cloner followed by an optimal transpose on one output. Prints the
//! composite fidelity, the hand-derived value, the stated value and the
//! direct optimum.

use qcm::cloners::{closed_form_fidelity, process_fidelity_analytic, IdealMapKind};
use qcm::composition::{
    derived_modular_cloner_fidelity, derived_modular_transpose_fidelity, modular_cloner, modular_transpose_cloner,
    stated_modular_fidelity,
};

fn main() -> qcm::Result<()> {
    println!("variant           d  composite  derived    stated     direct");
    for d in 2..=5 {
        let fc = process_fidelity_analytic(&modular_cloner(d)?, IdealMapKind::PhaseCloner)?;
        let ft = process_fidelity_analytic(&modular_transpose_cloner(d)?, IdealMapKind::PhaseTransposeCloner)?;
        let stated = stated_modular_fidelity(d);
        println!(
            "cloner            {d}  {fc:.6}   {:.6}   {stated:.6}   {:.6}",
            derived_modular_cloner_fidelity(d),
            closed_form_fidelity(IdealMapKind::PhaseCloner, d)?
        );
        println!(
            "transpose-cloner  {d}  {ft:.6}   {:.6}   {stated:.6}   {:.6}",
            derived_modular_transpose_fidelity(d),
            closed_form_fidelity(IdealMapKind::PhaseTransposeCloner, d)?
        );
    }
    Ok(())
}
