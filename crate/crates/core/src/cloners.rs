//! Ideal maps, their optimal channels and closed-form fidelities.

use std::fmt;

use crate::error::{Error, Result};
use crate::invariant_bases::{BasisFamily, FamilyKind};
use crate::oracle_mc::{estimate, Estimate};
use crate::qcore::{
    apply_channel, fidelity_pure, partial_trace, phase_state, ChannelChoi, DenseOperator, Ket, SystemShape, MAX_DIM,
};
use crate::reduced_sdp::known_certificates;
use crate::symmetry::{phase_twirl, PhaseSignature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealMapKind {
    /// `|θ⟩ ↦ |θ⟩ ⊗ |θ⟩`.
    PhaseCloner,
    /// `|θ⟩ ↦ |−θ⟩`.
    PhaseTranspose,
    /// `|θ⟩ ↦ |−θ⟩ ⊗ |−θ⟩`.
    PhaseTransposeCloner,
    /// One plain and one transposed copy. Outputs are stored as
    /// `(|−θ⟩, |θ⟩)`: the swap of the input with the second output maps the
    /// cloner's symmetry group onto exactly this ordering.
    Hybrid,
    /// `ρ ↦ ρᵀ ⊗ ρᵀ` on all pure states.
    UniversalTransposeCloner,
}

impl IdealMapKind {
    pub const ALL: [IdealMapKind; 5] = [
        IdealMapKind::PhaseCloner,
        IdealMapKind::PhaseTranspose,
        IdealMapKind::PhaseTransposeCloner,
        IdealMapKind::Hybrid,
        IdealMapKind::UniversalTransposeCloner,
    ];

    pub fn family(self) -> FamilyKind {
        match self {
            IdealMapKind::PhaseCloner => FamilyKind::Cloner9,
            IdealMapKind::PhaseTranspose => FamilyKind::Transpose3,
            IdealMapKind::PhaseTransposeCloner => FamilyKind::Transpose6,
            IdealMapKind::Hybrid => FamilyKind::Hybrid9,
            IdealMapKind::UniversalTransposeCloner => FamilyKind::EwR,
        }
    }

    pub fn num_outputs(self) -> usize {
        match self {
            IdealMapKind::PhaseTranspose => 1,
            _ => 2,
        }
    }

    /// Sign of the phase carried by each output copy; `−1` marks `|−θ⟩`.
    pub fn output_signs(self) -> &'static [i8] {
        match self {
            IdealMapKind::PhaseCloner => &[1, 1],
            IdealMapKind::PhaseTranspose => &[-1],
            IdealMapKind::PhaseTransposeCloner | IdealMapKind::UniversalTransposeCloner => &[-1, -1],
            IdealMapKind::Hybrid => &[-1, 1],
        }
    }

    pub fn is_phase_covariant(self) -> bool {
        self != IdealMapKind::UniversalTransposeCloner
    }

    /// Phase signature of the twirl that leaves the process fidelity fixed:
    /// the input is conjugated, each output carries its own sign.
    pub fn signature(self) -> PhaseSignature {
        let mut signs = vec![-1];
        signs.extend_from_slice(self.output_signs());
        PhaseSignature::new(signs).expect("static signs are ±1")
    }

    pub fn slug(self) -> &'static str {
        match self {
            IdealMapKind::PhaseCloner => "phase-cloner",
            IdealMapKind::PhaseTranspose => "phase-transpose",
            IdealMapKind::PhaseTransposeCloner => "transpose-cloner",
            IdealMapKind::Hybrid => "hybrid",
            IdealMapKind::UniversalTransposeCloner => "universal-transpose-cloner",
        }
    }

    pub fn from_slug(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.slug() == s)
            .ok_or_else(|| Error::Usage(format!("unknown problem '{s}'")))
    }

    /// The ideal output for a pure input `|ψ⟩`. Phase-covariant maps are
    /// only defined on phase states, and there `|ψ⟩` with conjugated
    /// amplitudes is `|−θ⟩`.
    pub fn ideal_output(self, psi: &Ket) -> Result<Ket> {
        let conj = Ket::new(psi.shape().clone(), psi.amplitudes().map(|z| z.conj()))?;
        let mut out: Option<Ket> = None;
        for &s in self.output_signs() {
            let copy = if s < 0 { &conj } else { psi };
            out = Some(match out {
                None => copy.clone(),
                Some(acc) => acc.tensor(copy)?,
            });
        }
        Ok(out.expect("at least one output"))
    }
}

impl fmt::Display for IdealMapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Dimension(format!("local dimension must be at least 2, got {d}")));
    }
    if d > MAX_DIM {
        return Err(Error::DimensionCap(d));
    }
    Ok(())
}

/// The process-optimal channel, assembled from the certified primal point.
pub fn optimal_channel(kind: IdealMapKind, d: usize) -> Result<ChannelChoi> {
    check_dim(d)?;
    let family = BasisFamily::build(kind.family(), d)?;
    let (x, _) = known_certificates(kind.family(), d)?;
    let j = family.assemble(&x)?;
    ChannelChoi::new(d, SystemShape::uniform(d, kind.num_outputs())?, j)
}

pub fn closed_form_fidelity(kind: IdealMapKind, d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    Ok(match kind {
        IdealMapKind::PhaseCloner | IdealMapKind::Hybrid => (2.0 * df - 1.0) / (df * df),
        IdealMapKind::PhaseTranspose => 2.0 / df,
        IdealMapKind::PhaseTransposeCloner if d == 2 => 0.75,
        IdealMapKind::PhaseTransposeCloner => 6.0 / (df * df),
        IdealMapKind::UniversalTransposeCloner => 6.0 / ((df + 1.0) * (df + 2.0)),
    })
}

fn check_shape(channel: &ChannelChoi, kind: IdealMapKind) -> Result<usize> {
    let d = channel.d_in();
    if channel.d_out() != &SystemShape::uniform(d, kind.num_outputs())? {
        return Err(Error::Dimension(format!(
            "{kind} needs {} outputs of dimension {d}, channel has {:?}",
            kind.num_outputs(),
            channel.d_out().dims()
        )));
    }
    Ok(d)
}

/// Exact process fidelity against `kind`'s ideal map.
///
/// Phase-covariant kinds use `tr[φ⁺^{⊗n} T(J)]`, where `T` is the phase
/// twirl; the remaining relabeling and factor averages leave `φ⁺^{⊗n}`
/// fixed. The universal kind projects `J` onto the `U^{⊗3}`-invariant span
/// and reads off the `R₊` coefficient, which equals `⟨000|J̃|000⟩`.
pub fn process_fidelity_analytic(channel: &ChannelChoi, kind: IdealMapKind) -> Result<f64> {
    let d = check_shape(channel, kind)?;
    let j = channel.choi();
    if kind.is_phase_covariant() {
        let twirled = phase_twirl(j, &kind.signature())?;
        let phi = Ket::phi_plus(d)?.tensor_power(kind.num_outputs() + 1)?;
        return Ok(phi.expectation(&twirled).re);
    }
    let family = BasisFamily::ew_r(d)?;
    let (x, _) = family.project(j)?;
    family.objective(&x)
}

/// Average over uniform phase states of
/// `½[F(ρ_θ, tr₂E(ρ_θ)) + F(ρ_θ, tr₁E(ρ_θ))]`.
pub fn single_qudit_fidelity(channel: &ChannelChoi, samples: usize, seed: u64) -> Result<Estimate> {
    let d = channel.d_in();
    if channel.d_out() != &SystemShape::uniform(d, 2)? {
        return Err(Error::Dimension("single-qudit fidelity needs a 1 → 2 channel".into()));
    }
    estimate(samples, seed, |rng| {
        let theta = crate::oracle_mc::random_phases(d, rng);
        let psi = phase_state(&theta)?;
        let out = apply_channel(channel, &DenseOperator::projector(&psi))?;
        let first = fidelity_pure(&psi, &partial_trace(&out, &[0])?);
        let second = fidelity_pure(&psi, &partial_trace(&out, &[1])?);
        Ok(0.5 * (first + second))
    })
}

/// Whether a table value is produced by this crate or quoted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Computed,
    Cited,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReferenceConstant {
    /// Row label, e.g. `"1→2 qudits, phase covariant"`.
    pub row: String,
    /// `"single"` or `"process"`.
    pub quantity: String,
    pub formula: String,
    pub d: usize,
    pub value: f64,
    pub provenance: Provenance,
}

/// Table rows applicable to `d`: qubit and qutrit rows only at their own
/// dimension, qudit rows everywhere. Only the phase-covariant process
/// fidelities are reproduced by this crate.
pub fn reference_table(d_values: &[usize]) -> Result<Vec<ReferenceConstant>> {
    let mut out = Vec::new();
    for &d in d_values {
        check_dim(d)?;
        let df = d as f64;
        let mut push = |row: &str, quantity: &str, formula: &str, value: f64, provenance| {
            out.push(ReferenceConstant {
                row: row.into(),
                quantity: quantity.into(),
                formula: formula.into(),
                d,
                value,
                provenance,
            })
        };
        use Provenance::{Cited, Computed};
        if d == 2 {
            push("1→2 qubits, universal", "single", "5/6", 5.0 / 6.0, Cited);
            push("1→2 qubits, universal", "process", "2/3", 2.0 / 3.0, Cited);
        }
        push("1→2 qudits, universal", "single", "(d+3)/(2d+2)", (df + 3.0) / (2.0 * df + 2.0), Cited);
        push("1→2 qudits, universal", "process", "2/(d+1)", 2.0 / (df + 1.0), Cited);
        if d == 2 {
            push("1→2 qubits, phase covariant", "single", "1/2 + 1/√8", 0.5 + 1.0 / 8f64.sqrt(), Cited);
            push("1→2 qubits, phase covariant", "process", "0.75", 0.75, Computed);
        }
        if d == 3 {
            push("1→2 qutrits, phase covariant", "single", "(5+√17)/12", (5.0 + 17f64.sqrt()) / 12.0, Cited);
            push("1→2 qutrits, phase covariant", "process", "5/9", 5.0 / 9.0, Computed);
        }
        push(
            "1→2 qudits, phase covariant",
            "single",
            "1/d + (d−2+√(d²+4d−4))/(4d)",
            phase_covariant_single_optimum(d),
            Cited,
        );
        push("1→2 qudits, phase covariant", "process", "(2d−1)/d²", (2.0 * df - 1.0) / (df * df), Computed);
    }
    Ok(out)
}

/// Optimal single-qudit fidelity of a phase-covariant 1 → 2 cloner.
pub fn phase_covariant_single_optimum(d: usize) -> f64 {
    let df = d as f64;
    1.0 / df + (df - 2.0 + (df * df + 4.0 * df - 4.0).sqrt()) / (4.0 * df)
}

/// The single-qudit value `(d+1)/(2d−1)` claimed for the process-optimal
/// cloner. Reported next to measurements, never asserted.
pub fn claimed_single_qudit_fidelity(d: usize) -> f64 {
    let df = d as f64;
    (df + 1.0) / (2.0 * df - 1.0)
}
