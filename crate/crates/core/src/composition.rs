//! Serial composition of channels through one output wire.
//!
//! For `E₁: A → O₀ ⊗ … ⊗ O_{n−1}` and `E₂: O_w → P`, the composite
//! `(id ⊗ E₂ on O_w) ∘ E₁` has Choi operator
//!
//! ```text
//! J[(i, …, p, …), (j, …, p′, …)] = Σ_{w, w′} J₁[(i, …, w, …), (j, …, w′, …)] · J₂[(w, p), (w′, p′)]
//! ```
//!
//! with `P` taking the slot of `O_w`. This is the link product over the
//! shared wire, with the partial transpose absorbed into the index pairing.

use crate::cloners::{optimal_channel, IdealMapKind};
use crate::error::{Error, Result};
use crate::qcore::{apply_channel, partial_transpose, ChannelChoi, CMatrix, DenseOperator, SystemShape, C64};

/// A two-stage circuit, with wire labels carried along so that the two
/// modular circuits cannot be confused.
#[derive(Clone, Debug)]
pub struct WiringSpec {
    pub first: ChannelChoi,
    pub second: ChannelChoi,
    /// Output factor of `first` fed into `second`.
    pub intermediate: usize,
    pub input_label: String,
    /// Labels of `first`'s outputs.
    pub output_labels: Vec<String>,
    /// Label of `second`'s output.
    pub result_label: String,
}

impl WiringSpec {
    pub fn new(first: ChannelChoi, second: ChannelChoi, intermediate: usize) -> Result<Self> {
        let n = first.num_outputs();
        let output_labels = (0..n).map(|k| format!("O{k}")).collect();
        let spec = Self {
            first,
            second,
            intermediate,
            input_label: "A".into(),
            output_labels,
            result_label: "P".into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_labels(mut self, input: &str, outputs: &[&str], result: &str) -> Result<Self> {
        if outputs.len() != self.first.num_outputs() {
            return Err(Error::Dimension(format!(
                "{} output labels for a channel with {} outputs",
                outputs.len(),
                self.first.num_outputs()
            )));
        }
        self.input_label = input.into();
        self.output_labels = outputs.iter().map(|s| s.to_string()).collect();
        self.result_label = result.into();
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let outs = self.first.d_out().dims();
        let w = self.intermediate;
        if w >= outs.len() {
            return Err(Error::Dimension(format!("wire {w} out of range for {} outputs", outs.len())));
        }
        if self.second.d_in() != outs[w] {
            return Err(Error::Dimension(format!(
                "second channel expects dimension {}, wire {w} carries {}",
                self.second.d_in(),
                outs[w]
            )));
        }
        if self.second.num_outputs() != 1 {
            return Err(Error::Dimension("the second channel must have a single output".into()));
        }
        Ok(())
    }

    /// Labels of the composite's outputs.
    pub fn composite_labels(&self) -> Vec<String> {
        let mut labels = self.output_labels.clone();
        labels[self.intermediate] = self.result_label.clone();
        labels
    }

    /// Hybrid `A → C̃ ⊗ B` followed by the transpose `C̃ → C`: a cloner.
    pub fn modular_cloner(d: usize) -> Result<Self> {
        let hybrid = optimal_channel(IdealMapKind::Hybrid, d)?;
        let transpose = optimal_channel(IdealMapKind::PhaseTranspose, d)?;
        Self::new(hybrid, transpose, 0)?.with_labels("A", &["C̃", "B"], "C")
    }

    /// Hybrid `A → C ⊗ B̃` followed by the transpose `B̃ → B`: a transpose
    /// cloner.
    pub fn modular_transpose_cloner(d: usize) -> Result<Self> {
        let hybrid = optimal_channel(IdealMapKind::Hybrid, d)?;
        let transpose = optimal_channel(IdealMapKind::PhaseTranspose, d)?;
        Self::new(hybrid, transpose, 1)?.with_labels("A", &["C", "B̃"], "B")
    }
}

/// Choi operator of the composite, by direct index contraction.
pub fn compose(w: &WiringSpec) -> Result<ChannelChoi> {
    w.validate()?;
    let d_in = w.first.d_in();
    let outs = w.first.d_out().dims();
    let wire = w.intermediate;
    let dw = outs[wire];
    let dp = w.second.d_out().side();

    let mut new_outs = outs.to_vec();
    new_outs[wire] = dp;
    let out_shape = SystemShape::new(new_outs)?;
    let full_new = SystemShape::new([&[d_in][..], out_shape.dims()].concat())?;
    let full_old = SystemShape::new([&[d_in][..], outs].concat())?;
    let j1 = w.first.choi().matrix();
    let j2 = w.second.choi().matrix();
    let slot = wire + 1;

    let side = full_new.side();
    let decoded: Vec<Vec<usize>> = (0..side).map(|i| full_new.digits(i)).collect();
    let mut m = CMatrix::zeros(side, side);
    for c in 0..side {
        let mut col = decoded[c].clone();
        let pc = col[slot];
        for r in 0..side {
            let mut row = decoded[r].clone();
            let pr = row[slot];
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..dw {
                row[slot] = a;
                let ri = full_old.index(&row);
                for b in 0..dw {
                    col[slot] = b;
                    acc += j1[(ri, full_old.index(&col))] * j2[(a * dp + pr, b * dp + pc)];
                }
            }
            col[slot] = pc;
            m[(r, c)] = acc;
        }
    }
    ChannelChoi::new(d_in, out_shape, DenseOperator::new(full_new, m)?)
}

/// The composite's action on one input, routed through the partial
/// transpose form `tr_w[(E₁(ρ))^{T_w} · J₂]` instead of a composite Choi.
pub fn compose_action(w: &WiringSpec, rho: &DenseOperator) -> Result<DenseOperator> {
    w.validate()?;
    let mid = apply_channel(&w.first, rho)?;
    let wire = w.intermediate;
    let pt = partial_transpose(&mid, wire)?;
    let outs = mid.shape().dims().to_vec();
    let dw = outs[wire];
    let dp = w.second.d_out().side();
    let mut new_outs = outs.clone();
    new_outs[wire] = dp;
    let shape = SystemShape::new(new_outs)?;
    let side = shape.side();
    let j2 = w.second.choi().matrix();
    let mut m = CMatrix::zeros(side, side);
    for c in 0..side {
        let mut col = shape.digits(c);
        let pc = col[wire];
        for r in 0..side {
            let mut row = shape.digits(r);
            let pr = row[wire];
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..dw {
                for b in 0..dw {
                    // (M^{T_w})[(…, b, …), (…, a, …)] pairs with J₂[(a, p), (b, p′)].
                    row[wire] = b;
                    col[wire] = a;
                    acc += pt.matrix()[(mid.shape().index(&row), mid.shape().index(&col))]
                        * j2[(a * dp + pr, b * dp + pc)];
                }
            }
            col[wire] = pc;
            m[(r, c)] = acc;
        }
    }
    DenseOperator::new(shape, m)
}

pub fn modular_cloner(d: usize) -> Result<ChannelChoi> {
    compose(&WiringSpec::modular_cloner(d)?)
}

pub fn modular_transpose_cloner(d: usize) -> Result<ChannelChoi> {
    compose(&WiringSpec::modular_transpose_cloner(d)?)
}

/// The value `(3d−4)/(d(d−1)(2d−1))` stated for both modular circuits.
pub fn stated_modular_fidelity(d: usize) -> f64 {
    let df = d as f64;
    (3.0 * df - 4.0) / (df * (df - 1.0) * (2.0 * df - 1.0))
}

/// Fidelity of the hybrid's plain output `|θ⟩` on phase states.
pub fn hybrid_plain_copy_fidelity(d: usize) -> f64 {
    let df = d as f64;
    1.0 / df + (df - 1.0) / (2.0 * df - 1.0)
}

/// Fidelity of the hybrid's conjugate output `|θ̄⟩` on phase states.
pub fn hybrid_conjugate_copy_fidelity(d: usize) -> f64 {
    let df = d as f64;
    1.0 / df + 2.0 * (df - 1.0) / (df * (2.0 * df - 1.0))
}

// The optimal transpose has adjoint `X ↦ (tr X · I + Xᵀ − 2 diag X)/(d−1)`,
// which on a phase projector gives `((1 − 2/d) I + conj)/(d−1)`. Composite
// fidelity is therefore `[F_hyb + (d−2)/d · G]/(d−1)` where `G` is the
// single-copy fidelity of the untouched hybrid output.
fn through_transpose(d: usize, untouched: f64) -> f64 {
    let df = d as f64;
    let f_hybrid = (2.0 * df - 1.0) / (df * df);
    (f_hybrid + (df - 2.0) / df * untouched) / (df - 1.0)
}

/// Process fidelity of the modular cloner, derived by hand.
pub fn derived_modular_cloner_fidelity(d: usize) -> f64 {
    through_transpose(d, hybrid_plain_copy_fidelity(d))
}

/// Process fidelity of the modular transpose cloner, derived by hand.
pub fn derived_modular_transpose_fidelity(d: usize) -> f64 {
    through_transpose(d, hybrid_conjugate_copy_fidelity(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloners::process_fidelity_analytic;
    use crate::oracle_mc::{random_channel, sample_rng};
    use crate::qcore::{choi_from_kraus, partial_trace, Ket};
    use approx::assert_abs_diff_eq;

    fn eye(d: usize) -> CMatrix {
        CMatrix::identity(d, d)
    }

    #[test]
    fn identity_on_the_wire_is_neutral() {
        let mut rng = sample_rng(1, 0);
        let first = random_channel(2, &SystemShape::uniform(2, 2).unwrap(), 2, &mut rng).unwrap();
        for wire in 0..2 {
            let w = WiringSpec::new(first.clone(), ChannelChoi::identity(2).unwrap(), wire).unwrap();
            assert!(compose(&w).unwrap().choi().max_abs_diff(first.choi()) <= 1e-12);
        }
    }

    #[test]
    fn constant_channels() {
        // Reset to |00⟩, then X on the second wire: reset to |01⟩.
        let out = SystemShape::uniform(2, 2).unwrap();
        let kraus: Vec<CMatrix> = (0..2)
            .map(|k| {
                let mut m = CMatrix::zeros(4, 2);
                m[(0, k)] = C64::new(1.0, 0.0);
                m
            })
            .collect();
        let reset = choi_from_kraus(&kraus, out.clone()).unwrap();
        let mut x = CMatrix::zeros(2, 2);
        x[(0, 1)] = C64::new(1.0, 0.0);
        x[(1, 0)] = C64::new(1.0, 0.0);
        let flip = choi_from_kraus(&[x], SystemShape::new(vec![2]).unwrap()).unwrap();
        let comp = compose(&WiringSpec::new(reset, flip, 1).unwrap()).unwrap();
        let rho = DenseOperator::projector(&Ket::basis(SystemShape::new(vec![2]).unwrap(), 1).unwrap());
        let got = apply_channel(&comp, &rho).unwrap();
        let want = DenseOperator::projector(&Ket::basis(out, 1).unwrap());
        assert!(got.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn matches_kraus_composition() {
        let mut rng = sample_rng(2, 0);
        let d = 2;
        let out = SystemShape::uniform(d, 2).unwrap();
        for wire in 0..2 {
            let u = crate::oracle_mc::haar_matrix(8, &mut rng);
            let k1: Vec<CMatrix> = (0..2).map(|k| u.view((4 * k, 0), (4, 2)).into_owned()).collect();
            let v = crate::oracle_mc::haar_matrix(4, &mut rng);
            let k2: Vec<CMatrix> = (0..2).map(|k| v.view((2 * k, 0), (2, 2)).into_owned()).collect();
            let mut kraus = Vec::new();
            for a in &k1 {
                for b in &k2 {
                    let lift = if wire == 0 { b.kronecker(&eye(d)) } else { eye(d).kronecker(b) };
                    kraus.push(lift * a);
                }
            }
            let direct = choi_from_kraus(&kraus, out.clone()).unwrap();
            let w = WiringSpec::new(
                choi_from_kraus(&k1, out.clone()).unwrap(),
                choi_from_kraus(&k2, SystemShape::new(vec![d]).unwrap()).unwrap(),
                wire,
            )
            .unwrap();
            assert!(compose(&w).unwrap().choi().max_abs_diff(direct.choi()) < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_route_agrees() {
        let mut rng = sample_rng(3, 0);
        let w = WiringSpec::modular_cloner(3).unwrap();
        let comp = compose(&w).unwrap();
        for _ in 0..3 {
            let psi = crate::qcore::phase_state(&crate::oracle_mc::random_phases(3, &mut rng)).unwrap();
            let rho = DenseOperator::projector(&psi);
            let a = apply_channel(&comp, &rho).unwrap();
            let b = compose_action(&w, &rho).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-13);
        }
    }

    #[test]
    fn labels_follow_the_wiring() {
        assert_eq!(WiringSpec::modular_cloner(2).unwrap().composite_labels(), vec!["C", "B"]);
        assert_eq!(WiringSpec::modular_transpose_cloner(2).unwrap().composite_labels(), vec!["C", "B"]);
        let first = ChannelChoi::identity(2).unwrap();
        assert!(WiringSpec::new(first.clone(), first.clone(), 1).is_err());
        let big = ChannelChoi::identity(3).unwrap();
        let two = random_channel(2, &SystemShape::uniform(2, 2).unwrap(), 1, &mut sample_rng(0, 0)).unwrap();
        assert!(WiringSpec::new(two, big, 0).is_err());
    }

    #[test]
    fn modular_fidelities_match_the_derived_formula() {
        for d in 2..=5 {
            let fc = process_fidelity_analytic(&modular_cloner(d).unwrap(), IdealMapKind::PhaseCloner).unwrap();
            let ft = process_fidelity_analytic(&modular_transpose_cloner(d).unwrap(), IdealMapKind::PhaseTransposeCloner)
                .unwrap();
            assert_abs_diff_eq!(fc, derived_modular_cloner_fidelity(d), epsilon = 1e-12);
            assert_abs_diff_eq!(ft, derived_modular_transpose_fidelity(d), epsilon = 1e-12);
        }
    }

    #[test]
    fn single_copy_fidelities_of_the_hybrid() {
        for d in 2..=4 {
            let h = optimal_channel(IdealMapKind::Hybrid, d).unwrap();
            let mut rng = sample_rng(9, d as u64);
            // Phase covariance makes both marginals' fidelities independent
            // of θ, so a handful of states suffices.
            for _ in 0..5 {
                let phases = crate::oracle_mc::random_phases(d, &mut rng);
                let psi = crate::qcore::phase_state(&phases).unwrap();
                let neg: Vec<f64> = phases.iter().map(|t| -t).collect();
                let conj = crate::qcore::phase_state(&neg).unwrap();
                let out = apply_channel(&h, &DenseOperator::projector(&psi)).unwrap();
                let plain = crate::qcore::fidelity_pure(&psi, &partial_trace(&out, &[1]).unwrap());
                let flipped = crate::qcore::fidelity_pure(&conj, &partial_trace(&out, &[0]).unwrap());
                assert_abs_diff_eq!(plain, hybrid_plain_copy_fidelity(d), epsilon = 1e-12);
                assert_abs_diff_eq!(flipped, hybrid_conjugate_copy_fidelity(d), epsilon = 1e-12);
            }
        }
    }
}
