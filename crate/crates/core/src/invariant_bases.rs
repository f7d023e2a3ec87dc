//! Bases of symmetric operators and the reduced coefficient algebra.
//!
//! Each family spans (the Hermitian, real-coefficient part of) the commutant
//! of one averaging group. Pattern-defined elements are written as templates
//! such as `("kik", "iii")`: the operator is the sum of `|kik⟩⟨iii|` over all
//! assignments of pairwise distinct values to the letters. Distinct templates
//! have disjoint supports, so the Gram matrix of those families is diagonal.
//!
//! Coefficient vectors follow the same two conventions for every family:
//! `c_i` is the process-fidelity value `⟨ref|X_i|ref⟩` and `a_i` the scalar
//! with `tr_out X_i = a_i · I`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qcore::{CMatrix, DenseOperator, Ket, SystemShape, C64, MAX_DIM};
use crate::symmetry::{permute_slots, AveragingSpec, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// Commutant for `|θ⟩ ↦ |θ⟩^{⊗2}`, nine elements.
    Cloner9,
    /// Commutant for `|θ⟩ ↦ |−θ⟩^{⊗2}`, six elements.
    Transpose6,
    /// Commutant for `|θ⟩ ↦ |−θ⟩` on two factors, three elements.
    Transpose3,
    /// `Cloner9` conjugated by the swap of the input and second output.
    Hybrid9,
    /// The six operators `R₊, R₋, R₀, R₁, R₂, R₃` spanning `U^{⊗3}`-invariant
    /// Hermitian operators.
    EwR,
}

impl FamilyKind {
    /// Number of basis elements. Never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        match self {
            FamilyKind::Cloner9 | FamilyKind::Hybrid9 => 9,
            FamilyKind::Transpose6 | FamilyKind::EwR => 6,
            FamilyKind::Transpose3 => 3,
        }
    }

    pub fn num_factors(self) -> usize {
        match self {
            FamilyKind::Transpose3 => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Cloner9 => "CLONER9",
            FamilyKind::Transpose6 => "TRANSPOSE6",
            FamilyKind::Transpose3 => "TRANSPOSE3",
            FamilyKind::Hybrid9 => "HYBRID9",
            FamilyKind::EwR => "EW_R",
        })
    }
}

/// A Hermitian basis operator in sparse `(row, col, value)` form.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisElement {
    name: String,
    entries: Vec<(usize, usize, C64)>,
}

impl BasisElement {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// True for the elements that vanish at small `d`, e.g. sums over three
    /// distinct indices when `d = 2`.
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self, shape: &SystemShape) -> Result<DenseOperator> {
        let side = shape.side();
        let mut m = CMatrix::zeros(side, side);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        DenseOperator::new(shape.clone(), m)
    }

    /// `tr(X Y)` for Hermitian `X` (this element) and arbitrary `Y`.
    pub fn trace_with(&self, y: &CMatrix) -> C64 {
        self.entries.iter().map(|&(r, c, v)| v * y[(c, r)]).sum()
    }

    fn from_map(name: String, map: HashMap<(usize, usize), C64>) -> Self {
        let mut entries: Vec<_> = map
            .into_iter()
            .filter(|(_, v)| v.norm() > 1e-15)
            .map(|((r, c), v)| (r, c, v))
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self { name, entries }
    }
}

/// Sum of `|row⟩⟨col|` over injective letter assignments, for each template.
fn pattern_element(name: &str, shape: &SystemShape, templates: &[(&str, &str)]) -> BasisElement {
    let d = shape.uniform_dim().expect("pattern bases use equal factors");
    let mut map = HashMap::new();
    for &(row, col) in templates {
        let mut letters: Vec<char> = row.chars().chain(col.chars()).collect();
        letters.sort_unstable();
        letters.dedup();
        for values in injective_assignments(letters.len(), d) {
            let digit = |ch: char| values[letters.iter().position(|&l| l == ch).expect("letter")];
            let r: Vec<usize> = row.chars().map(digit).collect();
            let c: Vec<usize> = col.chars().map(digit).collect();
            *map.entry((shape.index(&r), shape.index(&c))).or_insert(C64::new(0.0, 0.0)) += 1.0;
        }
    }
    BasisElement::from_map(name.to_string(), map)
}

fn injective_assignments(m: usize, d: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    if m > d {
        return Vec::new();
    }
    (0..d).permutations(m).collect()
}

type Templates = &'static [(&'static str, &'static str)];

const CLONER9_TEMPLATES: [Templates; 9] = [
    &[("iii", "iii")],
    &[("iik", "iik"), ("iki", "iki")],
    &[("kii", "kii")],
    &[("kik", "iii"), ("iii", "kik"), ("kki", "iii"), ("iii", "kki")],
    &[("iik", "iki"), ("iki", "iik")],
    &[("ikl", "ikl")],
    &[("kkl", "ili"), ("lkl", "iik")],
    &[("kkl", "iil"), ("lkl", "iki")],
    &[("ikl", "ilk")],
];

const TRANSPOSE6_TEMPLATES: [Templates; 6] = [
    &[("iii", "iii")],
    &[("iik", "iik"), ("iki", "iki"), ("kii", "kii")],
    &[
        ("iik", "kii"),
        ("kii", "iik"),
        ("kii", "iki"),
        ("iki", "kii"),
        ("iik", "iki"),
        ("iki", "iik"),
    ],
    &[("ikl", "ikl")],
    &[("ikl", "kli"), ("ikl", "lik")],
    &[("ikl", "kil"), ("ikl", "lki"), ("ikl", "ilk")],
];

const TRANSPOSE3_TEMPLATES: [Templates; 3] = [&[("ii", "ii")], &[("ik", "ik")], &[("ik", "ki")]];

/// An invariant operator family at a fixed local dimension.
#[derive(Clone, Debug)]
pub struct BasisFamily {
    kind: FamilyKind,
    d: usize,
    shape: SystemShape,
    elements: Vec<BasisElement>,
    c: Vec<f64>,
    a: Vec<f64>,
}

impl BasisFamily {
    pub fn build(kind: FamilyKind, d: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::DimensionCap(d));
        }
        let shape = SystemShape::uniform(d, kind.num_factors())?;
        let elements = match kind {
            FamilyKind::Cloner9 => from_templates("X", &shape, &CLONER9_TEMPLATES, None),
            FamilyKind::Hybrid9 => from_templates("H", &shape, &CLONER9_TEMPLATES, Some((0, 2))),
            FamilyKind::Transpose6 => from_templates("X", &shape, &TRANSPOSE6_TEMPLATES, None),
            FamilyKind::Transpose3 => from_templates("Y", &shape, &TRANSPOSE3_TEMPLATES, None),
            FamilyKind::EwR => ew_elements(&shape),
        };
        let (c, a) = coefficients(kind, d as f64);
        Ok(Self { kind, d, shape, elements, c, a })
    }

    pub fn cloner9(d: usize) -> Result<Self> {
        Self::build(FamilyKind::Cloner9, d)
    }

    pub fn transpose6(d: usize) -> Result<Self> {
        Self::build(FamilyKind::Transpose6, d)
    }

    pub fn transpose3(d: usize) -> Result<Self> {
        Self::build(FamilyKind::Transpose3, d)
    }

    pub fn hybrid9(d: usize) -> Result<Self> {
        Self::build(FamilyKind::Hybrid9, d)
    }

    pub fn ew_r(d: usize) -> Result<Self> {
        Self::build(FamilyKind::EwR, d)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Indices of elements that are not identically zero at this `d`.
    pub fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.elements[i].is_zero()).collect()
    }

    /// The state whose expectation in `J̃` is the process fidelity:
    /// `|φ⁺⟩^{⊗n}` for phase families and `|0⟩^{⊗3}` for `EwR`.
    pub fn reference_state(&self) -> Result<Ket> {
        match self.kind {
            FamilyKind::EwR => Ket::basis(self.shape.clone(), 0),
            k => Ket::phi_plus(self.d)?.tensor_power(k.num_factors()),
        }
    }

    /// The group average whose image this family spans. `None` for `EwR`,
    /// whose group is all of `U(d)`.
    pub fn averaging_spec(&self) -> Option<AveragingSpec> {
        match self.kind {
            FamilyKind::Cloner9 => Some(AveragingSpec::cloner()),
            FamilyKind::Transpose6 => Some(AveragingSpec::transpose_cloner()),
            FamilyKind::Transpose3 => Some(AveragingSpec::transpose()),
            FamilyKind::Hybrid9 => Some(AveragingSpec::hybrid()),
            FamilyKind::EwR => None,
        }
    }

    pub fn point(&self, x: Vec<f64>) -> Result<ReducedPoint> {
        if x.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} expects {} coefficients, got {}",
                self.kind,
                self.len(),
                x.len()
            )));
        }
        Ok(ReducedPoint { kind: self.kind, d: self.d, x })
    }

    fn check_point(&self, p: &ReducedPoint) -> Result<()> {
        if p.kind != self.kind || p.d != self.d || p.x.len() != self.len() {
            return Err(Error::Dimension(format!(
                "point for {} at d = {} used with {} at d = {}",
                p.kind, p.d, self.kind, self.d
            )));
        }
        Ok(())
    }

    /// `c · x`.
    pub fn objective(&self, p: &ReducedPoint) -> Result<f64> {
        self.check_point(p)?;
        Ok(dot(&self.c, &p.x))
    }

    /// `a · x`, the scalar in `tr_out X(x) = (a · x) I`.
    pub fn trace_value(&self, p: &ReducedPoint) -> Result<f64> {
        self.check_point(p)?;
        Ok(dot(&self.a, &p.x))
    }

    /// `X(x) = Σ x_i X_i`.
    pub fn assemble(&self, p: &ReducedPoint) -> Result<DenseOperator> {
        self.check_point(p)?;
        let side = self.shape.side();
        let mut m = CMatrix::zeros(side, side);
        for (el, &xi) in self.elements.iter().zip(&p.x) {
            if xi != 0.0 {
                for &(r, c, v) in &el.entries {
                    m[(r, c)] += v * xi;
                }
            }
        }
        DenseOperator::new(self.shape.clone(), m)
    }

    /// Real Gram matrix `G_ij = tr(X_i X_j)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        let lookups: Vec<HashMap<(usize, usize), C64>> = self
            .elements
            .iter()
            .map(|e| e.entries.iter().map(|&(r, c, v)| ((r, c), v)).collect())
            .collect();
        DMatrix::from_fn(n, n, |i, j| {
            // tr(X_i X_j) = Σ conj(X_i[r,c]) X_j[r,c] for Hermitian X_i.
            self.elements[i]
                .entries
                .iter()
                .filter_map(|&(r, c, v)| lookups[j].get(&(r, c)).map(|w| (v.conj() * w).re))
                .sum()
        })
    }

    /// Least-squares coordinates of `op` in the real span, with the max-abs
    /// residual of the reconstruction. Zero elements get coefficient 0.
    pub fn project(&self, op: &DenseOperator) -> Result<(ReducedPoint, f64)> {
        if op.shape() != &self.shape {
            return Err(Error::Dimension(format!(
                "cannot project {:?} onto {} at d = {}",
                op.shape().dims(),
                self.kind,
                self.d
            )));
        }
        let live = self.nonzero_indices();
        let g = self.gram();
        let g_live = DMatrix::from_fn(live.len(), live.len(), |i, j| g[(live[i], live[j])]);
        let rhs = DVector::from_iterator(
            live.len(),
            live.iter().map(|&i| self.elements[i].trace_with(op.matrix()).re),
        );
        let sol = g_live
            .cholesky()
            .ok_or_else(|| Error::Numerical(format!("{} Gram matrix is singular", self.kind)))?
            .solve(&rhs);
        let mut x = vec![0.0; self.len()];
        for (k, &i) in live.iter().enumerate() {
            x[i] = sol[k];
        }
        let point = self.point(x)?;
        let residual = self.assemble(&point)?.max_abs_diff(op);
        Ok((point, residual))
    }
}

fn from_templates(
    prefix: &str,
    shape: &SystemShape,
    families: &[Templates],
    swap: Option<(usize, usize)>,
) -> Vec<BasisElement> {
    families
        .iter()
        .enumerate()
        .map(|(k, templates)| {
            let swapped: Vec<(String, String)> = templates
                .iter()
                .map(|&(r, c)| (swap_chars(r, swap), swap_chars(c, swap)))
                .collect();
            let refs: Vec<(&str, &str)> = swapped.iter().map(|(r, c)| (r.as_str(), c.as_str())).collect();
            pattern_element(&format!("{prefix}{}", k + 1), shape, &refs)
        })
        .collect()
}

fn swap_chars(s: &str, swap: Option<(usize, usize)>) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    if let Some((a, b)) = swap {
        chars.swap(a, b);
    }
    chars.into_iter().collect()
}

fn ew_elements(shape: &SystemShape) -> Vec<BasisElement> {
    let side = shape.side();
    let v = |images: [usize; 3]| -> Vec<(usize, usize)> {
        let sigma = Permutation::new(images.to_vec()).expect("valid");
        (0..side)
            .map(|idx| (shape.index(&permute_slots(&sigma, &shape.digits(idx))), idx))
            .collect()
    };
    let id = v([0, 1, 2]);
    let v12 = v([1, 0, 2]);
    let v23 = v([0, 2, 1]);
    let v31 = v([2, 1, 0]);
    let v123 = v([1, 2, 0]);
    let v132 = v([2, 0, 1]);
    let combo = |name: &str, terms: &[(&Vec<(usize, usize)>, C64)]| {
        let mut map = HashMap::new();
        for (op, w) in terms {
            for &(r, c) in op.iter() {
                *map.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += *w;
            }
        }
        BasisElement::from_map(name.to_string(), map)
    };
    let re = |x: f64| C64::new(x, 0.0);
    let s3 = 3f64.sqrt();
    vec![
        combo(
            "R+",
            &[(&id, re(1.0 / 6.0)), (&v12, re(1.0 / 6.0)), (&v23, re(1.0 / 6.0)), (&v31, re(1.0 / 6.0)), (&v123, re(1.0 / 6.0)), (&v132, re(1.0 / 6.0))],
        ),
        combo(
            "R-",
            &[(&id, re(1.0 / 6.0)), (&v12, re(-1.0 / 6.0)), (&v23, re(-1.0 / 6.0)), (&v31, re(-1.0 / 6.0)), (&v123, re(1.0 / 6.0)), (&v132, re(1.0 / 6.0))],
        ),
        combo("R0", &[(&id, re(2.0 / 3.0)), (&v123, re(-1.0 / 3.0)), (&v132, re(-1.0 / 3.0))]),
        combo("R1", &[(&v23, re(2.0 / 3.0)), (&v31, re(-1.0 / 3.0)), (&v12, re(-1.0 / 3.0))]),
        combo("R2", &[(&v12, re(1.0 / s3)), (&v31, re(-1.0 / s3))]),
        combo("R3", &[(&v123, C64::new(0.0, 1.0 / s3)), (&v132, C64::new(0.0, -1.0 / s3))]),
    ]
}

fn coefficients(kind: FamilyKind, d: f64) -> (Vec<f64>, Vec<f64>) {
    let (e, t) = (d - 1.0, (d - 1.0) * (d - 2.0));
    let d2 = d * d;
    match kind {
        FamilyKind::Cloner9 | FamilyKind::Hybrid9 => (
            [1.0, 2.0 * e, e, 4.0 * e, 2.0 * e, t, 2.0 * t, 2.0 * t, t].iter().map(|v| v / d2).collect(),
            vec![1.0, 2.0 * e, e, 0.0, 0.0, t, 0.0, 0.0, 0.0],
        ),
        FamilyKind::Transpose6 => (
            [1.0, 3.0 * e, 6.0 * e, t, 2.0 * t, 3.0 * t].iter().map(|v| v / d2).collect(),
            vec![1.0, 3.0 * e, 0.0, t, 0.0, 0.0],
        ),
        FamilyKind::Transpose3 => (vec![1.0 / d, e / d, e / d], vec![1.0, e, 0.0]),
        FamilyKind::EwR => (
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![(d + 1.0) * (d + 2.0) / 6.0, t / 6.0, 2.0 * (d2 - 1.0) / 3.0, 0.0, 0.0, 0.0],
        ),
    }
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Real coordinates of `X(x) = Σ x_i X_i` in one family.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedPoint {
    kind: FamilyKind,
    d: usize,
    x: Vec<f64>,
}

impl ReducedPoint {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.x
    }
}
