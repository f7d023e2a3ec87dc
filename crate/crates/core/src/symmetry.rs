//! Group actions on `(C^d)^{⊗n}` and the averaging maps built from them.
//!
//! Three actions appear: diagonal phase unitaries `U(θ)` (with a sign per
//! tensor factor), basis relabelings `U_π^{⊗n}` for `π ∈ S_d`, and
//! subsystem permutations `V_σ`. The phase average is evaluated exactly: an
//! entry `|r⟩⟨c|` survives iff `Σ_f s_f (e_{r_f} − e_{c_f}) = 0` in `Z^d`.

use std::collections::HashMap;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::{CMatrix, DenseOperator, SystemShape, C64, ONE};

/// A bijection of `{0, …, n−1}`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// The transposition exchanging `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidPermutation(format!("({a} {b}) out of range for n = {n}")));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Ok(Self(images))
    }

    /// Every element of `S_n`, lexicographic in the image list.
    pub fn all(n: usize) -> Vec<Self> {
        (0..n).permutations(n).map(Self).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`, i.e. `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidPermutation("composing permutations of different degree".into()));
        }
        Ok(Self(other.0.iter().map(|&k| self.0[k]).collect()))
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (k, &img) in self.0.iter().enumerate() {
            inv[img] = k;
        }
        Self(inv)
    }
}

/// `U(θ) = Σ_k e^{iθ_k} |k⟩⟨k|`.
pub fn phase_unitary(theta: &[f64]) -> Result<DenseOperator> {
    let d = theta.len();
    if d < 2 {
        return Err(Error::Dimension(format!("phase unitary needs d >= 2, got {d}")));
    }
    let diag = nalgebra::DVector::from_iterator(d, theta.iter().map(|&t| C64::from_polar(1.0, t)));
    DenseOperator::new(SystemShape::new(vec![d])?, CMatrix::from_diagonal(&diag))
}

/// `U_π = Σ_k |π(k)⟩⟨k|`.
pub fn basis_permutation_unitary(pi: &Permutation) -> Result<DenseOperator> {
    let d = pi.len();
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        m[(pi.apply(k), k)] = ONE;
    }
    DenseOperator::new(SystemShape::new(vec![d])?, m)
}

/// `V_σ` on `σ.len()` factors of dimension `d`: the state in slot `f` is
/// moved to slot `σ(f)`, so `V_σ V_τ = V_{σ∘τ}`.
pub fn subsystem_permutation(sigma: &Permutation, d: usize) -> Result<DenseOperator> {
    let shape = SystemShape::uniform(d, sigma.len())?;
    let side = shape.side();
    let mut m = CMatrix::zeros(side, side);
    for idx in 0..side {
        let a = shape.digits(idx);
        m[(shape.index(&permute_slots(sigma, &a)), idx)] = ONE;
    }
    DenseOperator::new(shape, m)
}

/// Digits after moving slot `f` to slot `σ(f)`.
pub(crate) fn permute_slots(sigma: &Permutation, digits: &[usize]) -> Vec<usize> {
    let mut out = vec![0; digits.len()];
    for (f, &a) in digits.iter().enumerate() {
        out[sigma.apply(f)] = a;
    }
    out
}

/// Per-factor sign of the phase action `⊗_f U(s_f θ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseSignature(Vec<i8>);

impl PhaseSignature {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("phase signature must be a nonempty list of ±1, got {signs:?}")));
        }
        Ok(Self(signs))
    }

    /// Input conjugated, both outputs plain: `|θ⟩ ↦ |θ⟩^{⊗2}`.
    pub fn cloner() -> Self {
        Self(vec![-1, 1, 1])
    }

    /// `|θ⟩ ↦ |−θ⟩^{⊗2}`; every factor carries the same sign.
    pub fn transpose_cloner() -> Self {
        Self(vec![-1, -1, -1])
    }

    /// `|θ⟩ ↦ |−θ⟩ ⊗ |θ⟩` (transposed copy on the first output).
    pub fn hybrid() -> Self {
        Self(vec![-1, -1, 1])
    }

    /// `|θ⟩ ↦ |−θ⟩`, a single output.
    pub fn transpose() -> Self {
        Self(vec![-1, -1])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn num_factors(&self) -> usize {
        self.0.len()
    }

    /// Whether `|row⟩⟨col|` is fixed by every phase conjugation.
    pub fn survives(&self, row: &[usize], col: &[usize], d: usize) -> bool {
        let mut charge = [0i32; crate::qcore::MAX_DIM];
        let charge = &mut charge[..d];
        for ((&s, &r), &c) in self.0.iter().zip(row).zip(col) {
            charge[r] += s as i32;
            charge[c] -= s as i32;
        }
        charge.iter().all(|&q| q == 0)
    }

    /// `⊗_f U(s_f θ)`.
    pub fn phase_operator(&self, theta: &[f64]) -> Result<DenseOperator> {
        let mut out: Option<DenseOperator> = None;
        for &s in &self.0 {
            let signed: Vec<f64> = theta.iter().map(|&t| s as f64 * t).collect();
            let u = phase_unitary(&signed)?;
            out = Some(match out {
                None => u,
                Some(acc) => acc.tensor(&u)?,
            });
        }
        Ok(out.expect("signature is nonempty"))
    }
}

fn uniform_factors(x: &DenseOperator, n: usize) -> Result<usize> {
    let shape = x.shape();
    match shape.uniform_dim() {
        Some(d) if shape.num_factors() == n => Ok(d),
        _ => Err(Error::Dimension(format!(
            "expected {n} factors of equal dimension, got {:?}",
            shape.dims()
        ))),
    }
}

/// Exact average of `X` over the phase group with the given signature.
pub fn phase_twirl(x: &DenseOperator, sig: &PhaseSignature) -> Result<DenseOperator> {
    let d = uniform_factors(x, sig.num_factors())?;
    let shape = x.shape();
    let side = x.side();
    let decoded: Vec<Vec<usize>> = (0..side).map(|i| shape.digits(i)).collect();
    let m = x.matrix();
    let mut out = CMatrix::zeros(side, side);
    for c in 0..side {
        for r in 0..side {
            if sig.survives(&decoded[r], &decoded[c], d) {
                out[(r, c)] = m[(r, c)];
            }
        }
    }
    DenseOperator::new(shape.clone(), out)
}

/// Which average to form: the phase twirl followed by the uniform mixture
/// over `S_d` relabelings and the listed subsystem permutations.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragingSpec {
    signature: PhaseSignature,
    subsystem_group: Vec<Permutation>,
}

impl AveragingSpec {
    /// `subsystem_group` must be closed under composition and must only
    /// exchange factors that carry the same phase sign.
    pub fn new(signature: PhaseSignature, subsystem_group: Vec<Permutation>) -> Result<Self> {
        let n = signature.num_factors();
        if subsystem_group.is_empty() || subsystem_group.iter().any(|g| g.len() != n) {
            return Err(Error::InvalidPermutation(format!("subsystem group must act on {n} factors")));
        }
        for g in &subsystem_group {
            if (0..n).any(|f| signature.0[g.apply(f)] != signature.0[f]) {
                return Err(Error::InvalidPermutation(format!(
                    "{:?} exchanges factors with different phase signs",
                    g.images()
                )));
            }
            for h in &subsystem_group {
                if !subsystem_group.contains(&g.compose(h)?) {
                    return Err(Error::InvalidPermutation("subsystem set is not a group".into()));
                }
            }
        }
        Ok(Self { signature, subsystem_group })
    }

    pub fn cloner() -> Self {
        Self::new(
            PhaseSignature::cloner(),
            vec![Permutation::identity(3), Permutation::transposition(3, 1, 2).expect("valid")],
        )
        .expect("cloner averaging spec is valid")
    }

    pub fn transpose_cloner() -> Self {
        Self::new(PhaseSignature::transpose_cloner(), Permutation::all(3)).expect("valid")
    }

    pub fn hybrid() -> Self {
        Self::new(
            PhaseSignature::hybrid(),
            vec![Permutation::identity(3), Permutation::transposition(3, 0, 1).expect("valid")],
        )
        .expect("hybrid averaging spec is valid")
    }

    pub fn transpose() -> Self {
        Self::new(PhaseSignature::transpose(), Permutation::all(2)).expect("valid")
    }

    pub fn signature(&self) -> &PhaseSignature {
        &self.signature
    }

    pub fn subsystem_group(&self) -> &[Permutation] {
        &self.subsystem_group
    }
}

/// How the `S_d` part of the average is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragingMethod {
    /// Enumeration for `d <= 8`, pattern classes above.
    Auto,
    /// Explicit sum over all `d!` relabelings.
    Enumerate,
    /// Average within classes of index tuples that differ by a relabeling.
    PatternClasses,
}

/// Largest `d` for which [`AveragingMethod::Auto`] enumerates `S_d`.
pub const ENUMERATION_MAX_DIM: usize = 8;

/// The averaged Choi operator `J̃`.
pub fn average_choi(j: &DenseOperator, spec: &AveragingSpec) -> Result<DenseOperator> {
    average_choi_with(j, spec, AveragingMethod::Auto)
}

pub fn average_choi_with(
    j: &DenseOperator,
    spec: &AveragingSpec,
    method: AveragingMethod,
) -> Result<DenseOperator> {
    let n = spec.signature.num_factors();
    let d = uniform_factors(j, n)?;
    let shape = j.shape().clone();
    let twirled = phase_twirl(j, &spec.signature)?;
    let survivors = surviving_entries(&shape, &spec.signature, d);
    let method = match method {
        AveragingMethod::Auto if d <= ENUMERATION_MAX_DIM => AveragingMethod::Enumerate,
        AveragingMethod::Auto => AveragingMethod::PatternClasses,
        m => m,
    };
    let values = match method {
        AveragingMethod::Enumerate => enumerate_average(&twirled, &survivors, spec, d),
        _ => pattern_average(&twirled, &survivors, spec, d),
    };
    let side = shape.side();
    let mut out = CMatrix::zeros(side, side);
    for (&(r, c), v) in survivors.iter().zip(values) {
        out[(r, c)] = v;
    }
    DenseOperator::new(shape, out)
}

fn surviving_entries(shape: &SystemShape, sig: &PhaseSignature, d: usize) -> Vec<(usize, usize)> {
    let side = shape.side();
    let decoded: Vec<Vec<usize>> = (0..side).map(|i| shape.digits(i)).collect();
    let mut out = Vec::new();
    for r in 0..side {
        for c in 0..side {
            if sig.survives(&decoded[r], &decoded[c], d) {
                out.push((r, c));
            }
        }
    }
    out
}

const PERMUTATION_CHUNK: usize = 720;

fn enumerate_average(
    twirled: &DenseOperator,
    survivors: &[(usize, usize)],
    spec: &AveragingSpec,
    d: usize,
) -> Vec<C64> {
    let shape = twirled.shape();
    let side = shape.side();
    let m = twirled.matrix();
    let decoded: Vec<Vec<usize>> = (0..side).map(|i| shape.digits(i)).collect();
    let perms = Permutation::all(d);
    let group = &spec.subsystem_group;
    // Fixed chunking keeps the summation order independent of the thread count.
    let partials: Vec<Vec<C64>> = perms
        .par_chunks(PERMUTATION_CHUNK)
        .map(|chunk| {
            let mut acc = vec![C64::new(0.0, 0.0); survivors.len()];
            let mut map = vec![0usize; side];
            for pi in chunk {
                for sigma in group {
                    for (idx, digits) in decoded.iter().enumerate() {
                        let relabeled: Vec<usize> = digits.iter().map(|&a| pi.apply(a)).collect();
                        map[idx] = shape.index(&permute_slots(sigma, &relabeled));
                    }
                    for (slot, &(r, c)) in acc.iter_mut().zip(survivors) {
                        *slot += m[(map[r], map[c])];
                    }
                }
            }
            acc
        })
        .collect();
    let norm = 1.0 / (perms.len() * group.len()) as f64;
    let mut total = vec![C64::new(0.0, 0.0); survivors.len()];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total.into_iter().map(|v| v * norm).collect()
}

/// Canonical relabeling of a digit tuple: digits renamed in order of first
/// appearance. Two tuples lie in the same `S_d` orbit iff their keys agree.
fn pattern_key(digits: &[usize]) -> (u64, usize) {
    let mut names = [usize::MAX; crate::qcore::MAX_DIM];
    let mut next = 0usize;
    let mut key = 0u64;
    for &a in digits {
        if names[a] == usize::MAX {
            names[a] = next;
            next += 1;
        }
        key = key * 8 + names[a] as u64;
    }
    (key, next)
}

fn falling_factorial(d: usize, m: usize) -> f64 {
    (0..m).map(|k| (d - k) as f64).product()
}

fn pattern_average(
    twirled: &DenseOperator,
    survivors: &[(usize, usize)],
    spec: &AveragingSpec,
    d: usize,
) -> Vec<C64> {
    let shape = twirled.shape();
    let m = twirled.matrix();
    let joined = |r: usize, c: usize| {
        let mut t = shape.digits(r);
        t.extend(shape.digits(c));
        t
    };
    let mut class_sums: HashMap<u64, C64> = HashMap::new();
    for &(r, c) in survivors {
        let (key, _) = pattern_key(&joined(r, c));
        *class_sums.entry(key).or_insert(C64::new(0.0, 0.0)) += m[(r, c)];
    }
    let group = &spec.subsystem_group;
    survivors
        .iter()
        .map(|&(r, c)| {
            let (dr, dc) = (shape.digits(r), shape.digits(c));
            let mut total = C64::new(0.0, 0.0);
            for sigma in group {
                let mut t = permute_slots(sigma, &dr);
                t.extend(permute_slots(sigma, &dc));
                let (key, distinct) = pattern_key(&t);
                total += class_sums.get(&key).copied().unwrap_or_default() / falling_factorial(d, distinct);
            }
            total / group.len() as f64
        })
        .collect()
}
