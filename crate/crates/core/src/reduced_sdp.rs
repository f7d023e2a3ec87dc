//! The symmetry-reduced semidefinite programs and their certificates.
//!
//! Every problem has the form
//!
//! ```text
//! maximize c·x   subject to   a·x = 1,   X(x) = Σ x_i X_i ⪰ 0
//! ```
//!
//! with dual `minimize z` subject to `tr(X_i Ẑ) = a_i z − c_i`, `Ẑ ⪰ 0`. For
//! any feasible pair `z − c·x = tr(X(x) Ẑ) ≥ 0`.
//!
//! The numerical solver eliminates the equality with `x = x₀ + N y` and
//! follows the central path of `−c·x − μ log det X(x)`. All basis elements
//! share a block structure (connected components of their joint support),
//! so determinants, inverses and eigenvalues are taken block by block.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::invariant_bases::{dot, BasisFamily, FamilyKind, ReducedPoint};
use crate::qcore::{hermitian_eigenvalues, CMatrix, C64};

/// Gap below which a certificate counts as optimal.
pub const GAP_TOL: f64 = 1e-8;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const EIG_TOL: f64 = 1e-9;
/// Largest accepted dual-constraint residual.
pub const DUAL_RESIDUAL_TOL: f64 = 1e-9;
/// Largest accepted deviation of `a·x` from 1.
pub const PRIMAL_RESIDUAL_TOL: f64 = 1e-10;

/// `maximize c·x` over `a·x = 1`, `X(x) ⪰ 0` for one basis family.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    family: BasisFamily,
}

impl SdpProblem {
    pub fn new(family: BasisFamily) -> Result<Self> {
        if family.a().iter().all(|&v| v == 0.0) {
            return Err(Error::Domain(format!("{} has a zero trace-constraint vector", family.kind())));
        }
        Ok(Self { family })
    }

    pub fn build(kind: FamilyKind, d: usize) -> Result<Self> {
        Self::new(BasisFamily::build(kind, d)?)
    }

    pub fn family(&self) -> &BasisFamily {
        &self.family
    }
}

/// Dual variables: `Ẑ = Σ b_i X_i` and the scalar `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPoint {
    pub b: ReducedPoint,
    pub z: f64,
}

/// Result of [`solve_primal`].
#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub point: ReducedPoint,
    pub value: f64,
    pub min_eig: f64,
    /// Dual point read off the central path (`Ẑ = μ X⁻¹`, projected onto
    /// the span, and the equality multiplier).
    pub dual: DualPoint,
    /// `n μ` at termination, an upper bound on the duality gap.
    pub barrier_gap: f64,
    pub newton_steps: usize,
}

/// Block decomposition shared by all elements of a family, with each live
/// element split into per-block local entries.
struct Blocks {
    sizes: Vec<usize>,
    /// `parts[i][b]`: entries of live element `i` inside block `b`.
    parts: Vec<Vec<Vec<(usize, usize, C64)>>>,
}

impl Blocks {
    fn new(family: &BasisFamily, live: &[usize]) -> Self {
        let side = family.shape().side();
        let mut parent: Vec<usize> = (0..side).collect();
        fn find(p: &mut [usize], mut k: usize) -> usize {
            while p[k] != k {
                p[k] = p[p[k]];
                k = p[k];
            }
            k
        }
        for &i in live {
            for &(r, c, _) in family.elements()[i].entries() {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut block_of_root = vec![usize::MAX; side];
        let mut local = vec![(0usize, 0usize); side];
        let mut sizes = Vec::new();
        for k in 0..side {
            let root = find(&mut parent, k);
            if block_of_root[root] == usize::MAX {
                block_of_root[root] = sizes.len();
                sizes.push(0);
            }
            let b = block_of_root[root];
            local[k] = (b, sizes[b]);
            sizes[b] += 1;
        }
        let parts = live
            .iter()
            .map(|&i| {
                let mut per = vec![Vec::new(); sizes.len()];
                for &(r, c, v) in family.elements()[i].entries() {
                    let (b, lr) = local[r];
                    per[b].push((lr, local[c].1, v));
                }
                per
            })
            .collect();
        Self { sizes, parts }
    }

    fn assemble(&self, x: &[f64]) -> Vec<CMatrix> {
        let mut mats: Vec<CMatrix> = self.sizes.iter().map(|&n| CMatrix::zeros(n, n)).collect();
        for (part, &xi) in self.parts.iter().zip(x) {
            for (b, entries) in part.iter().enumerate() {
                for &(r, c, v) in entries {
                    mats[b][(r, c)] += v * xi;
                }
            }
        }
        mats
    }

    /// Block inverses and `log det`, or `None` when not positive definite.
    fn factor(&self, x: &[f64]) -> Option<(Vec<CMatrix>, f64)> {
        let mut logdet = 0.0;
        let mut inverses = Vec::with_capacity(self.sizes.len());
        for m in self.assemble(x) {
            let chol = m.cholesky()?;
            logdet += chol.l_dirty().diagonal().iter().map(|v| 2.0 * v.re.ln()).sum::<f64>();
            inverses.push(chol.inverse());
        }
        logdet.is_finite().then_some((inverses, logdet))
    }

    fn min_eig(&self, x: &[f64]) -> f64 {
        self.assemble(x)
            .iter()
            .flat_map(hermitian_eigenvalues)
            .fold(f64::INFINITY, f64::min)
    }

    /// `tr(Y X_i)` for every live element.
    fn traces(&self, y: &[CMatrix]) -> Vec<f64> {
        self.parts
            .iter()
            .map(|part| {
                part.iter()
                    .zip(y)
                    .map(|(entries, yb)| entries.iter().map(|&(r, c, v)| (v * yb[(c, r)]).re).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    /// `tr(Y X_i Y X_j)`.
    fn hessian(&self, y: &[CMatrix]) -> DMatrix<f64> {
        let m = self.parts.len();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut acc = 0.0;
                for (b, yb) in y.iter().enumerate() {
                    for &(r, c, v) in &self.parts[i][b] {
                        for &(r2, c2, v2) in &self.parts[j][b] {
                            acc += (v * v2 * yb[(c, r2)] * yb[(c2, r)]).re;
                        }
                    }
                }
                acc
            })
            .collect();
        let mut h = DMatrix::zeros(m, m);
        for (&(i, j), v) in pairs.iter().zip(values) {
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
        h
    }
}

/// Indices whose sum is a multiple of the identity in each family, used for
/// the strictly feasible starting point.
fn identity_support(kind: FamilyKind) -> &'static [usize] {
    match kind {
        FamilyKind::Cloner9 | FamilyKind::Hybrid9 => &[0, 1, 2, 5],
        FamilyKind::Transpose6 => &[0, 1, 3],
        FamilyKind::Transpose3 => &[0, 1],
        FamilyKind::EwR => &[0, 1, 2],
    }
}

/// Orthonormal basis of the complement of `a`, as columns.
fn nullspace(a: &DVector<f64>) -> DMatrix<f64> {
    let m = a.len();
    let mut basis: Vec<DVector<f64>> = vec![a / a.norm()];
    for k in 0..m {
        let mut v = DVector::from_fn(m, |i, _| if i == k { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for u in &basis {
                v -= u * u.dot(&v);
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
        if basis.len() == m {
            break;
        }
    }
    DMatrix::from_columns(&basis[1..])
}

const MU_START: f64 = 1.0;
const MU_FLOOR: f64 = 1e-13;
const MAX_NEWTON_PER_STAGE: usize = 60;

/// Interior-point solve of the primal. The returned objective is within
/// `tol` of the optimum whenever `barrier_gap ≤ tol`.
pub fn solve_primal(problem: &SdpProblem, tol: f64) -> Result<PrimalSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let fam = problem.family();
    let live = fam.nonzero_indices();
    let m = live.len();
    let a = DVector::from_iterator(m, live.iter().map(|&i| fam.a()[i]));
    let c = DVector::from_iterator(m, live.iter().map(|&i| fam.c()[i]));
    let blocks = Blocks::new(fam, &live);
    let side = fam.shape().side() as f64;

    let start: Vec<usize> = identity_support(fam.kind()).iter().filter(|i| live.contains(i)).copied().collect();
    let scale: f64 = start.iter().map(|&i| fam.a()[i]).sum();
    let x0 = DVector::from_iterator(m, live.iter().map(|i| if start.contains(i) { 1.0 / scale } else { 0.0 }));
    if blocks.factor(x0.as_slice()).is_none() {
        return Err(Error::Infeasible(format!("{} start point is not strictly feasible", fam.kind())));
    }
    let n = nullspace(&a);
    let mut y = DVector::zeros(n.ncols());
    let mut mu = MU_START;
    let mut steps = 0;

    // Scaled barrier objective −c·x/μ − log det X(x).
    let value = |x: &DVector<f64>, mu: f64| -> Option<f64> {
        blocks.factor(x.as_slice()).map(|(_, logdet)| -c.dot(x) / mu - logdet)
    };

    loop {
        for _ in 0..MAX_NEWTON_PER_STAGE {
            let x = &x0 + &n * &y;
            let (inv, logdet) = blocks
                .factor(x.as_slice())
                .ok_or_else(|| Error::Numerical("iterate left the feasible cone".into()))?;
            let f = -c.dot(&x) / mu - logdet;
            let t = DVector::from_vec(blocks.traces(&inv));
            let g = n.transpose() * (-&c / mu - t);
            if n.ncols() == 0 {
                break;
            }
            let h = n.transpose() * blocks.hessian(&inv) * &n;
            let delta = match h.clone().cholesky() {
                Some(ch) => -ch.solve(&g),
                None => -h.lu().solve(&g).ok_or_else(|| Error::Numerical("singular Newton system".into()))?,
            };
            let decrement = -g.dot(&delta);
            if decrement <= 1e-14 {
                break;
            }
            steps += 1;
            let mut s = 1.0;
            loop {
                let trial = &y + &delta * s;
                if let Some(ft) = value(&(&x0 + &n * &trial), mu) {
                    if ft <= f - 0.25 * s * decrement {
                        y = trial;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-20 {
                    break;
                }
            }
            if s < 1e-20 || decrement < 1e-12 {
                break;
            }
        }
        if side * mu <= tol || mu <= MU_FLOOR {
            break;
        }
        mu *= 0.5;
    }

    let x = &x0 + &n * &y;
    let (inv, _) = blocks
        .factor(x.as_slice())
        .ok_or_else(|| Error::Numerical("final iterate is not positive definite".into()))?;
    // Central-path duals: tr(X_i μY) = ν a_i − c_i with ν the multiplier of a·x = 1.
    let t: DVector<f64> = DVector::from_vec(blocks.traces(&inv)) * mu;
    let nu = a.dot(&(&c + &t)) / a.dot(&a);
    let g = fam.gram();
    let g_live = DMatrix::from_fn(m, m, |i, j| g[(live[i], live[j])]);
    let b_live = g_live
        .cholesky()
        .ok_or_else(|| Error::Numerical("singular Gram matrix".into()))?
        .solve(&t);

    let mut x_full = vec![0.0; fam.len()];
    let mut b_full = vec![0.0; fam.len()];
    for (k, &i) in live.iter().enumerate() {
        x_full[i] = x[k];
        b_full[i] = b_live[k];
    }
    let point = fam.point(x_full)?;
    Ok(PrimalSolution {
        value: fam.objective(&point)?,
        min_eig: blocks.min_eig(x.as_slice()),
        point,
        dual: DualPoint { b: fam.point(b_full)?, z: nu },
        barrier_gap: side * mu,
        newton_steps: steps,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Optimal,
    PrimalInfeasible(String),
    DualInfeasible(String),
    GapTooLarge(f64),
}

impl Verdict {
    pub fn is_optimal(&self) -> bool {
        matches!(self, Verdict::Optimal)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Optimal => f.write_str("OPTIMAL"),
            Verdict::PrimalInfeasible(why) => write!(f, "PRIMAL_INFEASIBLE: {why}"),
            Verdict::DualInfeasible(why) => write!(f, "DUAL_INFEASIBLE: {why}"),
            Verdict::GapTooLarge(gap) => write!(f, "GAP_TOO_LARGE: {gap:.3e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpCertificate {
    pub primal_x: ReducedPoint,
    pub dual_b: ReducedPoint,
    pub dual_z: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_min_eig: f64,
    pub dual_min_eig: f64,
    /// `|a·x − 1|`.
    pub primal_residual: f64,
    /// `max_i |tr(X_i Ẑ) − (a_i z − c_i)|`.
    pub dual_residual: f64,
    pub verdict: Verdict,
}

/// Checks feasibility of both points and the duality gap. Eigenvalues come
/// from a numerical eigensolve of the assembled operators.
pub fn verify_certificate(problem: &SdpProblem, primal: &ReducedPoint, dual: &DualPoint) -> Result<SdpCertificate> {
    let fam = problem.family();
    let primal_value = fam.objective(primal)?;
    let primal_residual = (fam.trace_value(primal)? - 1.0).abs();
    fam.objective(&dual.b)?;

    let all: Vec<usize> = (0..fam.len()).collect();
    let blocks = Blocks::new(fam, &all);
    let primal_min_eig = blocks.min_eig(primal.x());
    let dual_min_eig = blocks.min_eig(dual.b.x());

    let g = fam.gram();
    let zb = DVector::from_column_slice(dual.b.x());
    let lhs = &g * zb;
    let dual_residual = (0..fam.len())
        .map(|i| (lhs[i] - (fam.a()[i] * dual.z - fam.c()[i])).abs())
        .fold(0.0, f64::max);
    let gap = (dual.z - primal_value).abs();

    let verdict = if primal_residual > PRIMAL_RESIDUAL_TOL {
        Verdict::PrimalInfeasible(format!("a·x − 1 = {:.3e}", fam.trace_value(primal)? - 1.0))
    } else if primal_min_eig < -EIG_TOL {
        Verdict::PrimalInfeasible(format!("λ_min(X) = {primal_min_eig:.3e}"))
    } else if dual_min_eig < -EIG_TOL {
        Verdict::DualInfeasible(format!("λ_min(Ẑ) = {dual_min_eig:.3e}"))
    } else if dual_residual > DUAL_RESIDUAL_TOL {
        Verdict::DualInfeasible(format!("dual constraint residual {dual_residual:.3e}"))
    } else if gap > GAP_TOL {
        Verdict::GapTooLarge(gap)
    } else {
        Verdict::Optimal
    };
    Ok(SdpCertificate {
        primal_x: primal.clone(),
        dual_b: dual.b.clone(),
        dual_z: dual.z,
        primal_value,
        dual_value: dual.z,
        gap,
        primal_min_eig,
        dual_min_eig,
        primal_residual,
        dual_residual,
        verdict,
    })
}

fn dim(d: usize) -> Result<f64> {
    if !(2..=crate::qcore::MAX_DIM).contains(&d) {
        return Err(Error::DimensionCap(d));
    }
    Ok(d as f64)
}

/// `x = k(1,1,0,1,1,0,1,1,0)` with `k = 1/(2d−1)`.
pub fn cloner_primal(d: usize) -> Result<ReducedPoint> {
    let k = 1.0 / (2.0 * dim(d)? - 1.0);
    BasisFamily::cloner9(d)?.point(vec![k, k, 0.0, k, k, 0.0, k, k, 0.0])
}

/// `b = 2(d−1)/d³` on `X₁, X₂, X₃, X₆`, `−1/d³` elsewhere; `z = (2d−1)/d²`.
pub fn cloner_dual(d: usize) -> Result<DualPoint> {
    let df = dim(d)?;
    let (p, q) = (2.0 * (df - 1.0) / df.powi(3), -1.0 / df.powi(3));
    Ok(DualPoint {
        b: BasisFamily::cloner9(d)?.point(vec![p, p, p, q, q, p, q, q, q])?,
        z: (2.0 * df - 1.0) / (df * df),
    })
}

/// Primal and dual optima for the phase-covariant transpose cloner. The
/// qubit case has its own pair.
pub fn transpose_cloner_certificates(d: usize) -> Result<(ReducedPoint, DualPoint)> {
    let df = dim(d)?;
    let fam = BasisFamily::transpose6(d)?;
    if d == 2 {
        let t = 1.0 / 3.0;
        let (p, q) = (0.25, -0.125);
        return Ok((
            fam.point(vec![0.0, t, t, 0.0, 0.0, 0.0])?,
            DualPoint { b: fam.point(vec![p, p, q, p, q, q])?, z: 0.75 },
        ));
    }
    let k = 1.0 / ((df - 1.0) * (df - 2.0));
    let (p, q) = (5.0 / df.powi(3), -1.0 / df.powi(3));
    Ok((
        fam.point(vec![0.0, 0.0, 0.0, k, k, k])?,
        DualPoint { b: fam.point(vec![p, p, q, p, q, q])?, z: 6.0 / (df * df) },
    ))
}

/// The phase-covariant transpose `|θ⟩ ↦ |−θ⟩`: `x = (0, 1, 1)/(d−1)`,
/// `b = (1, 1, −1)/d²`, `z = 2/d`.
pub fn transpose_certificates(d: usize) -> Result<(ReducedPoint, DualPoint)> {
    let df = dim(d)?;
    let fam = BasisFamily::transpose3(d)?;
    let k = 1.0 / (df - 1.0);
    let w = 1.0 / (df * df);
    Ok((fam.point(vec![0.0, k, k])?, DualPoint { b: fam.point(vec![w, w, -w])?, z: 2.0 / df }))
}

/// The hybrid problem is the cloner problem conjugated by a factor swap,
/// which preserves every coefficient, so the cloner pair carries over.
pub fn hybrid_certificates(d: usize) -> Result<(ReducedPoint, DualPoint)> {
    let fam = BasisFamily::hybrid9(d)?;
    let x = cloner_primal(d)?.into_vec();
    let dual = cloner_dual(d)?;
    Ok((fam.point(x)?, DualPoint { b: fam.point(dual.b.into_vec())?, z: dual.z }))
}

/// `x = c₊ e₁`; the dual `Ẑ = (z/d)(R₋ + R₀)` with `z = c₊`.
pub fn ew_certificates(d: usize) -> Result<(ReducedPoint, DualPoint)> {
    let lp = ew_linear_program(d)?;
    let fam = BasisFamily::ew_r(d)?;
    let z = lp.value;
    let w = z / d as f64;
    Ok((fam.point(lp.coefficients.to_vec())?, DualPoint { b: fam.point(vec![0.0, w, w, 0.0, 0.0, 0.0])?, z }))
}

/// Paired certificate for a family, where one is known in closed form.
pub fn known_certificates(kind: FamilyKind, d: usize) -> Result<(ReducedPoint, DualPoint)> {
    match kind {
        FamilyKind::Cloner9 => Ok((cloner_primal(d)?, cloner_dual(d)?)),
        FamilyKind::Transpose6 => transpose_cloner_certificates(d),
        FamilyKind::Transpose3 => transpose_certificates(d),
        FamilyKind::Hybrid9 => hybrid_certificates(d),
        FamilyKind::EwR => ew_certificates(d),
    }
}

/// Optimum of the reduced universal transpose-cloner problem.
#[derive(Clone, Debug)]
pub struct EwSolution {
    /// `(c₊, c₋, c₀, c₁, c₂, c₃)`.
    pub coefficients: [f64; 6],
    pub value: f64,
    pub trace_residual: f64,
}

/// Maximizes `c₊` subject to `a₊c₊ + a₋c₋ + a₀c₀ = 1`, `c₊, c₋, c₀ ≥ 0` and
/// `c₁² + c₂² + c₃² ≤ c₀²`. The objective ignores `c₁…c₃`, so they are 0 at
/// the optimum and the rest is a linear program over the simplex whose
/// vertices are `e_k / a_k`.
pub fn ew_linear_program(d: usize) -> Result<EwSolution> {
    dim(d)?;
    let fam = BasisFamily::ew_r(d)?;
    let a = fam.a();
    let best = (0..3)
        .filter(|&k| a[k] > 0.0)
        .max_by(|&i, &j| (fam.c()[i] / a[i]).total_cmp(&(fam.c()[j] / a[j])))
        .expect("a₊ > 0");
    let mut coefficients = [0.0; 6];
    coefficients[best] = 1.0 / a[best];
    let value = dot(fam.c(), &coefficients);
    Ok(EwSolution { coefficients, value, trace_residual: (dot(a, &coefficients) - 1.0).abs() })
}
