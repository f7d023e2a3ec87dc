//! Dense complex linear algebra on tensor-product spaces.
//!
//! Everything here works on explicit matrices: operators carry the list of
//! subsystem dimensions so that partial traces, partial transposes and
//! channel application can address individual tensor factors. Subsystem
//! digits are ordered most-significant first, i.e. the first factor of a
//! shape varies slowest in the flat index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest supported local dimension.
pub const MAX_DIM: usize = 12;
/// Largest supported operator side length (`MAX_DIM^3`).
pub const MAX_SIDE: usize = MAX_DIM * MAX_DIM * MAX_DIM;

/// Relative tolerance below which negative eigenvalues are treated as noise.
pub const PSD_TOL: f64 = 1e-9;
/// Absolute tolerance for the trace-preservation check of a Choi matrix.
pub const TP_TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Subsystem dimensions of a tensor-product space, in tensor-factor order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Dimension("a shape needs at least one factor".into()));
        }
        if let Some(&bad) = dims.iter().find(|&&d| !(2..=MAX_DIM).contains(&d)) {
            return Err(Error::DimensionCap(bad));
        }
        let side: usize = dims.iter().product();
        if side > MAX_SIDE {
            return Err(Error::Dimension(format!(
                "operator side {side} exceeds the cap {MAX_SIDE}"
            )));
        }
        Ok(Self { dims })
    }

    /// `n` factors of dimension `d`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    /// Product of all dimensions.
    pub fn side(&self) -> usize {
        self.dims.iter().product()
    }

    /// Common local dimension when every factor has the same size.
    pub fn uniform_dim(&self) -> Option<usize> {
        let d = self.dims[0];
        self.dims.iter().all(|&x| x == d).then_some(d)
    }

    pub fn concat(&self, other: &SystemShape) -> Result<SystemShape> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        SystemShape::new(dims)
    }

    /// Shape made of the factors listed in `factors`, in that order.
    pub fn select(&self, factors: &[usize]) -> Result<SystemShape> {
        SystemShape::new(factors.iter().map(|&f| self.dims[f]).collect())
    }

    /// Splits a flat index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Inverse of [`SystemShape::digits`].
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&digit, &d)| acc * d + digit)
    }

    fn check_factor(&self, factor: usize) -> Result<()> {
        if factor >= self.dims.len() {
            return Err(Error::Dimension(format!(
                "factor index {factor} out of range for {} factors",
                self.dims.len()
            )));
        }
        Ok(())
    }
}

/// A complex square matrix acting on a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    shape: SystemShape,
    mat: CMatrix,
}

impl DenseOperator {
    pub fn new(shape: SystemShape, mat: CMatrix) -> Result<Self> {
        let side = shape.side();
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but the shape {:?} needs side {side}",
                mat.nrows(),
                mat.ncols(),
                shape.dims()
            )));
        }
        Ok(Self { shape, mat })
    }

    pub fn zeros(shape: SystemShape) -> Self {
        let side = shape.side();
        Self { shape, mat: CMatrix::zeros(side, side) }
    }

    pub fn identity(shape: SystemShape) -> Self {
        let side = shape.side();
        Self { shape, mat: CMatrix::identity(side, side) }
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn projector(ket: &Ket) -> Self {
        let a = ket.amplitudes();
        Self { shape: ket.shape().clone(), mat: a * a.adjoint() }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { shape: self.shape.clone(), mat: self.mat.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { shape: self.shape.clone(), mat: self.mat.transpose() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { shape: self.shape.clone(), mat: &self.mat * C64::new(factor, 0.0) }
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { shape: self.shape.clone(), mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { shape: self.shape.clone(), mat: &self.mat - &other.mat })
    }

    pub fn matmul(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { shape: self.shape.clone(), mat: &self.mat * &other.mat })
    }

    /// `U X U†`.
    pub fn conjugate_by(&self, unitary: &DenseOperator) -> Result<Self> {
        self.same_shape(unitary)?;
        Ok(Self {
            shape: self.shape.clone(),
            mat: &unitary.mat * &self.mat * unitary.mat.adjoint(),
        })
    }

    /// Kronecker product; the factors of `other` follow those of `self`.
    pub fn tensor(&self, other: &DenseOperator) -> Result<Self> {
        Ok(Self {
            shape: self.shape.concat(&other.shape)?,
            mat: self.mat.kronecker(&other.mat),
        })
    }

    /// Hilbert–Schmidt inner product `tr(A† B)`.
    pub fn hs_inner(&self, other: &DenseOperator) -> C64 {
        self.mat.zip_fold(&other.mat, ZERO, |acc, a, b| acc + a.conj() * b)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        self.mat
            .zip_fold(&other.mat, 0.0_f64, |acc, a, b| acc.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        let n = self.side();
        (0..n).all(|r| (r..n).all(|c| (self.mat[(r, c)] - self.mat[(c, r)].conj()).norm() <= tol * scale))
    }

    /// True when every entry has a vanishing imaginary part.
    pub fn is_real(&self) -> bool {
        self.mat.iter().all(|z| z.im == 0.0)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Reorders the tensor factors: factor `order[k]` of `self` becomes
    /// factor `k` of the result.
    pub fn permute_factors(&self, order: &[usize]) -> Result<Self> {
        let n = self.shape.num_factors();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&f| f >= n || std::mem::replace(&mut seen[f], true)) {
            return Err(Error::InvalidPermutation(format!("{order:?} is not a factor ordering")));
        }
        let new_shape = self.shape.select(order)?;
        let side = self.side();
        let remap: Vec<usize> = (0..side)
            .map(|idx| {
                let digits = self.shape.digits(idx);
                let moved: Vec<usize> = order.iter().map(|&f| digits[f]).collect();
                new_shape.index(&moved)
            })
            .collect();
        let mut mat = CMatrix::zeros(side, side);
        for c in 0..side {
            for r in 0..side {
                mat[(remap[r], remap[c])] = self.mat[(r, c)];
            }
        }
        Ok(Self { shape: new_shape, mat })
    }

    fn same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape.dims(),
                other.shape.dims()
            )));
        }
        Ok(())
    }
}

/// Ascending eigenvalues of a Hermitian matrix. Real matrices take the
/// cheaper real symmetric path.
pub fn hermitian_eigenvalues(mat: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = if mat.iter().all(|z| z.im == 0.0) {
        let real = mat.map(|z| z.re);
        let sym = (&real + real.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().copied().collect()
    } else {
        let herm = (mat + mat.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    vals
}

/// Square root of a PSD matrix, clamping eigenvalues that are negative only
/// through rounding.
pub(crate) fn psd_sqrt(mat: &CMatrix) -> Result<CMatrix> {
    let herm = (mat + mat.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let max = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let mut roots = Vec::with_capacity(eig.eigenvalues.len());
    for &l in eig.eigenvalues.iter() {
        if l < -PSD_TOL * max.max(1.0) {
            return Err(Error::Domain(format!("operator is not positive semidefinite (eigenvalue {l:.3e})")));
        }
        // rounding-level eigenvalues would otherwise leak ~1e-8 through the root
        let l = if l <= 64.0 * f64::EPSILON * max { 0.0 } else { l };
        roots.push(C64::new(l.sqrt(), 0.0));
    }
    let v = &eig.eigenvectors;
    Ok(v * CMatrix::from_diagonal(&CVector::from_vec(roots)) * v.adjoint())
}

/// A normalized pure state on a tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    shape: SystemShape,
    amps: CVector,
}

impl Ket {
    pub fn new(shape: SystemShape, amps: CVector) -> Result<Self> {
        if amps.len() != shape.side() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a space of dimension {}",
                amps.len(),
                shape.side()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("ket norm is {norm}, expected 1")));
        }
        Ok(Self { shape, amps })
    }

    /// Computational basis vector.
    pub fn basis(shape: SystemShape, index: usize) -> Result<Self> {
        let mut amps = CVector::zeros(shape.side());
        if index >= amps.len() {
            return Err(Error::Dimension(format!("basis index {index} out of range")));
        }
        amps[index] = ONE;
        Ok(Self { shape, amps })
    }

    /// `(1/√d) Σ_k |k⟩`.
    pub fn phi_plus(d: usize) -> Result<Self> {
        phase_state(&vec![0.0; d])
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        Ok(Ket { shape: self.shape.concat(&other.shape)?, amps: self.amps.kronecker(&other.amps) })
    }

    /// `⊗ⁿ |ψ⟩`.
    pub fn tensor_power(&self, n: usize) -> Result<Ket> {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `⟨ψ|X|ψ⟩`.
    pub fn expectation(&self, op: &DenseOperator) -> C64 {
        self.amps.dotc(&(op.matrix() * &self.amps))
    }
}

/// Phase-encoded state `(1/√d) Σ_k e^{iθ_k} |k⟩`.
pub fn phase_state(theta: &[f64]) -> Result<Ket> {
    let d = theta.len();
    if d < 2 {
        return Err(Error::Dimension(format!("a phase state needs at least two angles, got {d}")));
    }
    let shape = SystemShape::new(vec![d])?;
    let norm = 1.0 / (d as f64).sqrt();
    let amps = CVector::from_iterator(d, theta.iter().map(|&t| C64::from_polar(norm, t)));
    Ok(Ket { shape, amps })
}

fn check_state(op: &DenseOperator, name: &str) -> Result<()> {
    let tr = op.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::Domain(format!("{name} has trace {tr}, expected 1")));
    }
    let eig = op.eigenvalues();
    let min = eig.first().copied().unwrap_or(0.0);
    if min < -PSD_TOL {
        return Err(Error::Domain(format!("{name} is not positive semidefinite (eigenvalue {min:.3e})")));
    }
    Ok(())
}

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²` of two density operators.
pub fn fidelity(rho: &DenseOperator, sigma: &DenseOperator) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::Dimension("fidelity arguments have different shapes".into()));
    }
    check_state(rho, "rho")?;
    check_state(sigma, "sigma")?;
    let sr = psd_sqrt(rho.matrix())?;
    let inner = &sr * sigma.matrix() * &sr;
    let herm = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let root_trace: f64 = hermitian_eigenvalues(&herm).iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Fidelity between a pure state and a density operator, `⟨ψ|σ|ψ⟩`.
pub fn fidelity_pure(psi: &Ket, sigma: &DenseOperator) -> f64 {
    psi.expectation(sigma).re
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// original relative order.
pub fn partial_trace(x: &DenseOperator, keep: &[usize]) -> Result<DenseOperator> {
    let shape = x.shape();
    if keep.is_empty() {
        return Err(Error::Dimension("empty keep set; use the full trace instead".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::Dimension(format!("repeated factor in keep set {keep:?}")));
    }
    for &f in &keep_sorted {
        shape.check_factor(f)?;
    }
    let out_shape = shape.select(&keep_sorted)?;
    let traced: Vec<usize> = (0..shape.num_factors()).filter(|f| !keep_sorted.contains(f)).collect();
    let side = x.side();
    let decoded: Vec<Vec<usize>> = (0..side).map(|i| shape.digits(i)).collect();
    let reduced: Vec<usize> = decoded
        .iter()
        .map(|dg| out_shape.index(&keep_sorted.iter().map(|&f| dg[f]).collect::<Vec<_>>()))
        .collect();
    let mut out = CMatrix::zeros(out_shape.side(), out_shape.side());
    let m = x.matrix();
    for c in 0..side {
        let dc = &decoded[c];
        for r in 0..side {
            let dr = &decoded[r];
            if traced.iter().all(|&f| dr[f] == dc[f]) {
                out[(reduced[r], reduced[c])] += m[(r, c)];
            }
        }
    }
    DenseOperator::new(out_shape, out)
}

/// Transposes the given tensor factor.
pub fn partial_transpose(x: &DenseOperator, factor: usize) -> Result<DenseOperator> {
    let shape = x.shape();
    shape.check_factor(factor)?;
    let side = x.side();
    let m = x.matrix();
    let mut out = CMatrix::zeros(side, side);
    for c in 0..side {
        let mut dc = shape.digits(c);
        for r in 0..side {
            let mut dr = shape.digits(r);
            std::mem::swap(&mut dr[factor], &mut dc[factor]);
            out[(shape.index(&dr), shape.index(&dc))] = m[(r, c)];
            std::mem::swap(&mut dr[factor], &mut dc[factor]);
        }
    }
    DenseOperator::new(shape.clone(), out)
}

/// Numerical health of a Choi matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiDiagnostics {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Largest entry of `|tr_out J − 1|`.
    pub tp_residual: f64,
    pub hermiticity_residual: f64,
}

impl ChoiDiagnostics {
    pub fn is_cptp(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL * self.max_eigenvalue.abs().max(1.0)
            && self.tp_residual <= TP_TOL
            && self.hermiticity_residual <= 1e-10
    }
}

/// Choi matrix `J = Σ |i⟩⟨j| ⊗ E(|i⟩⟨j|)` of a channel, input factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelChoi {
    d_in: usize,
    d_out: SystemShape,
    j: DenseOperator,
}

impl ChannelChoi {
    /// Validates positivity and trace preservation.
    pub fn new(d_in: usize, d_out: SystemShape, j: DenseOperator) -> Result<Self> {
        let ch = Self::new_unchecked(d_in, d_out, j)?;
        let diag = ch.diagnostics()?;
        if !diag.is_cptp() {
            return Err(Error::InvalidChannel(format!(
                "min eigenvalue {:.3e}, trace-preservation residual {:.3e}, hermiticity residual {:.3e}",
                diag.min_eigenvalue, diag.tp_residual, diag.hermiticity_residual
            )));
        }
        Ok(ch)
    }

    /// Checks only that the shapes line up.
    pub fn new_unchecked(d_in: usize, d_out: SystemShape, j: DenseOperator) -> Result<Self> {
        let expected = SystemShape::new(vec![d_in])?.concat(&d_out)?;
        if j.shape() != &expected {
            return Err(Error::Dimension(format!(
                "Choi operator shape {:?} does not match input {d_in} and outputs {:?}",
                j.shape().dims(),
                d_out.dims()
            )));
        }
        Ok(Self { d_in, d_out, j })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> &SystemShape {
        &self.d_out
    }

    pub fn choi(&self) -> &DenseOperator {
        &self.j
    }

    pub fn num_outputs(&self) -> usize {
        self.d_out.num_factors()
    }

    pub fn diagnostics(&self) -> Result<ChoiDiagnostics> {
        let eig = self.j.eigenvalues();
        let reduced = partial_trace(&self.j, &[0])?;
        let id = DenseOperator::identity(reduced.shape().clone());
        let adj = self.j.adjoint();
        Ok(ChoiDiagnostics {
            min_eigenvalue: eig.first().copied().unwrap_or(0.0),
            max_eigenvalue: eig.last().copied().unwrap_or(0.0),
            tp_residual: reduced.max_abs_diff(&id),
            hermiticity_residual: self.j.max_abs_diff(&adj),
        })
    }

    /// Identity channel on a `d`-level system.
    pub fn identity(d: usize) -> Result<Self> {
        let shape = SystemShape::new(vec![d, d])?;
        let mut vec = CVector::zeros(d * d);
        for i in 0..d {
            vec[i * d + i] = ONE;
        }
        let j = DenseOperator::new(shape, &vec * vec.adjoint())?;
        Self::new_unchecked(d, SystemShape::new(vec![d])?, j)
    }
}

/// `E(ρ) = tr_in[J (ρᵀ ⊗ 1)]`, evaluated entrywise as
/// `E(ρ)_{pq} = Σ_{ij} ρ_{ij} J_{(i,p),(j,q)}`.
pub fn apply_channel(channel: &ChannelChoi, rho: &DenseOperator) -> Result<DenseOperator> {
    let d_in = channel.d_in();
    if rho.shape().dims() != [d_in] {
        return Err(Error::Dimension(format!(
            "channel expects a {d_in}-dimensional input, got shape {:?}",
            rho.shape().dims()
        )));
    }
    let n_out = channel.d_out().side();
    let j = channel.choi().matrix();
    let r = rho.matrix();
    let mut out = CMatrix::zeros(n_out, n_out);
    for i in 0..d_in {
        for jj in 0..d_in {
            let coeff = r[(i, jj)];
            if coeff == ZERO {
                continue;
            }
            let block = j.view((i * n_out, jj * n_out), (n_out, n_out));
            out.zip_apply(&block, |o, b| *o += coeff * b);
        }
    }
    DenseOperator::new(channel.d_out().clone(), out)
}

/// Choi matrix of `ρ ↦ Σ K ρ K†`. Each Kraus operator maps the
/// `d_in`-dimensional input into the space described by `out_shape`.
pub fn choi_from_kraus(kraus: &[CMatrix], out_shape: SystemShape) -> Result<ChannelChoi> {
    let first = kraus.first().ok_or_else(|| Error::Dimension("empty Kraus set".into()))?;
    let d_in = first.ncols();
    let d_out = out_shape.side();
    if kraus.iter().any(|k| k.ncols() != d_in || k.nrows() != d_out) {
        return Err(Error::Dimension(format!("every Kraus operator must be {d_out}x{d_in}")));
    }
    let mut completeness = CMatrix::zeros(d_in, d_in);
    for k in kraus {
        completeness += k.adjoint() * k;
    }
    let residual = (completeness - CMatrix::identity(d_in, d_in))
        .iter()
        .fold(0.0_f64, |a, z| a.max(z.norm()));
    if residual > 1e-10 {
        return Err(Error::NotTracePreserving(residual));
    }
    let shape = SystemShape::new(vec![d_in])?.concat(&out_shape)?;
    let side = d_in * d_out;
    let mut j = CMatrix::zeros(side, side);
    for k in kraus {
        // |K⟩⟩ = Σ_i |i⟩ ⊗ K|i⟩
        let mut vec = CVector::zeros(side);
        for i in 0..d_in {
            vec.rows_mut(i * d_out, d_out).copy_from(&k.column(i));
        }
        j += &vec * vec.adjoint();
    }
    ChannelChoi::new(d_in, out_shape, DenseOperator::new(shape, j)?)
}
