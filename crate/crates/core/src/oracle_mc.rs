//! Sampling oracles that check the analytic numbers by brute force.
//!
//! Sample `k` of a run with seed `s` always draws from the ChaCha stream
//! `(s, k)`, and partial results are combined by a fixed pairwise sum, so
//! estimates do not depend on the number of threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cloners::IdealMapKind;
use crate::error::{Error, Result};
use crate::qcore::{
    apply_channel, choi_from_kraus, fidelity_pure, phase_state, ChannelChoi, CMatrix, DenseOperator, Ket, SystemShape,
    C64,
};
use crate::symmetry::PhaseSignature;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerMode {
    /// Phase states with iid uniform `θ_k ∈ [0, 2π)`.
    PhaseTorus,
    /// `U|0⟩` with `U` Haar distributed.
    HaarUnitary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub samples: usize,
    pub mode: SamplerMode,
}

impl SamplerConfig {
    pub fn new(seed: u64, samples: usize, mode: SamplerMode) -> Result<Self> {
        if samples < 2 {
            return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
        }
        Ok(Self { seed, samples, mode })
    }

    /// The sampler matching `kind`'s input family.
    pub fn for_kind(kind: IdealMapKind, seed: u64, samples: usize) -> Result<Self> {
        let mode = if kind.is_phase_covariant() { SamplerMode::PhaseTorus } else { SamplerMode::HaarUnitary };
        Self::new(seed, samples, mode)
    }
}

/// Sample mean with its standard error `s/√n`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Estimate {
    /// Whether `value` is within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr + 1e-12
    }
}

/// The generator for sample `index` of a run.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fixed-shape pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Runs `f` once per sample stream and returns mean and standard error.
pub fn estimate<F>(samples: usize, seed: u64, f: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    if samples < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {samples}")));
    }
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|k| f(&mut sample_rng(seed, k)))
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let mean = pairwise_sum(&values) / n;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    Ok(Estimate { mean, stderr: (var / n).sqrt(), samples, seed })
}

pub fn random_phases<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// Haar-random unitary on one qudit.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<DenseOperator> {
    if d < 2 {
        return Err(Error::Dimension(format!("Haar unitary needs d >= 2, got {d}")));
    }
    DenseOperator::new(SystemShape::new(vec![d])?, haar_matrix(d, rng))
}

/// QR of a complex Ginibre matrix, with the phases of `diag(R)` moved into
/// `Q`. Without that correction the result is not Haar distributed.
pub fn haar_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / std::f64::consts::SQRT_2
    });
    let (mut q, r) = g.qr().unpack();
    for k in 0..n {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random channel `d_in → out_shape` with `rank` Kraus operators, cut from
/// the first `d_in` columns of a Haar unitary on `out ⊗ C^rank`.
pub fn random_channel<R: Rng + ?Sized>(
    d_in: usize,
    out_shape: &SystemShape,
    rank: usize,
    rng: &mut R,
) -> Result<ChannelChoi> {
    let d_out = out_shape.side();
    let big = d_out * rank;
    if big < d_in {
        return Err(Error::Dimension(format!("rank {rank} too small for an isometry from dimension {d_in}")));
    }
    let u = haar_matrix(big, rng);
    let kraus: Vec<CMatrix> = (0..rank)
        .map(|k| u.view((k * d_out, 0), (d_out, d_in)).into_owned())
        .collect();
    choi_from_kraus(&kraus, out_shape.clone())
}

/// Monte Carlo process fidelity `E_ψ ⟨ideal(ψ)|E(|ψ⟩⟨ψ|)|ideal(ψ)⟩`.
pub fn mc_process_fidelity(channel: &ChannelChoi, kind: IdealMapKind, cfg: &SamplerConfig) -> Result<Estimate> {
    let d = channel.d_in();
    let expected = if kind.is_phase_covariant() { SamplerMode::PhaseTorus } else { SamplerMode::HaarUnitary };
    if cfg.mode != expected {
        return Err(Error::SamplerMismatch(format!("{kind} needs {expected:?}, got {:?}", cfg.mode)));
    }
    if channel.d_out() != &SystemShape::uniform(d, kind.num_outputs())? {
        return Err(Error::Dimension(format!("channel outputs {:?} do not fit {kind}", channel.d_out().dims())));
    }
    let zero = Ket::basis(SystemShape::new(vec![d])?, 0)?;
    estimate(cfg.samples, cfg.seed, |rng| {
        let psi = match cfg.mode {
            SamplerMode::PhaseTorus => phase_state(&random_phases(d, rng))?,
            SamplerMode::HaarUnitary => {
                let u = haar_unitary(d, rng)?;
                Ket::new(zero.shape().clone(), u.matrix() * zero.amplitudes())?
            }
        };
        let out = apply_channel(channel, &DenseOperator::projector(&psi))?;
        Ok(fidelity_pure(&kind.ideal_output(&psi)?, &out))
    })
}

/// Largest `d` accepted by [`quadrature_twirl_check`].
pub const QUADRATURE_MAX_DIM: usize = 3;

/// The phase twirl by the product trapezoid rule with `points` nodes per
/// angle. Exact once `points` exceeds the largest frequency present.
pub fn quadrature_twirl_check(x: &DenseOperator, sig: &PhaseSignature, points: usize) -> Result<DenseOperator> {
    let shape = x.shape();
    let d = shape
        .uniform_dim()
        .filter(|_| shape.num_factors() == sig.num_factors())
        .ok_or_else(|| Error::Dimension(format!("operator shape {:?} does not fit the signature", shape.dims())))?;
    if d > QUADRATURE_MAX_DIM {
        return Err(Error::Domain(format!("quadrature twirl limited to d <= {QUADRATURE_MAX_DIM}, got {d}")));
    }
    if points == 0 {
        return Err(Error::Domain("need at least one quadrature point".into()));
    }
    let side = shape.side();
    let digits: Vec<Vec<usize>> = (0..side).map(|i| shape.digits(i)).collect();
    let nodes = points.pow(d as u32);
    let step = std::f64::consts::TAU / points as f64;
    let m = x.matrix();
    let mut acc = CMatrix::zeros(side, side);
    let mut phase = vec![C64::new(0.0, 0.0); side];
    for node in 0..nodes {
        let theta: Vec<f64> = (0..d).map(|k| ((node / points.pow(k as u32)) % points) as f64 * step).collect();
        for (idx, dg) in digits.iter().enumerate() {
            let angle: f64 = dg.iter().zip(sig.signs()).map(|(&a, &s)| s as f64 * theta[a]).sum();
            phase[idx] = C64::from_polar(1.0, angle);
        }
        for c in 0..side {
            for r in 0..side {
                acc[(r, c)] += m[(r, c)] * phase[r] * phase[c].conj();
            }
        }
    }
    DenseOperator::new(shape.clone(), acc / C64::new(nodes as f64, 0.0))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut dmax) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        dmax = dmax.max((i as f64 / n - j as f64 / m).abs());
    }
    dmax
}

/// Asymptotic 1% critical value of [`ks_statistic`].
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}
