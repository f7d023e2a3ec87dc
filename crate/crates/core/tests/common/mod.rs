#![allow(dead_code)]

use qcm::oracle_mc::{haar_matrix, random_channel, sample_rng};
use qcm::qcore::{CMatrix, ChannelChoi, DenseOperator, SystemShape, C64};

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    sample_rng(seed, 0)
}

pub fn random_cptp(d: usize, outputs: usize, rank: usize, seed: u64) -> ChannelChoi {
    random_channel(d, &SystemShape::uniform(d, outputs).unwrap(), rank, &mut rng(seed)).unwrap()
}

/// Kraus operators `d_in → d_out`, cut from one Haar isometry.
pub fn random_kraus(d_in: usize, d_out: usize, rank: usize, seed: u64) -> Vec<CMatrix> {
    let u = haar_matrix(d_out * rank, &mut rng(seed));
    (0..rank).map(|k| u.view((k * d_out, 0), (d_out, d_in)).into_owned()).collect()
}

/// A full-rank mixed state with random spectrum and eigenbasis.
pub fn random_state(d: usize, seed: u64) -> DenseOperator {
    let mut r = rng(seed);
    let u = haar_matrix(d, &mut r);
    let weights: Vec<f64> = (0..d).map(|_| rand::Rng::random::<f64>(&mut r) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        weights.iter().map(|w| C64::new(w / total, 0.0)),
    ));
    DenseOperator::new(SystemShape::new(vec![d]).unwrap(), &u * diag * u.adjoint()).unwrap()
}

pub fn random_operator(shape: SystemShape, seed: u64) -> DenseOperator {
    let n = shape.side();
    let m = haar_matrix(n, &mut rng(seed)) * C64::new(0.0, 1.5) + haar_matrix(n, &mut rng(seed ^ 0xabc));
    DenseOperator::new(shape, m).unwrap()
}

/// `Re(J)` entrywise, which stays in the real span of the invariant bases.
pub fn real_part(j: &DenseOperator) -> DenseOperator {
    DenseOperator::new(j.shape().clone(), j.matrix().map(|z| C64::new(z.re, 0.0))).unwrap()
}
