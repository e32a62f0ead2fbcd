//! Random states, isometries and channels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::error::Result;
use crate::numerics::{c, CVector, ComplexMatrix, Tolerance};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniformly distributed pure state in `C^d` (normalized complex Gaussian).
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// `rows x cols` matrix with orthonormal columns, `cols <= rows`.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(cols <= rows && cols > 0, "isometry needs 0 < cols <= rows");
    let g = DMatrix::from_fn(rows, cols, |_, _| gaussian(rng));
    ComplexMatrix::from_dmatrix(g.qr().q()).expect("QR of a finite matrix is finite")
}

/// Random channel with `k` Kraus operators, cut from a `kd x d` isometry.
pub fn random_channel(
    name: impl Into<String>,
    d: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Result<KrausChannel> {
    let w = random_isometry(k * d, d, rng);
    let kraus = (0..k)
        .map(|block| ComplexMatrix::from_dmatrix(w.as_dmatrix().rows(block * d, d).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::checked(name, kraus, &Tolerance::default())
}

/// Positive Schmidt coefficients bounded away from zero, normalized.
pub fn random_schmidt_coeffs(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.0)).collect();
    let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
    raw.into_iter().map(|a| a / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_pure_state(3, &mut rng);
        assert!((v.norm() - 1.0).abs() < 1e-12);

        let w = random_isometry(5, 3, &mut rng);
        assert!((&w.dagger() * &w).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);

        let ch = random_channel("r", 3, 4, &mut rng).unwrap();
        assert_eq!(ch.kraus().len(), 4);
        assert!(ch.validate().completeness_defect < 1e-12);

        let a = random_schmidt_coeffs(4, &mut rng);
        assert!(a.iter().all(|&x| x > 0.0));
        assert!((a.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
