//! Haar-distributed random unitaries.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::factors::FactorList;
use crate::indexing::SizeSequence;
use crate::matrix::ComplexMatrix;

/// Samples an `n x n` unitary from the Haar measure.
///
/// A Ginibre matrix (i.i.d. standard complex Gaussians) is QR-factored and
/// each column of `Q` is multiplied by the phase of the matching diagonal
/// entry of `R`, which makes `R`'s diagonal real positive. Without that
/// correction the result is not Haar distributed.
pub fn haar_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(n, &mut rng)
}

pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "haar_unitary needs n >= 1");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = ginibre.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

/// Independent Haar factors of the given sizes, drawn in order from one
/// stream seeded with `seed`.
pub fn haar_factors(sizes: &[usize], seed: u64) -> Result<FactorList> {
    SizeSequence::new(sizes.to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FactorList::new(
        sizes
            .iter()
            .map(|&n| haar_unitary_with(n, &mut rng))
            .collect(),
    )
}

/// Random diagonal unitary with i.i.d. uniform phases.
pub fn random_phase_diagonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut d = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        d[(i, i)] = Complex64::from_polar(1.0, theta);
    }
    d
}
