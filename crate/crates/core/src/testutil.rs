use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matlin::Mat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Q factor of a random square matrix by modified Gram-Schmidt.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let a = random_mat(rng, n, n);
    let mut q = Mat::zeros(n, n);
    for j in 0..n {
        let mut v = a.column(j);
        for k in 0..j {
            let qk = q.column(k);
            let d: f64 = v.iter().zip(&qk).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(&qk) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..n {
            q[(i, j)] = v[i] / norm;
        }
    }
    q
}
