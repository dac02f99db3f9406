//! Random unitary sampling via QR of a complex Gaussian matrix.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::ComplexMatrix;

/// Draws a Haar-ish random unitary by Gram-Schmidt orthonormalization of a
/// seeded complex Gaussian matrix. Deterministic for a fixed seed.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<(Vec<f64>, Vec<f64>)> = (0..dim)
        .map(|_| {
            let re: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
            let im: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
            (re, im)
        })
        .collect();

    // Modified Gram-Schmidt over complex columns.
    for j in 0..dim {
        for prev in 0..j {
            let (pr, pi) = {
                let p = &cols[prev];
                (p.0.clone(), p.1.clone())
            };
            // <prev, col_j> with conjugation on prev.
            let (mut dot_r, mut dot_i) = (0.0, 0.0);
            for k in 0..dim {
                let (ar, ai) = (pr[k], -pi[k]);
                let (br, bi) = (cols[j].0[k], cols[j].1[k]);
                dot_r += ar * br - ai * bi;
                dot_i += ar * bi + ai * br;
            }
            for k in 0..dim {
                let (br, bi) = (pr[k], pi[k]);
                cols[j].0[k] -= dot_r * br - dot_i * bi;
                cols[j].1[k] -= dot_r * bi + dot_i * br;
            }
        }
        let norm: f64 = cols[j]
            .0
            .iter()
            .zip(&cols[j].1)
            .map(|(r, i)| r * r + i * i)
            .sum::<f64>()
            .sqrt();
        for k in 0..dim {
            cols[j].0[k] /= norm;
            cols[j].1[k] /= norm;
        }
    }

    let mut out = ComplexMatrix::zeros(dim);
    for (j, (re, im)) in cols.iter().enumerate() {
        for i in 0..dim {
            out.set(i, j, re[i], im[i]);
        }
    }
    out
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary_and_deterministic() {
        let a = random_unitary(8, 3);
        let b = random_unitary(8, 3);
        assert_eq!(a.max_abs_diff(&b), 0.0);
        assert!(a.is_unitary(1e-10));
    }
}
