use super::{conjugate_gradient, norm, project_zero_mean_in_place, CsrMatrix, OperatorError};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Lowest nonzero generalized eigenpairs of `K u = λ M u`.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Mass-normalised, zero-mean eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// Relative residuals `‖K x - λ M x‖ / ‖λ M x‖`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra block vectors beyond the requested count.
    pub guard_vectors: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 500,
            guard_vectors: 4,
        }
    }
}

/// `λ₁`, the smallest positive eigenvalue, with default options.
pub fn first_nonzero_eigenvalue(k: &CsrMatrix, mass: &[f64]) -> Result<f64, OperatorError> {
    Ok(lowest_eigenpairs(k, mass, 1, EigenOptions::default())?.values[0])
}

/// Block inverse iteration on the mass-orthogonal complement of constants, with a
/// Rayleigh–Ritz step each sweep so that (near-)degenerate eigenvalues converge individually.
pub fn lowest_eigenpairs(
    k: &CsrMatrix,
    mass: &[f64],
    count: usize,
    opts: EigenOptions,
) -> Result<EigenPairs, OperatorError> {
    let n = k.dim();
    let block = (count + opts.guard_vectors).min(n.saturating_sub(1));
    if count == 0 || block < count {
        return Err(OperatorError::InvalidParameter(format!(
            "cannot compute {count} eigenpairs of a {n}-vertex operator"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x: Vec<Vec<f64>> = (0..block)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            project_zero_mean_in_place(&mut v, mass);
            v
        })
        .collect();

    let mut last = None;
    for it in 1..=opts.max_iterations {
        let mut y = Vec::with_capacity(block);
        for xi in &x {
            let mut rhs: Vec<f64> = xi.iter().zip(mass).map(|(a, m)| a * m).collect();
            let shift = rhs.iter().sum::<f64>() / n as f64;
            rhs.iter_mut().for_each(|r| *r -= shift);
            let mut sol = xi.clone();
            let out = conjugate_gradient(k, &rhs, &mut sol, 1e-13, 20 * n + 100);
            if !out.converged && out.residual > 1e-10 * norm(&rhs) {
                return Err(OperatorError::SolverFailed {
                    iterations: out.iterations,
                    residual: out.residual,
                });
            }
            project_zero_mean_in_place(&mut sol, mass);
            y.push(sol);
        }
        let (values, vectors) = rayleigh_ritz(k, mass, &y)?;
        let residuals: Vec<f64> = values
            .iter()
            .zip(&vectors)
            .map(|(&lam, v)| relative_residual(k, mass, lam, v))
            .collect();
        let done = residuals[..count].iter().all(|&r| r <= opts.tolerance);
        x = vectors;
        if done {
            return Ok(EigenPairs {
                values: values[..count].to_vec(),
                vectors: x.into_iter().take(count).collect(),
                residuals: residuals[..count].to_vec(),
                iterations: it,
            });
        }
        last = Some(residuals[0]);
    }
    Err(OperatorError::EigenNotConverged {
        iterations: opts.max_iterations,
        residual: last.unwrap_or(f64::NAN),
    })
}

pub(crate) fn relative_residual(k: &CsrMatrix, mass: &[f64], lam: f64, v: &[f64]) -> f64 {
    let kv = k.mul_vec(v);
    let mv: Vec<f64> = v.iter().zip(mass).map(|(a, m)| a * m * lam).collect();
    let r: Vec<f64> = kv.iter().zip(&mv).map(|(a, b)| a - b).collect();
    norm(&r) / norm(&mv)
}

/// Ritz pairs of `(K, M)` on span(`basis`), ascending, mass-normalised.
fn rayleigh_ritz(
    k: &CsrMatrix,
    mass: &[f64],
    basis: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<Vec<f64>>), OperatorError> {
    let b = basis.len();
    let kb: Vec<Vec<f64>> = basis.iter().map(|v| k.mul_vec(v)).collect();
    let mut a_small = DMatrix::zeros(b, b);
    let mut m_small = DMatrix::zeros(b, b);
    for i in 0..b {
        for j in 0..=i {
            let kij = super::dot(&basis[i], &kb[j]);
            let mij: f64 = basis[i]
                .iter()
                .zip(&basis[j])
                .zip(mass)
                .map(|((p, q), m)| p * q * m)
                .sum();
            a_small[(i, j)] = kij;
            a_small[(j, i)] = kij;
            m_small[(i, j)] = mij;
            m_small[(j, i)] = mij;
        }
    }
    let chol = m_small
        .cholesky()
        .ok_or(OperatorError::InvalidParameter("Ritz basis lost rank".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(OperatorError::InvalidParameter("Ritz basis lost rank".into()))?;
    let c = &l_inv * a_small * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..b).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let coeffs = l_inv.transpose() * &eig.eigenvectors;
    let n = basis[0].len();
    let mut values = Vec::with_capacity(b);
    let mut vectors = Vec::with_capacity(b);
    for &col in &order {
        values.push(eig.eigenvalues[col]);
        let mut v = vec![0.0; n];
        for (i, bi) in basis.iter().enumerate() {
            let w = coeffs[(i, col)];
            for (vk, bk) in v.iter_mut().zip(bi) {
                *vk += w * bk;
            }
        }
        vectors.push(v);
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_icosphere, generate_torus};
    use crate::operators::DiscreteOperators;
    use crate::Vec3;

    #[test]
    fn sphere_lambda1_and_scaling() {
        let m1 = generate_icosphere(Vec3::zeros(), 1.0, 4).unwrap();
        let ops = DiscreteOperators::assemble(&m1).unwrap();
        let l1 = first_nonzero_eigenvalue(&ops.stiffness, &ops.mass).unwrap();
        assert!((l1 - 2.0).abs() / 2.0 < 0.02, "{l1}");
        let m2 = generate_icosphere(Vec3::zeros(), 2.0, 4).unwrap();
        let ops2 = DiscreteOperators::assemble(&m2).unwrap();
        let l2 = first_nonzero_eigenvalue(&ops2.stiffness, &ops2.mass).unwrap();
        assert!((l2 - 0.5).abs() / 0.5 < 0.02, "{l2}");
        assert!((l1 / l2 - 4.0).abs() < 1e-6);
    }

    #[test]
    fn residuals_are_small_and_vectors_zero_mean() {
        let m = generate_torus(Vec3::zeros(), 2.0, 0.8, 32, 16).unwrap();
        let ops = DiscreteOperators::assemble(&m).unwrap();
        let pairs = lowest_eigenpairs(&ops.stiffness, &ops.mass, 3, EigenOptions::default()).unwrap();
        for (i, v) in pairs.vectors.iter().enumerate() {
            assert!(pairs.values[i] > 0.0);
            assert!(pairs.residuals[i] <= 1e-8);
            let mean: f64 = v.iter().zip(&ops.mass).map(|(a, b)| a * b).sum();
            assert!(mean.abs() < 1e-10);
            let mnorm: f64 = v.iter().zip(&ops.mass).map(|(a, b)| a * a * b).sum();
            assert!((mnorm - 1.0).abs() < 1e-10);
        }
        assert!(pairs.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_error_shrinks_with_refinement() {
        let errs: Vec<f64> = (3..=5)
            .map(|s| {
                let m = generate_icosphere(Vec3::zeros(), 1.0, s).unwrap();
                let ops = DiscreteOperators::assemble(&m).unwrap();
                (first_nonzero_eigenvalue(&ops.stiffness, &ops.mass).unwrap() - 2.0).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }
}
