use super::{sym_eig, Lu, Matrix, Tolerances};
use crate::error::{Error, Result};

/// Solves Aᵀ P + P A = −Q for P through the Kronecker-vectorized m²×m²
/// system. Fails with [`Error::NotHurwitz`] when the system is singular or
/// the solution is not positive definite.
pub fn lyap_solve(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    lyap_solve_with(a, q, &Tolerances::default())
}

pub fn lyap_solve_with(a: &Matrix, q: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    a.require_square("Lyapunov A")?;
    q.require_square("Lyapunov Q")?;
    let m = a.rows();
    if q.rows() != m {
        return Err(Error::dim(format!("A is {m}x{m} but Q is {}x{}", q.rows(), q.cols())));
    }
    let q_eig = sym_eig(q)?;
    if q_eig.min() <= 0.0 {
        return Err(Error::NotSpd {
            min_eigenvalue: q_eig.min(),
        });
    }

    // Unknown p_ij sits at index i*m + j. Row (i,j) of the system reads
    // Σ_k a_ki p_kj + Σ_k p_ik a_kj = −q_ij.
    let n = m * m;
    let mut kron = Matrix::zeros(n, n);
    for i in 0..m {
        for j in 0..m {
            let r = i * m + j;
            for k in 0..m {
                kron[(r, k * m + j)] += a[(k, i)];
                kron[(r, i * m + k)] += a[(k, j)];
            }
        }
    }
    let rhs: Vec<f64> = q.as_slice().iter().map(|v| -v).collect();
    let lu = Lu::new(&kron)?;
    if lu.pivot_ratio() < 1e-14 {
        return Err(Error::NotHurwitz(
            "Lyapunov operator is singular (eigenvalues of A sum to zero)".into(),
        ));
    }
    let p = Matrix::from_vec(m, m, lu.solve_vec(&rhs).map_err(|_| {
        Error::NotHurwitz("Lyapunov operator is singular".into())
    })?)?
    .symmetrize();

    let residual = &(&(&a.transpose() * &p) + &(&p * a)) + q;
    let qnorm = q.frobenius();
    if residual.frobenius() > tol.lyap_residual * qnorm {
        return Err(Error::NotHurwitz(format!(
            "Lyapunov residual {:.3e} exceeds tolerance",
            residual.frobenius() / qnorm
        )));
    }
    let p_eig = sym_eig(&p)?;
    if p_eig.min() <= 0.0 {
        return Err(Error::NotHurwitz(format!(
            "Lyapunov solution is not positive definite (min eigenvalue {:.6e})",
            p_eig.min()
        )));
    }
    Ok(p)
}

/// Symmetric positive definite square root via eigendecomposition.
pub fn sqrtm_spd(p: &Matrix) -> Result<Matrix> {
    sqrtm_spd_with(p, &Tolerances::default())
}

pub fn sqrtm_spd_with(p: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let eig = sym_eig(p)?;
    if eig.min() <= 0.0 {
        return Err(Error::NotSpd {
            min_eigenvalue: eig.min(),
        });
    }
    let s = eig.map(f64::sqrt);
    let err = (&(&s * &s) - p).frobenius();
    if err > tol.sqrtm_residual * p.frobenius() {
        return Err(Error::NotSpd {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(s)
}
