//! Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
//! approximant.

use super::{Lu, Matrix};
use crate::error::{Error, Result};

/// Padé(6,6) numerator coefficients c_k = (12-k)! 6! / (12! k! (6-k)!).
const PADE6: [f64; 7] = [
    1.0,
    0.5,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// Scaled argument must satisfy ‖M t‖₁ / 2^s ≤ this.
const SCALE_THRESHOLD: f64 = 0.5;

/// e^{M t}.
pub fn expm(m: &Matrix, t: f64) -> Result<Matrix> {
    m.require_square("expm input")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("expm time argument"));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("expm input"));
    }
    let n = m.rows();
    let x = m.scale(t);
    let norm = x.norm1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }

    let mut squarings = 0u32;
    if norm > SCALE_THRESHOLD {
        squarings = (norm / SCALE_THRESHOLD).log2().ceil() as u32;
    }
    let x = x.scale(0.5f64.powi(squarings as i32));

    // Horner-free accumulation of even and odd parts: N = U + V, D = U - V
    // where U holds the even powers and V the odd ones.
    let mut even = Matrix::identity(n).scale(PADE6[0]);
    let mut odd = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n);
    for (k, &c) in PADE6.iter().enumerate().skip(1) {
        power = &power * &x;
        let term = power.scale(c);
        if k % 2 == 0 {
            even = &even + &term;
        } else {
            odd = &odd + &term;
        }
    }
    let num = &even + &odd;
    let den = &even - &odd;
    let mut r = Lu::new(&den)?.solve(&num)?;

    for _ in 0..squarings {
        r = &r * &r;
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("expm result (overflow)"));
    }
    Ok(r)
}
