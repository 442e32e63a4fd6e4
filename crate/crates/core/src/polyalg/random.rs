use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::coeff::Coeff;
use super::enumerate::momentum_monomials;
use super::poly::SparsePolynomial;
use crate::error::Result;
use crate::lattice::ModeTable;

/// How to draw a random polynomial.
#[derive(Clone, Debug)]
pub struct RandomPolySpec {
    pub degrees: std::ops::RangeInclusive<usize>,
    /// Only variables with `|j|` at most this radius appear.
    pub support_radius: u32,
    /// Probability that an admissible monomial (or conjugate pair) is present.
    pub density: f64,
    /// Enforce `P_conj(J) = conj(P_J)`.
    pub real: bool,
    pub budget: usize,
}

/// Random momentum-conserving polynomial with coefficients from `draw`.
pub fn random_polynomial_with<C, R, F>(
    table: &Arc<ModeTable>,
    spec: &RandomPolySpec,
    rng: &mut R,
    mut draw: F,
) -> Result<SparsePolynomial<C>>
where
    C: Coeff,
    R: Rng,
    F: FnMut(&mut R) -> C,
{
    let r2 = (spec.support_radius as i64).pow(2);
    let mut p = SparsePolynomial::zero(table.clone());
    for d in spec.degrees.clone() {
        let monos = momentum_monomials(table, d, |id| table.norm_sq(id) <= r2, spec.budget)?;
        for m in monos {
            let cm = p.conjugate_mono(&m);
            if spec.real && cm < m {
                continue;
            }
            if rng.gen::<f64>() >= spec.density {
                continue;
            }
            let c = draw(rng);
            if spec.real {
                if cm == m {
                    let re = (c.clone() + c.conj()) * C::from_ratio(1, 2);
                    p.add_term_unchecked(m, re);
                } else {
                    p.add_term_unchecked(cm, c.conj());
                    p.add_term_unchecked(m, c);
                }
            } else {
                p.add_term_unchecked(m, c);
            }
        }
    }
    Ok(p)
}

/// Random polynomial with complex coefficients in the unit disk, rescaled so
/// that the largest coefficient modulus equals `c_p`.
pub fn random_polynomial<R: Rng>(
    table: &Arc<ModeTable>,
    spec: &RandomPolySpec,
    c_p: f64,
    rng: &mut R,
) -> Result<SparsePolynomial<Complex64>> {
    let p = random_polynomial_with(table, spec, rng, |rng| loop {
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() <= 1.0 && z.norm() > 1e-3 {
            break z;
        }
    })?;
    let sup = p.sup_coeff();
    if sup == 0.0 {
        return Ok(p);
    }
    Ok(p.scale(&Complex64::new(c_p / sup, 0.0)))
}
