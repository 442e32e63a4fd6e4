//! Brackets of sparse polynomials, exact and in floating point.

use std::sync::Arc;

use nekhoroshev::lattice::{ModeTable, MultiIndex};
use nekhoroshev::polyalg::{diagonal_quadratic, poisson, Coeff, GaussianRational, SparsePolynomial};
use num_complex::Complex64;

fn main() -> nekhoroshev::Result<()> {
    let table = Arc::new(ModeTable::new(1, 3, 2.0)?);

    // H0 = sum j^2 u_j+ u_j-
    let h0 = diagonal_quadratic(&table, |id| GaussianRational::from_i64(table.norm_sq(id)));

    let mut p = SparsePolynomial::<GaussianRational>::zero(table.clone());
    p.add_multi(&MultiIndex::from_pairs_1d(&[(1, 1), (2, 1), (3, -1)])?, GaussianRational::from_i64(1))?;
    p.add_multi(&MultiIndex::from_pairs_1d(&[(1, -1), (2, -1), (3, 1)])?, GaussianRational::from_i64(1))?;

    let q = poisson(&h0, &p)?;
    println!("{{H0, P}} has {} terms", q.len());
    for (m, c) in q.terms() {
        println!("  {}  {:?}", table.multi_index(m), c);
    }

    let pq = poisson(&p, &h0)?;
    println!("antisymmetric: {}", pq.add(&q).is_empty());

    let a = p.to_c64();
    let b = h0.to_c64();
    let c = a.scale(&Complex64::new(0.0, 1.0)).add(&b);
    let jac = poisson(&a, &poisson(&b, &c)?)?
        .add(&poisson(&b, &poisson(&c, &a)?)?)
        .add(&poisson(&c, &poisson(&a, &b)?)?);
    println!("Jacobi residual {:.2e}", jac.sup_coeff());
    Ok(())
}
