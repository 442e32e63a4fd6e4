//! Sparse polynomial algebra on the truncated lattice: storage, Poisson
//! brackets, Hamiltonian vector fields, projections and norm estimators.

mod bracket;
mod coeff;
mod enumerate;
mod io;
mod norms;
mod poly;
mod random;

pub use bracket::{poisson, poisson_with, BracketOptions, DEFAULT_TERM_BUDGET};
pub use coeff::{factorial, Coeff, GaussianRational};
pub use enumerate::momentum_monomials;
pub use io::{PolynomialJson, TermJson};
pub use norms::{
    cutting_bound, field_norm, lemma_factor, norm_mc_estimate, norm_rigorous_bound, norm_upper_bound,
};
pub use poly::{diagonal_field, diagonal_quadratic, mono_mul, Monomial, SparsePolynomial};
pub use random::{random_polynomial, random_polynomial_with, RandomPolySpec};

pub(crate) use poly::high_count;
