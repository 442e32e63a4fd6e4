use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::coeff::Coeff;
use super::poly::{high_count, SparsePolynomial};
use crate::error::{Error, Result};
use crate::weights::{sample_sphere, WeightSpec, WeightedState};

/// `sum_d C_{P_d} r^{d-2}` over the homogeneous slices of `P`.
pub fn norm_upper_bound<C: Coeff>(p: &SparsePolynomial<C>, r: f64, w: &WeightSpec) -> Result<f64> {
    if !(w.s > w.s0) {
        return Err(Error::Precondition(format!(
            "norm bound needs s > s0, got s = {}, s0 = {}",
            w.s, w.s0
        )));
    }
    Ok(p.sup_coeff_by_degree()
        .into_iter()
        .map(|(d, c)| c * r.powi(d as i32 - 2))
        .sum())
}

/// Degree-dependent factor that turns the slice bound into a rigorous bound on
/// `|P|_{r,s}` for the stored-coefficient convention:
/// `2 d (d-1) / 3^{(d-2)/2}`.
///
/// One factor `d` comes from differentiating, `d-1` from choosing which
/// remaining factor carries the full weight, `2` from the two signs, and
/// `3^{-(d-2)/2}` from bounding each remaining factor in `l^1` by
/// `||u||_s (sum e^{(2Cf-2) s0 f})^{1/2} < ||u||_s / sqrt(3)`.
pub fn lemma_factor(d: usize) -> f64 {
    let d = d as f64;
    2.0 * d * (d - 1.0) / 3f64.powf((d - 2.0) / 2.0)
}

/// [`norm_upper_bound`] with [`lemma_factor`] applied slice by slice.
pub fn norm_rigorous_bound<C: Coeff>(p: &SparsePolynomial<C>, r: f64, w: &WeightSpec) -> Result<f64> {
    norm_upper_bound(p, r, w)?;
    Ok(p.sup_coeff_by_degree()
        .into_iter()
        .map(|(d, c)| lemma_factor(d) * c * r.powi(d as i32 - 2))
        .sum())
}

/// Monte Carlo lower estimate of `sup_{||u||_s = r} ||X_P(u)||_s / r`.
pub fn norm_mc_estimate<C: Coeff>(
    p: &SparsePolynomial<C>,
    r: f64,
    w: &WeightSpec,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Domain("norm_mc_estimate needs at least one sample".into()));
    }
    if p.is_empty() {
        return Ok(0.0);
    }
    let table: &Arc<_> = p.table();
    let pc = p.to_c64();
    let support: Vec<u32> = (0..table.len() as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let u = sample_sphere(table, w, r, &support, false, &mut rng)?;
        let x = WeightedState {
            table: table.clone(),
            amps: pc.vector_field(&u.amps),
        };
        best = best.max(x.norm_s(w, w.s) / r);
    }
    Ok(best)
}

/// Field norm at one state, `||X_P(u)||_s`.
pub fn field_norm<C: Coeff>(p: &SparsePolynomial<C>, u: &[Complex64], w: &WeightSpec) -> f64 {
    let x = WeightedState {
        table: p.table().clone(),
        amps: p.to_c64().vector_field(u),
    };
    x.norm_s(w, w.s)
}

/// `sum_d C_{P_d} 2^d r^{d-2} / e^{(s - s0) f(N)}` for polynomials whose
/// monomials all carry at least three modes above `N`.
pub fn cutting_bound<C: Coeff>(p: &SparsePolynomial<C>, r: f64, n_cut: u32, w: &WeightSpec) -> Result<f64> {
    let t = p.table().clone();
    if let Some((m, _)) = p.terms().find(|(m, _)| high_count(&t, m, n_cut) < 3) {
        return Err(Error::Precondition(format!(
            "cutting bound needs >= 3 high modes, {} has {}",
            t.multi_index(m),
            high_count(&t, m, n_cut)
        )));
    }
    let decay = ((w.s - w.s0) * w.f((n_cut as f64).max(1.0))).exp();
    Ok(p.sup_coeff_by_degree()
        .into_iter()
        .map(|(d, c)| c * 2f64.powi(d as i32) * r.powi(d as i32 - 2))
        .sum::<f64>()
        / decay)
}
