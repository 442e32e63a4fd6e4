use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::classify::{Classifier, ResonanceClass};
use crate::error::{Error, Result};
use crate::polyalg::{Coeff, SparsePolynomial};
use crate::stability::ConstantsLedger;

/// Output of one homological solve.
#[derive(Clone, Debug)]
pub struct HomologicalSolution<C: Coeff = Complex64> {
    pub g: SparsePolynomial<C>,
    pub z: SparsePolynomial<C>,
    pub stats: HomologicalStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HomologicalStats {
    /// Smallest `|divisor|` used.
    pub min_divisor: Option<f64>,
    pub min_divisor_witness: Option<String>,
    /// Smallest `ln |divisor| - ln floor` over solved monomials.
    pub min_ln_margin: Option<f64>,
    pub resonant_terms: usize,
    pub solved_terms: usize,
}

/// Solves `{H0, G} + P = Z` term by term.
///
/// Resonant monomials (classes R0, R2) go to `Z` unchanged; every other
/// monomial gets `G_J = i P_J / sum_l sigma_l omega_{j_l}`. With `ledger`
/// given, divisors below `gamma / (C_deno d N)^{C_exp d^p}` are rejected.
pub fn solve_homological<C: Coeff>(
    p: &SparsePolynomial<C>,
    cls: &Classifier,
    ledger: Option<&ConstantsLedger>,
) -> Result<HomologicalSolution<C>> {
    if **p.table() != **cls.table() {
        return Err(Error::Precondition("polynomial and classifier use different tables".into()));
    }
    if C::EXACT && !cls.is_exact() {
        return Err(Error::Precondition(
            "exact coefficients need a model with exact frequencies".into(),
        ));
    }
    let table = p.table().clone();
    let mut g = SparsePolynomial::zero(table.clone());
    let mut z = SparsePolynomial::zero(table.clone());
    let mut stats = HomologicalStats::default();
    for (m, c) in p.terms() {
        let class = cls.classify_ids(m);
        match class {
            ResonanceClass::High => {
                return Err(Error::Precondition(format!(
                    "monomial {} has three or more high modes",
                    table.multi_index(m)
                )))
            }
            ResonanceClass::R0 | ResonanceClass::R2 => {
                stats.resonant_terms += 1;
                z.add_term_unchecked(m.clone(), c.clone());
                continue;
            }
            _ => {}
        }
        let (div, div_f) = if C::EXACT {
            let e = cls.divisor_exact(m).expect("exact classifier");
            if e.is_zero() {
                return Err(Error::SmallDivisor {
                    witness: table.multi_index(m).to_string(),
                    value: 0.0,
                    floor: ledger.map(|l| l.ln_divisor_floor(m.len(), cls.n_cut()).exp()).unwrap_or(0.0),
                });
            }
            let f = num_traits::ToPrimitive::to_f64(&e).unwrap_or(f64::NAN);
            (C::from_rational(&e), f)
        } else {
            let f = match cls.divisor_exact(m) {
                Some(e) if e.is_zero() => 0.0,
                _ => cls.divisor(m),
            };
            (C::from_c64(Complex64::new(f, 0.0)), f)
        };
        if div_f == 0.0 {
            return Err(Error::SmallDivisor {
                witness: table.multi_index(m).to_string(),
                value: 0.0,
                floor: ledger.map(|l| l.ln_divisor_floor(m.len(), cls.n_cut()).exp()).unwrap_or(0.0),
            });
        }
        if let Some(l) = ledger {
            let ln_floor = l.ln_divisor_floor(m.len(), cls.n_cut());
            let margin = div_f.abs().ln() - ln_floor;
            if margin < 0.0 {
                return Err(Error::SmallDivisor {
                    witness: table.multi_index(m).to_string(),
                    value: div_f.abs(),
                    floor: ln_floor.exp(),
                });
            }
            stats.min_ln_margin = Some(stats.min_ln_margin.map_or(margin, |x: f64| x.min(margin)));
        }
        if stats.min_divisor.map_or(true, |x| div_f.abs() < x) {
            stats.min_divisor = Some(div_f.abs());
            stats.min_divisor_witness = Some(table.multi_index(m).to_string());
        }
        stats.solved_terms += 1;
        g.add_term_unchecked(m.clone(), C::imag_unit() * c.clone() / div);
    }
    Ok(HomologicalSolution { g, z, stats })
}
