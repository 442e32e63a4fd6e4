use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::coeff::Coeff;
use super::poly::{mono_mul, Monomial, SparsePolynomial};
use crate::error::{Error, Result};

/// Default limit on the number of terms a bracket may produce.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

const CHUNK: usize = 256;

/// Options for [`poisson_with`].
#[derive(Clone, Copy, Debug)]
pub struct BracketOptions {
    /// Terms of degree above this are not formed.
    pub max_degree: Option<usize>,
    pub budget: usize,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            max_degree: None,
            budget: DEFAULT_TERM_BUDGET,
        }
    }
}

/// `{P, Q} = -i sum_{(j,s)} s dP/du_{(j,s)} dQ/du_{(j,-s)}`.
pub fn poisson<C: Coeff>(p: &SparsePolynomial<C>, q: &SparsePolynomial<C>) -> Result<SparsePolynomial<C>> {
    poisson_with(p, q, BracketOptions::default())
}

pub fn poisson_with<C: Coeff>(
    p: &SparsePolynomial<C>,
    q: &SparsePolynomial<C>,
    opts: BracketOptions,
) -> Result<SparsePolynomial<C>> {
    assert!(**p.table() == **q.table(), "polynomials over different tables");
    let table = p.table().clone();
    if p.is_empty() || q.is_empty() {
        return Ok(SparsePolynomial::zero(table));
    }

    // dQ/du_v as (cofactor monomial, multiplicity * coefficient), keyed by v.
    let mut dq: HashMap<u32, Vec<(Monomial, C)>> = HashMap::new();
    for (m, c) in q.terms() {
        for i in 0..m.len() {
            if i > 0 && m[i] == m[i - 1] {
                continue;
            }
            let k = m.iter().filter(|&&x| x == m[i]).count() as i64;
            let mut rest = m.clone();
            rest.remove(i);
            dq.entry(m[i])
                .or_default()
                .push((rest, c.clone() * C::from_i64(k)));
        }
    }

    let minus_i = -C::imag_unit();
    let p_terms: Vec<(&Monomial, &C)> = p.terms().collect();
    let partials: Vec<Result<BTreeMap<Monomial, C>>> = p_terms
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
            for &(mp, cp) in chunk {
                for i in 0..mp.len() {
                    if i > 0 && mp[i] == mp[i - 1] {
                        continue;
                    }
                    let v = mp[i];
                    let w = table.conj(v);
                    let Some(list) = dq.get(&w) else { continue };
                    let kp = mp.iter().filter(|&&x| x == v).count() as i64;
                    let mut rest = mp.clone();
                    rest.remove(i);
                    let pref = minus_i.clone()
                        * C::from_i64(table.sign(v) as i64 * kp)
                        * cp.clone();
                    for (mq, cq) in list {
                        if let Some(dmax) = opts.max_degree {
                            if rest.len() + mq.len() > dmax {
                                continue;
                            }
                        }
                        let mono = mono_mul(&rest, mq);
                        let val = pref.clone() * cq.clone();
                        match acc.entry(mono) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(val);
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                let s = e.get().clone() + val;
                                *e.get_mut() = s;
                            }
                        }
                    }
                    if acc.len() > opts.budget {
                        return Err(Error::Budget {
                            what: "bracket terms".into(),
                            reached: acc.len(),
                            limit: opts.budget,
                        });
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut out = SparsePolynomial::zero(table);
    for part in partials {
        for (m, c) in part? {
            out.add_term_unchecked(m, c);
        }
        if out.len() > opts.budget {
            return Err(Error::Budget {
                what: "bracket terms".into(),
                reached: out.len(),
                limit: opts.budget,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ModeTable, MultiIndex};
    use crate::polyalg::GaussianRational;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn action_bracket_with_linear_term() {
        let t = Arc::new(ModeTable::new(1, 2, 2.0).unwrap());
        let mut action: SparsePolynomial<GaussianRational> = SparsePolynomial::zero(t.clone());
        action
            .add_multi(&MultiIndex::from_pairs_1d(&[(0, 1), (0, -1)]).unwrap(), GaussianRational::one())
            .unwrap();
        let mut lin: SparsePolynomial<GaussianRational> = SparsePolynomial::zero(t.clone());
        lin.add_multi(&MultiIndex::from_pairs_1d(&[(0, 1)]).unwrap(), GaussianRational::one())
            .unwrap();
        let b = poisson(&action, &lin).unwrap();
        assert_eq!(b, lin.scale(&GaussianRational::imag_unit()));
    }

    #[test]
    fn self_bracket_vanishes() {
        let t = Arc::new(ModeTable::new(1, 3, 2.0).unwrap());
        let mut p: SparsePolynomial = SparsePolynomial::zero(t);
        p.add_multi(&MultiIndex::from_pairs_1d(&[(3, 1), (1, -1), (2, -1)]).unwrap(), Complex64::new(0.3, 0.1))
            .unwrap();
        p.add_multi(&MultiIndex::from_pairs_1d(&[(3, -1), (1, 1), (2, 1)]).unwrap(), Complex64::new(0.3, -0.1))
            .unwrap();
        p.add_multi(&MultiIndex::from_pairs_1d(&[(1, 1), (1, -1), (2, 1), (2, -1)]).unwrap(), Complex64::new(1.5, 0.0))
            .unwrap();
        assert!(poisson(&p, &p).unwrap().is_empty());
    }

    #[test]
    fn budget_guard() {
        let t = Arc::new(ModeTable::new(1, 3, 2.0).unwrap());
        let mut p: SparsePolynomial = SparsePolynomial::zero(t.clone());
        p.add_multi(&MultiIndex::from_pairs_1d(&[(3, 1), (1, -1), (2, -1)]).unwrap(), Complex64::new(1.0, 0.0))
            .unwrap();
        let mut q: SparsePolynomial = SparsePolynomial::zero(t);
        q.add_multi(&MultiIndex::from_pairs_1d(&[(3, -1), (1, 1), (2, 1)]).unwrap(), Complex64::new(1.0, 0.0))
            .unwrap();
        let opts = BracketOptions {
            max_degree: None,
            budget: 1,
        };
        assert!(matches!(poisson_with(&p, &q, opts), Err(Error::Budget { .. })));
    }
}
