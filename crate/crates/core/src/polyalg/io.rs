use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coeff::Coeff;
use super::poly::{Monomial, SparsePolynomial};
use crate::error::{Error, Result};
use crate::lattice::{ModeIndex, ModeTable, Sign};

/// One serialized term: `[[[j, sigma], ...], re, im]`.
pub type TermJson = (Vec<(Vec<i32>, i32)>, f64, f64);

/// JSON form of a polynomial. Terms appear in canonical monomial order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub dim: usize,
    pub k_max: u32,
    pub c: f64,
    pub terms: Vec<TermJson>,
}

impl<C: Coeff> SparsePolynomial<C> {
    pub fn to_json(&self) -> PolynomialJson {
        let t = self.table();
        PolynomialJson {
            dim: t.dim(),
            k_max: t.k_max(),
            c: t.c(),
            terms: self
                .terms()
                .map(|(m, c)| {
                    let z = c.to_c64();
                    let entries = m
                        .iter()
                        .map(|&id| (t.j(id).to_vec(), t.sign(id)))
                        .collect();
                    (entries, z.re, z.im)
                })
                .collect(),
        }
    }
}

impl SparsePolynomial<Complex64> {
    /// Rebuilds a polynomial; `table` is created from the header when absent.
    pub fn from_json(json: &PolynomialJson, table: Option<Arc<ModeTable>>) -> Result<Self> {
        let table = match table {
            Some(t) => t,
            None => Arc::new(ModeTable::new(json.dim, json.k_max, json.c)?),
        };
        let mut p = SparsePolynomial::zero(table.clone());
        for (entries, re, im) in &json.terms {
            let mut mono = Monomial::new();
            for (j, s) in entries {
                let m = ModeIndex::new(j, Sign::from_i32(*s)?);
                mono.push(
                    table
                        .id_of(&m)
                        .ok_or_else(|| Error::Domain(format!("mode {m} outside table")))?,
                );
            }
            mono.sort_unstable();
            p.add_term(mono, Complex64::new(*re, *im))?;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MultiIndex;

    #[test]
    fn round_trip() {
        let t = Arc::new(ModeTable::new(1, 3, 2.0).unwrap());
        let mut p: SparsePolynomial = SparsePolynomial::zero(t.clone());
        p.add_multi(&MultiIndex::from_pairs_1d(&[(3, 1), (1, -1), (2, -1)]).unwrap(), Complex64::new(0.25, -1.0))
            .unwrap();
        p.add_multi(&MultiIndex::from_pairs_1d(&[(0, 1), (0, -1)]).unwrap(), Complex64::new(2.0, 0.0))
            .unwrap();
        let js = serde_json::to_string(&p.to_json()).unwrap();
        assert!(js.contains("[[[[0],1],[[0],-1]],2.0,0.0]"));
        let back = SparsePolynomial::from_json(&serde_json::from_str(&js).unwrap(), None).unwrap();
        assert_eq!(back, p);
    }
}
