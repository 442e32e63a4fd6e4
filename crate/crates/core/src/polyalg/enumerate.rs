use rayon::prelude::*;

use super::poly::Monomial;
use crate::error::{Error, Result};
use crate::lattice::{IVec, ModeIndex, ModeTable, Sign};

/// All momentum-conserving monomials of the given degree whose variables pass
/// `allowed`, in canonical order.
///
/// The first `degree - 1` variables are enumerated as a sorted multiset and the
/// last one is solved from momentum conservation; it is kept only when it is
/// the largest, so every monomial appears once.
pub fn momentum_monomials<F>(table: &ModeTable, degree: usize, allowed: F, budget: usize) -> Result<Vec<Monomial>>
where
    F: Fn(u32) -> bool + Sync,
{
    if degree == 0 {
        return Ok(Vec::new());
    }
    let vars: Vec<u32> = (0..table.len() as u32).filter(|&id| allowed(id)).collect();
    if degree == 1 {
        return Ok(vars
            .iter()
            .filter(|&&id| table.j(id).iter().all(|&x| x == 0))
            .map(|&id| smallvec::smallvec![id])
            .collect());
    }
    let chunks: Vec<Result<Vec<Monomial>>> = (0..vars.len())
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut prefix: Monomial = smallvec::smallvec![vars[first]];
            let mut mom: IVec = table.momentum(&prefix);
            extend(table, &vars, &allowed, degree, first, &mut prefix, &mut mom, &mut out, budget)?;
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c?);
        if all.len() > budget {
            return Err(Error::Budget {
                what: "monomial enumeration".into(),
                reached: all.len(),
                limit: budget,
            });
        }
    }
    all.sort();
    Ok(all)
}

#[allow(clippy::too_many_arguments)]
fn extend<F: Fn(u32) -> bool>(
    table: &ModeTable,
    vars: &[u32],
    allowed: &F,
    degree: usize,
    pos: usize,
    prefix: &mut Monomial,
    mom: &mut IVec,
    out: &mut Vec<Monomial>,
    budget: usize,
) -> Result<()> {
    if prefix.len() == degree - 1 {
        let last = *prefix.last().unwrap();
        for sigma in [Sign::Plus, Sign::Minus] {
            let s = sigma.value();
            let j: IVec = mom.iter().map(|&m| -s * m).collect();
            if let Some(id) = table.id_of(&ModeIndex { j, sigma }) {
                if id >= last && allowed(id) {
                    let mut m = prefix.clone();
                    m.push(id);
                    out.push(m);
                }
            }
        }
        if out.len() > budget {
            return Err(Error::Budget {
                what: "monomial enumeration".into(),
                reached: out.len(),
                limit: budget,
            });
        }
        return Ok(());
    }
    for k in pos..vars.len() {
        let id = vars[k];
        let s = table.sign(id);
        prefix.push(id);
        for (m, x) in mom.iter_mut().zip(table.j(id)) {
            *m += s * x;
        }
        extend(table, vars, allowed, degree, k, prefix, mom, out, budget)?;
        for (m, x) in mom.iter_mut().zip(table.j(id)) {
            *m -= s * x;
        }
        prefix.pop();
    }
    Ok(())
}
