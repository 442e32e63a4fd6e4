use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use smallvec::SmallVec;

use super::coeff::Coeff;
use crate::error::{Error, Result};
use crate::lattice::{ModeTable, MultiIndex};

/// Sorted list of variable ids; repeated ids are powers.
pub type Monomial = SmallVec<[u32; 8]>;

/// Momentum-conserving polynomial in the variables of a [`ModeTable`].
///
/// The coefficient stored under a monomial is the coefficient of that monomial
/// in the expanded polynomial, so ordered-tuple multiplicities are already
/// folded in.
#[derive(Clone, Debug)]
pub struct SparsePolynomial<C: Coeff = Complex64> {
    table: Arc<ModeTable>,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> PartialEq for SparsePolynomial<C> {
    fn eq(&self, other: &Self) -> bool {
        *self.table == *other.table && self.terms == other.terms
    }
}

/// Merges two sorted monomials.
pub fn mono_mul(a: &[u32], b: &[u32]) -> Monomial {
    let mut out = Monomial::with_capacity(a.len() + b.len());
    let (mut i, mut k) = (0, 0);
    while i < a.len() && k < b.len() {
        if a[i] <= b[k] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[k]);
            k += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[k..]);
    out
}

impl<C: Coeff> SparsePolynomial<C> {
    pub fn zero(table: Arc<ModeTable>) -> Self {
        SparsePolynomial {
            table,
            terms: BTreeMap::new(),
        }
    }

    pub fn table(&self) -> &Arc<ModeTable> {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<Monomial, C> {
        self.terms
    }

    pub fn get(&self, mono: &[u32]) -> Option<&C> {
        self.terms.get(mono)
    }

    pub(crate) fn from_terms_unchecked(table: Arc<ModeTable>, terms: BTreeMap<Monomial, C>) -> Self {
        SparsePolynomial { table, terms }
    }

    fn check_mono(&self, mono: &[u32]) -> Result<()> {
        if mono.is_empty() {
            return Err(Error::Domain("constant terms are not represented".into()));
        }
        if mono.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("monomial ids must be sorted".into()));
        }
        if mono.iter().any(|&id| id as usize >= self.table.len()) {
            return Err(Error::Domain("monomial id outside table".into()));
        }
        if self.table.momentum(mono).iter().any(|&x| x != 0) {
            return Err(Error::Domain(format!(
                "monomial {} violates momentum conservation",
                self.table.multi_index(mono)
            )));
        }
        Ok(())
    }

    /// Adds `c u^mono`, checking momentum conservation.
    pub fn add_term(&mut self, mono: Monomial, c: C) -> Result<()> {
        self.check_mono(&mono)?;
        self.add_term_unchecked(mono, c);
        Ok(())
    }

    pub fn add_multi(&mut self, m: &MultiIndex, c: C) -> Result<()> {
        let ids = self.table.ids_of(m)?;
        self.add_term(ids, c)
    }

    pub(crate) fn add_term_unchecked(&mut self, mono: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    /// `(min degree, max degree)`, or `None` for the zero polynomial.
    pub fn degree_range(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys().map(|m| m.len());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|m| m.len()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn filter(&self, mut keep: impl FnMut(&[u32]) -> bool) -> Self {
        SparsePolynomial {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn partition(&self, mut pred: impl FnMut(&[u32]) -> bool) -> (Self, Self) {
        let mut yes = BTreeMap::new();
        let mut no = BTreeMap::new();
        for (m, c) in &self.terms {
            if pred(m) {
                yes.insert(m.clone(), c.clone());
            } else {
                no.insert(m.clone(), c.clone());
            }
        }
        (
            Self::from_terms_unchecked(self.table.clone(), yes),
            Self::from_terms_unchecked(self.table.clone(), no),
        )
    }

    /// Homogeneous part of degree `d`.
    pub fn homogeneous(&self, d: usize) -> Self {
        self.filter(|m| m.len() == d)
    }

    /// Splits into degrees `<= d` and `> d`.
    pub fn project_high_degree(&self, d: usize) -> (Self, Self) {
        self.partition(|m| m.len() <= d)
    }

    /// Splits off the monomials with at least `min_high` modes above `n_cut`.
    pub fn project_high_modes(&self, n_cut: u32, min_high: usize) -> Result<(Self, Self)> {
        if !(2..=3).contains(&min_high) {
            return Err(Error::Domain(format!("min_high must be 2 or 3, got {min_high}")));
        }
        let t = self.table.clone();
        let (extracted, kept) = self.partition(|m| high_count(&t, m, n_cut) >= min_high);
        Ok((kept, extracted))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert!(*self.table == *other.table, "polynomials over different tables");
        for (m, c) in &other.terms {
            self.add_term_unchecked(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-C::one()))
    }

    pub fn scale(&self, a: &C) -> Self {
        let mut out = Self::zero(self.table.clone());
        for (m, c) in &self.terms {
            out.add_term_unchecked(m.clone(), c.clone() * a.clone());
        }
        out
    }

    /// `C_P`, the largest coefficient modulus.
    pub fn sup_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus in each degree.
    pub fn sup_coeff_by_degree(&self) -> BTreeMap<usize, f64> {
        let mut out: BTreeMap<usize, f64> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = out.entry(m.len()).or_insert(0.0);
            *e = e.max(c.abs());
        }
        out
    }

    /// Ids of the conjugate monomial, sorted.
    pub fn conjugate_mono(&self, mono: &[u32]) -> Monomial {
        let mut c: Monomial = mono.iter().map(|&id| self.table.conj(id)).collect();
        c.sort_unstable();
        c
    }

    /// Largest `|P_conj(J) - conj(P_J)|`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            let cm = self.conjugate_mono(m);
            let other = self.terms.get(&cm).cloned().unwrap_or_else(C::zero);
            worst = worst.max((other - c.conj()).abs());
        }
        worst
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    pub fn conserves_momentum(&self) -> bool {
        self.terms
            .keys()
            .all(|m| self.table.momentum(m).iter().all(|&x| x == 0))
    }

    pub fn to_c64(&self) -> SparsePolynomial<Complex64> {
        let mut out = SparsePolynomial::zero(self.table.clone());
        for (m, c) in &self.terms {
            out.add_term_unchecked(m.clone(), c.to_c64());
        }
        out
    }

    pub fn convert<D: Coeff>(&self) -> SparsePolynomial<D> {
        let mut out = SparsePolynomial::zero(self.table.clone());
        for (m, c) in &self.terms {
            out.add_term_unchecked(m.clone(), D::from_c64(c.to_c64()));
        }
        out
    }

    /// Evaluates `P(u)` for amplitudes indexed by variable id.
    pub fn eval(&self, u: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_c64() * m.iter().map(|&id| u[id as usize]).product::<Complex64>())
            .sum()
    }

    /// Hamiltonian vector field `(X_P)_{(j,s)} = -s i dP/du_{(j,-s)}` at `u`.
    pub fn vector_field(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut grad = vec![Complex64::new(0.0, 0.0); self.table.len()];
        for (m, c) in &self.terms {
            let c = c.to_c64();
            for i in 0..m.len() {
                if i > 0 && m[i] == m[i - 1] {
                    continue;
                }
                let mut k = 0usize;
                let mut rest = c;
                let mut skipped = false;
                for &id in m.iter() {
                    if id == m[i] {
                        k += 1;
                        if !skipped {
                            skipped = true;
                            continue;
                        }
                    }
                    rest *= u[id as usize];
                }
                grad[m[i] as usize] += rest * k as f64;
            }
        }
        let mut field = vec![Complex64::new(0.0, 0.0); self.table.len()];
        for (v, g) in grad.into_iter().enumerate() {
            let target = self.table.conj(v as u32);
            let s = self.table.sign(target) as f64;
            field[target as usize] = Complex64::new(0.0, -s) * g;
        }
        field
    }
}

pub(crate) fn high_count(t: &ModeTable, m: &[u32], n_cut: u32) -> usize {
    m.iter().filter(|&&id| t.is_high(id, n_cut)).count()
}

/// Field of the diagonal quadratic `sum omega_j u_{(j,+)} u_{(j,-)}`:
/// `(X)_{(j,s)} = -s i omega_j u_{(j,s)}`.
pub fn diagonal_field(table: &ModeTable, omega: &[f64], u: &[Complex64]) -> Vec<Complex64> {
    (0..table.len() as u32)
        .map(|id| Complex64::new(0.0, -(table.sign(id) as f64) * omega[id as usize]) * u[id as usize])
        .collect()
}

/// The diagonal quadratic `sum_j omega_j u_{(j,+)} u_{(j,-)}` as a polynomial.
pub fn diagonal_quadratic<C: Coeff>(table: &Arc<ModeTable>, omega: impl Fn(u32) -> C) -> SparsePolynomial<C> {
    let mut p = SparsePolynomial::zero(table.clone());
    for id in 0..table.len() as u32 {
        if table.sign(id) == 1 {
            let c = table.conj(id);
            let mono: Monomial = if id < c {
                smallvec::smallvec![id, c]
            } else {
                smallvec::smallvec![c, id]
            };
            p.add_term_unchecked(mono, omega(id));
        }
    }
    p
}
