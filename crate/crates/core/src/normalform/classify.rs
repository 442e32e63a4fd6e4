use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{BlockPartition, ModeTable, MultiIndex};
use crate::spectrum::FrequencyModel;

/// Branches of the classification of multi-indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResonanceClass {
    /// All modes low, divisor vanishes.
    R0,
    /// All modes low, divisor nonzero.
    NR0,
    /// Exactly one high mode.
    NR1,
    /// Two high modes of equal sign.
    NR21,
    /// Two high modes of opposite sign in different blocks.
    NR22,
    /// Two high modes of opposite sign in the same block.
    R2,
    /// Three or more high modes.
    High,
}

impl ResonanceClass {
    pub fn is_resonant(self) -> bool {
        matches!(self, ResonanceClass::R0 | ResonanceClass::R2)
    }

    pub fn is_nonresonant(self) -> bool {
        matches!(
            self,
            ResonanceClass::NR0 | ResonanceClass::NR1 | ResonanceClass::NR21 | ResonanceClass::NR22
        )
    }
}

/// Classifies monomials of one table against a model, cutoff and block partition.
///
/// Frequencies are cached per variable; exact rationals are used whenever
/// the model provides them.
#[derive(Clone, Debug)]
pub struct Classifier {
    model: FrequencyModel,
    table: Arc<ModeTable>,
    n_cut: u32,
    partition: BlockPartition,
    omega: Vec<f64>,
    omega_exact: Option<Vec<BigRational>>,
}

impl Classifier {
    pub fn new(model: &FrequencyModel, table: Arc<ModeTable>, n_cut: u32, partition: BlockPartition) -> Result<Self> {
        if n_cut < 1 {
            return Err(Error::Domain("cutoff N must be >= 1".into()));
        }
        if table.dim() != model.dim() {
            return Err(Error::Domain(format!(
                "table dimension {} differs from model dimension {}",
                table.dim(),
                model.dim()
            )));
        }
        let omega = model.omega_table(&table);
        let omega_exact = if model.is_exact() {
            (0..table.len() as u32).map(|id| model.omega_exact(table.j(id))).collect()
        } else {
            None
        };
        Ok(Classifier {
            model: model.clone(),
            table,
            n_cut,
            partition,
            omega,
            omega_exact,
        })
    }

    pub fn table(&self) -> &Arc<ModeTable> {
        &self.table
    }

    pub fn model(&self) -> &FrequencyModel {
        &self.model
    }

    pub fn n_cut(&self) -> u32 {
        self.n_cut
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn is_exact(&self) -> bool {
        self.omega_exact.is_some()
    }

    pub fn divisor(&self, mono: &[u32]) -> f64 {
        mono.iter()
            .map(|&id| self.table.sign(id) as f64 * self.omega[id as usize])
            .sum()
    }

    pub fn divisor_exact(&self, mono: &[u32]) -> Option<BigRational> {
        let w = self.omega_exact.as_ref()?;
        let mut acc = BigRational::zero();
        for &id in mono {
            if self.table.sign(id) == 1 {
                acc += &w[id as usize];
            } else {
                acc -= &w[id as usize];
            }
        }
        Some(acc)
    }

    /// Zero divisor by structure, or exactly zero when exact frequencies exist.
    pub fn is_zero_divisor(&self, mono: &[u32]) -> bool {
        if self.model.is_frequency_paired(&self.table, mono) {
            return true;
        }
        match self.divisor_exact(mono) {
            Some(d) => d.is_zero(),
            None => false,
        }
    }

    /// Class of a sorted monomial of variable ids (momentum is not rechecked).
    pub fn classify_ids(&self, mono: &[u32]) -> ResonanceClass {
        let t = &self.table;
        let high: smallvec::SmallVec<[u32; 4]> =
            mono.iter().copied().filter(|&id| t.is_high(id, self.n_cut)).collect();
        match high.len() {
            0 => {
                if self.is_zero_divisor(mono) {
                    ResonanceClass::R0
                } else {
                    ResonanceClass::NR0
                }
            }
            1 => ResonanceClass::NR1,
            2 => {
                if t.sign(high[0]) == t.sign(high[1]) {
                    ResonanceClass::NR21
                } else if self.partition.block_of(t.mode(high[0])) == self.partition.block_of(t.mode(high[1])) {
                    ResonanceClass::R2
                } else {
                    ResonanceClass::NR22
                }
            }
            _ => ResonanceClass::High,
        }
    }

    pub fn classify(&self, m: &MultiIndex) -> Result<ResonanceClass> {
        if !m.conserves_momentum() {
            return Err(Error::Precondition(format!("multi-index {m} has nonzero momentum")));
        }
        let ids = self.table.ids_of(m)?;
        Ok(self.classify_ids(&ids))
    }
}

/// Convenience wrapper building a one-off classifier.
pub fn classify(m: &MultiIndex, model: &FrequencyModel, n_cut: u32, partition: &BlockPartition) -> Result<ResonanceClass> {
    let radius = m
        .entries()
        .iter()
        .map(|e| e.norm().ceil() as u32)
        .max()
        .unwrap_or(1)
        .max(n_cut);
    let table = Arc::new(ModeTable::new(model.dim(), radius, 2.0)?);
    Classifier::new(model, table, n_cut, partition.clone())?.classify(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(p: &[(i32, i32)]) -> MultiIndex {
        MultiIndex::from_pairs_1d(p).unwrap()
    }

    #[test]
    fn examples() {
        let m = FrequencyModel::conv_nls_free(1);
        let part = BlockPartition::default();
        assert_eq!(classify(&mi(&[(1, 1), (1, -1)]), &m, 5, &part).unwrap(), ResonanceClass::R0);
        assert_eq!(
            classify(&mi(&[(6, 1), (6, -1), (1, 1), (1, -1)]), &m, 5, &part).unwrap(),
            ResonanceClass::R2
        );
        assert_eq!(classify(&mi(&[(7, 1), (3, -1), (4, -1)]), &m, 5, &part).unwrap(), ResonanceClass::NR1);
        assert_eq!(classify(&mi(&[(3, 1), (1, -1), (2, -1)]), &m, 5, &part).unwrap(), ResonanceClass::NR0);
        assert!(classify(&mi(&[(3, 1), (1, -1)]), &m, 5, &part).is_err());
    }

    #[test]
    fn two_high_branches() {
        let m = FrequencyModel::conv_nls_free(1);
        let part = BlockPartition::default();
        assert_eq!(
            classify(&mi(&[(6, 1), (-7, 1), (1, 1)]), &m, 5, &part).unwrap(),
            ResonanceClass::NR21
        );
        assert_eq!(
            classify(&mi(&[(7, 1), (6, -1), (1, -1)]), &m, 5, &part).unwrap(),
            ResonanceClass::NR22
        );
        assert_eq!(
            classify(&mi(&[(6, 1), (-6, -1), (6, -1), (-6, 1)]), &m, 5, &part).unwrap(),
            ResonanceClass::High
        );
    }
}
