//! The index lattice `Z^dim x {+1,-1}`, multi-indices and their momentum,
//! radial block partitions, and the truncated mode table every other module
//! indexes into.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Integer lattice vector.
pub type IVec = SmallVec<[i32; 3]>;

/// Squared Euclidean norm of a lattice vector.
pub fn norm_sq(j: &[i32]) -> i64 {
    j.iter().map(|&x| (x as i64) * (x as i64)).sum()
}

/// Sign component of a mode index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn from_i32(s: i32) -> Result<Sign> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::Domain(format!("sign must be +1 or -1, got {s}"))),
        }
    }
}

/// A point `(j, sigma)` of the index lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub j: IVec,
    pub sigma: Sign,
}

impl ModeIndex {
    pub fn new(j: &[i32], sigma: Sign) -> Self {
        ModeIndex {
            j: IVec::from_slice(j),
            sigma,
        }
    }

    pub fn plus(j: &[i32]) -> Self {
        Self::new(j, Sign::Plus)
    }

    pub fn minus(j: &[i32]) -> Self {
        Self::new(j, Sign::Minus)
    }

    pub fn dim(&self) -> usize {
        self.j.len()
    }

    pub fn norm_sq(&self) -> i64 {
        norm_sq(&self.j)
    }

    /// `|J|`, the Euclidean norm of `j`.
    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// `<j> = max(|j|, c)`.
    pub fn bracket(&self, c: f64) -> f64 {
        self.norm().max(c)
    }

    pub fn conjugate(&self) -> Self {
        ModeIndex {
            j: self.j.clone(),
            sigma: self.sigma.flip(),
        }
    }

    pub fn is_high(&self, n_cut: u32) -> bool {
        self.norm_sq() > (n_cut as i64) * (n_cut as i64)
    }
}

impl Ord for ModeIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.norm_sq()
            .cmp(&other.norm_sq())
            .then_with(|| self.j.cmp(&other.j))
            .then_with(|| self.sigma.cmp(&other.sigma))
    }
}

impl PartialOrd for ModeIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.sigma == Sign::Plus { '+' } else { '-' };
        if self.j.len() == 1 {
            write!(f, "({},{})", self.j[0], s)
        } else {
            write!(f, "({:?},{})", self.j.as_slice(), s)
        }
    }
}

/// Unordered product of mode indices, stored in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: SmallVec<[ModeIndex; 6]>,
}

impl MultiIndex {
    pub fn new(mut entries: Vec<ModeIndex>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("multi-index must have at least one entry".into()));
        }
        let dim = entries[0].dim();
        if entries.iter().any(|e| e.dim() != dim) {
            return Err(Error::Domain("mixed lattice dimensions in multi-index".into()));
        }
        entries.sort();
        Ok(MultiIndex {
            entries: entries.into_iter().collect(),
        })
    }

    /// Builds a one-dimensional multi-index from `(j, sigma)` pairs.
    pub fn from_pairs_1d(pairs: &[(i32, i32)]) -> Result<Self> {
        let entries = pairs
            .iter()
            .map(|&(j, s)| Ok(ModeIndex::new(&[j], Sign::from_i32(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[ModeIndex] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    /// `sum_l sigma_l j_l`.
    pub fn momentum(&self) -> IVec {
        let mut m: IVec = smallvec::smallvec![0; self.dim()];
        for e in &self.entries {
            for (mk, jk) in m.iter_mut().zip(e.j.iter()) {
                *mk += e.sigma.value() * jk;
            }
        }
        m
    }

    pub fn conserves_momentum(&self) -> bool {
        self.momentum().iter().all(|&x| x == 0)
    }

    pub fn high_count(&self, n_cut: u32) -> usize {
        self.entries.iter().filter(|e| e.is_high(n_cut)).count()
    }

    /// True when, for every `j`, the `+1` and `-1` multiplicities agree.
    pub fn is_paired(&self) -> bool {
        if self.degree() % 2 == 1 {
            return false;
        }
        let mut balance: BTreeMap<&[i32], i32> = BTreeMap::new();
        for e in &self.entries {
            *balance.entry(e.j.as_slice()).or_insert(0) += e.sigma.value();
        }
        balance.values().all(|&b| b == 0)
    }

    /// Splits the entries into low (`|J| <= N`) and high parts.
    pub fn split_modes(&self, n_cut: u32) -> (Vec<ModeIndex>, Vec<ModeIndex>, usize) {
        let (high, low): (Vec<_>, Vec<_>) =
            self.entries.iter().cloned().partition(|e| e.is_high(n_cut));
        let s = high.len();
        (low, high, s)
    }

    pub fn conjugate(&self) -> Self {
        let entries: Vec<ModeIndex> = self.entries.iter().map(ModeIndex::conjugate).collect();
        MultiIndex::new(entries).expect("conjugate of a valid multi-index")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Partition of the lattice into a central ball and radial shells.
///
/// Block `0` holds `|J| <= c0_block`; block `a >= 1` is the shell
/// `c0_block + (a-1) t < |J| <= c0_block + a t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub c0_block: f64,
    pub thickness: f64,
}

impl Default for BlockPartition {
    fn default() -> Self {
        BlockPartition {
            c0_block: 0.0,
            thickness: 1.0,
        }
    }
}

impl BlockPartition {
    pub fn new(c0_block: f64, thickness: f64) -> Result<Self> {
        if !(c0_block >= 0.0) || !(thickness > 0.0) {
            return Err(Error::Domain(format!(
                "block partition needs c0_block >= 0 and thickness > 0, got ({c0_block}, {thickness})"
            )));
        }
        Ok(BlockPartition {
            c0_block,
            thickness,
        })
    }

    pub fn block_of_radius(&self, r: f64) -> u32 {
        if r <= self.c0_block {
            0
        } else {
            ((r - self.c0_block) / self.thickness).ceil().max(1.0) as u32
        }
    }

    pub fn block_of(&self, m: &ModeIndex) -> u32 {
        self.block_of_radius(m.norm())
    }

    /// Radius interval `(lo, hi]` covered by a block.
    pub fn radii(&self, block: u32) -> (f64, f64) {
        if block == 0 {
            (0.0, self.c0_block)
        } else {
            let lo = self.c0_block + (block - 1) as f64 * self.thickness;
            (lo, lo + self.thickness)
        }
    }
}

/// All lattice vectors with `|j| <= radius`, in canonical order.
pub fn lattice_points(dim: usize, radius: u32) -> Vec<IVec> {
    let r = radius as i32;
    let r2 = (radius as i64) * (radius as i64);
    let mut out = Vec::new();
    let mut cur: IVec = smallvec::smallvec![-r; dim];
    if dim == 0 {
        return out;
    }
    loop {
        if norm_sq(&cur) <= r2 {
            out.push(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == dim {
                out.sort_by(|a, b| norm_sq(a).cmp(&norm_sq(b)).then_with(|| a.cmp(b)));
                return out;
            }
            if cur[k] < r {
                cur[k] += 1;
                break;
            }
            cur[k] = -r;
            k += 1;
        }
    }
}

/// The truncated variable set `{(j, sigma) : |j| <= k_max}` with integer ids.
///
/// Ids follow the canonical order of [`ModeIndex`], so sorting ids sorts modes.
#[derive(Debug)]
pub struct ModeTable {
    dim: usize,
    k_max: u32,
    c: f64,
    modes: Vec<ModeIndex>,
    index: HashMap<ModeIndex, u32>,
    conj: Vec<u32>,
    sign: Vec<i32>,
    nsq: Vec<i64>,
}

impl PartialEq for ModeTable {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.k_max == other.k_max && self.c == other.c
    }
}

impl ModeTable {
    pub fn new(dim: usize, k_max: u32, c: f64) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::Domain(format!("lattice dimension {dim} not supported")));
        }
        if !(c >= 1.0) {
            return Err(Error::Domain(format!("bracket constant c must be >= 1, got {c}")));
        }
        let mut modes = Vec::new();
        for j in lattice_points(dim, k_max) {
            modes.push(ModeIndex {
                j: j.clone(),
                sigma: Sign::Plus,
            });
            modes.push(ModeIndex {
                j,
                sigma: Sign::Minus,
            });
        }
        modes.sort();
        let index: HashMap<ModeIndex, u32> = modes
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let conj = modes.iter().map(|m| index[&m.conjugate()]).collect();
        let sign = modes.iter().map(|m| m.sigma.value()).collect();
        let nsq = modes.iter().map(|m| m.norm_sq()).collect();
        Ok(ModeTable {
            dim,
            k_max,
            c,
            modes,
            index,
            conj,
            sign,
            nsq,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn mode(&self, id: u32) -> &ModeIndex {
        &self.modes[id as usize]
    }

    pub fn id_of(&self, m: &ModeIndex) -> Option<u32> {
        self.index.get(m).copied()
    }

    pub fn conj(&self, id: u32) -> u32 {
        self.conj[id as usize]
    }

    pub fn sign(&self, id: u32) -> i32 {
        self.sign[id as usize]
    }

    pub fn j(&self, id: u32) -> &[i32] {
        &self.modes[id as usize].j
    }

    pub fn norm_sq(&self, id: u32) -> i64 {
        self.nsq[id as usize]
    }

    /// `<j>` of a variable.
    pub fn bracket(&self, id: u32) -> f64 {
        (self.nsq[id as usize] as f64).sqrt().max(self.c)
    }

    pub fn is_high(&self, id: u32, n_cut: u32) -> bool {
        self.nsq[id as usize] > (n_cut as i64) * (n_cut as i64)
    }

    /// Momentum of a monomial given as variable ids.
    pub fn momentum(&self, ids: &[u32]) -> IVec {
        let mut m: IVec = smallvec::smallvec![0; self.dim];
        for &id in ids {
            let s = self.sign(id);
            for (mk, jk) in m.iter_mut().zip(self.j(id)) {
                *mk += s * jk;
            }
        }
        m
    }

    pub fn multi_index(&self, ids: &[u32]) -> MultiIndex {
        MultiIndex::new(ids.iter().map(|&i| self.mode(i).clone()).collect())
            .expect("ids come from this table")
    }

    pub fn ids_of(&self, m: &MultiIndex) -> Result<SmallVec<[u32; 8]>> {
        let mut ids: SmallVec<[u32; 8]> = m
            .entries()
            .iter()
            .map(|e| {
                self.id_of(e).ok_or_else(|| {
                    Error::Domain(format!("mode {e} outside table (k_max = {})", self.k_max))
                })
            })
            .collect::<Result<_>>()?;
        ids.sort_unstable();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(p: &[(i32, i32)]) -> MultiIndex {
        MultiIndex::from_pairs_1d(p).unwrap()
    }

    #[test]
    fn momentum_examples() {
        assert_eq!(mi(&[(1, 1), (1, -1)]).momentum().as_slice(), &[0]);
        assert_eq!(mi(&[(1, 1), (1, 1), (2, -1)]).momentum().as_slice(), &[0]);
        assert_eq!(mi(&[(3, 1), (1, -1), (1, -1)]).momentum().as_slice(), &[1]);
    }

    #[test]
    fn pairing_examples() {
        assert!(mi(&[(2, 1), (2, -1)]).is_paired());
        assert!(mi(&[(1, 1), (1, 1), (1, -1), (1, -1)]).is_paired());
        assert!(!mi(&[(1, 1), (2, 1), (3, -1)]).is_paired());
        assert!(!mi(&[(2, 1), (-2, -1)]).is_paired());
    }

    #[test]
    fn split_examples() {
        let (low, high, s) = mi(&[(1, 1), (5, -1)]).split_modes(3);
        assert_eq!(s, 1);
        assert_eq!(low, vec![ModeIndex::plus(&[1])]);
        assert_eq!(high, vec![ModeIndex::minus(&[5])]);
        assert_eq!(mi(&[(1, 1), (2, -1), (3, 1)]).split_modes(3).2, 0);
        assert_eq!(mi(&[(4, 1), (4, -1), (1, 1), (1, -1)]).split_modes(3).2, 2);
    }

    #[test]
    fn canonical_order() {
        let a = mi(&[(2, -1), (1, 1), (-1, 1)]);
        let e: Vec<_> = a.entries().iter().map(|m| (m.j[0], m.sigma.value())).collect();
        assert_eq!(e, vec![(-1, 1), (1, 1), (2, -1)]);
        assert_eq!(a, mi(&[(1, 1), (-1, 1), (2, -1)]));
    }

    #[test]
    fn blocks() {
        let p = BlockPartition::new(2.0, 1.0).unwrap();
        assert_eq!(p.block_of(&ModeIndex::plus(&[1])), 0);
        assert_eq!(p.block_of(&ModeIndex::plus(&[2])), 0);
        let b5 = p.block_of(&ModeIndex::plus(&[5]));
        let (lo, hi) = p.radii(b5);
        assert!(lo < 5.0 && 5.0 <= hi);
        assert_eq!(b5, p.block_of(&ModeIndex::minus(&[-5])));
        assert_eq!(
            p.block_of(&ModeIndex::plus(&[3, 4])),
            p.block_of(&ModeIndex::plus(&[5, 0]))
        );
    }

    #[test]
    fn table_layout() {
        let t = ModeTable::new(1, 3, 2.0).unwrap();
        assert_eq!(t.len(), 14);
        for id in 0..t.len() as u32 {
            assert_eq!(t.conj(t.conj(id)), id);
            assert_eq!(t.sign(t.conj(id)), -t.sign(id));
            if id > 0 {
                assert!(t.mode(id - 1) < t.mode(id));
            }
        }
        assert_eq!(t.bracket(t.id_of(&ModeIndex::plus(&[1])).unwrap()), 2.0);
        assert_eq!(t.bracket(t.id_of(&ModeIndex::plus(&[3])).unwrap()), 3.0);
        assert_eq!(lattice_points(2, 2).len(), 13);
    }
}
