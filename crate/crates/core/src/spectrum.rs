//! Frequency families `omega_j`, their growth and separation checks, and
//! exhaustive scans of the small divisors `sum_l sigma_l omega_{j_l}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_points, norm_sq, BlockPartition, IVec, ModeTable, MultiIndex};
use crate::polyalg::{momentum_monomials, Monomial};

/// One Fourier coefficient of the convolution potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialEntry {
    pub j: Vec<i32>,
    pub v: f64,
}

/// The three frequency families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// `omega_j = |j|^2 + V_j`; coefficients not listed are zero.
    ConvNls {
        #[serde(default)]
        potential: Vec<PotentialEntry>,
        #[serde(default = "default_decay")]
        n: f64,
    },
    /// `omega_j = (|j|^2 + m)^eta`.
    Fractional { eta: f64, m: f64 },
    /// `omega_j = sqrt(|j|_g^4 + m)` with `|j|_g^2 = sum g_ik j_i j_k`.
    Beam { g: Vec<Vec<f64>>, m: f64 },
}

fn default_decay() -> f64 {
    2.0
}

/// Parameters of the growth, non-resonance and separation assumptions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonResonance {
    pub beta: f64,
    pub c0: f64,
    pub delta: f64,
    pub c2: f64,
    pub tau: f64,
    pub gamma: f64,
    pub p: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ModelSpec {
    dim: usize,
    #[serde(flatten)]
    kind: ModelKind,
    #[serde(default)]
    params: Option<NonResonance>,
}

/// A frequency family with its non-resonance parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct FrequencyModel {
    dim: usize,
    kind: ModelKind,
    params: NonResonance,
    vmap: HashMap<Vec<i32>, f64>,
}

impl PartialEq for FrequencyModel {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.kind == other.kind && self.params == other.params
    }
}

impl TryFrom<ModelSpec> for FrequencyModel {
    type Error = Error;
    fn try_from(s: ModelSpec) -> Result<Self> {
        let mut m = FrequencyModel::new(s.dim, s.kind)?;
        if let Some(p) = s.params {
            m = m.with_params(p)?;
        }
        Ok(m)
    }
}

impl From<FrequencyModel> for ModelSpec {
    fn from(m: FrequencyModel) -> Self {
        ModelSpec {
            dim: m.dim,
            kind: m.kind,
            params: Some(m.params),
        }
    }
}

/// Number of independent entries of a symmetric `dim x dim` form.
pub fn tau_star(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

impl FrequencyModel {
    /// Builds a model with the default parameters of its family.
    pub fn new(dim: usize, kind: ModelKind) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::Domain(format!("dimension {dim} not supported")));
        }
        let params = match &kind {
            ModelKind::ConvNls { potential, n } => {
                for e in potential {
                    if e.j.len() != dim {
                        return Err(Error::Domain("potential index has wrong dimension".into()));
                    }
                    let bound = 0.5 * (norm_sq(&e.j) as f64).sqrt().max(1.0).powf(-n);
                    if e.v.abs() > bound * (1.0 + 1e-12) {
                        return Err(Error::Domain(format!(
                            "potential coefficient V_{:?} = {} exceeds the decay bound {bound}",
                            e.j, e.v
                        )));
                    }
                }
                NonResonance {
                    beta: 2.0,
                    c0: 2.0,
                    delta: 1.0,
                    c2: 0.5,
                    tau: 1.0,
                    gamma: 0.5,
                    p: 1,
                }
            }
            ModelKind::Fractional { eta, m } => {
                if !(*eta > 0.5) || !(*m >= 0.0) {
                    return Err(Error::Domain(format!(
                        "fractional model needs eta > 1/2 and m >= 0, got eta = {eta}, m = {m}"
                    )));
                }
                NonResonance {
                    beta: 2.0 * eta,
                    c0: 2.0,
                    delta: 2.0 * eta - 1.0,
                    c2: 0.25,
                    tau: 4.0,
                    gamma: 0.5,
                    p: 3,
                }
            }
            ModelKind::Beam { g, m } => {
                if g.len() != dim || g.iter().any(|row| row.len() != dim) {
                    return Err(Error::Domain("metric must be dim x dim".into()));
                }
                for i in 0..dim {
                    for k in 0..dim {
                        if g[i][k] != g[k][i] {
                            return Err(Error::Domain("metric must be symmetric".into()));
                        }
                    }
                }
                if !is_positive_definite(g) || !(*m > 0.0) {
                    return Err(Error::Domain("beam model needs a positive definite metric and m > 0".into()));
                }
                NonResonance {
                    beta: 2.0,
                    c0: 2.0,
                    delta: 1.0,
                    c2: 0.25,
                    tau: 4.0 * (tau_star(dim) as f64 + 1.0),
                    gamma: 0.5,
                    p: 3,
                }
            }
        };
        let vmap = match &kind {
            ModelKind::ConvNls { potential, .. } => potential.iter().map(|e| (e.j.clone(), e.v)).collect(),
            _ => HashMap::new(),
        };
        Ok(FrequencyModel {
            dim,
            kind,
            params,
            vmap,
        })
    }

    /// Cubic-type NLS with zero potential.
    pub fn conv_nls_free(dim: usize) -> Self {
        Self::new(
            dim,
            ModelKind::ConvNls {
                potential: Vec::new(),
                n: 2.0,
            },
        )
        .expect("valid model")
    }

    /// NLS with a random potential from the decay class, seeded by `rng`.
    pub fn conv_nls_random<R: Rng>(dim: usize, k_max: u32, n: f64, rng: &mut R) -> Self {
        let potential = lattice_points(dim, k_max)
            .into_iter()
            .map(|j| {
                let scale = (norm_sq(&j) as f64).sqrt().max(1.0).powf(-n);
                PotentialEntry {
                    v: rng.gen_range(-0.5..0.5) * scale,
                    j: j.to_vec(),
                }
            })
            .collect();
        Self::new(dim, ModelKind::ConvNls { potential, n }).expect("sampled potential is admissible")
    }

    pub fn with_params(mut self, params: NonResonance) -> Result<Self> {
        let p = &params;
        if !(p.beta > 0.0 && p.c0 > 0.0 && p.delta > 0.0 && p.c2 > 0.0 && p.tau > 0.0 && p.gamma >= 0.0) {
            return Err(Error::Domain("non-resonance parameters must be positive".into()));
        }
        self.params = params;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn params(&self) -> &NonResonance {
        &self.params
    }

    fn potential(&self, j: &[i32]) -> f64 {
        self.vmap.get(j).copied().unwrap_or(0.0)
    }

    pub fn omega(&self, j: &[i32]) -> f64 {
        let r2 = norm_sq(j) as f64;
        match &self.kind {
            ModelKind::ConvNls { .. } => r2 + self.potential(j),
            ModelKind::Fractional { eta, m } => (r2 + m).powf(*eta),
            ModelKind::Beam { g, m } => {
                let q = metric_norm_sq(g, j);
                (q * q + m).sqrt()
            }
        }
    }

    /// Exact rational frequency when the family admits one.
    ///
    /// Potentials and masses are binary floating-point numbers and hence exact
    /// rationals, so the NLS family is always exact; the fractional family is
    /// exact for integer `eta`.
    pub fn omega_exact(&self, j: &[i32]) -> Option<BigRational> {
        let r2 = BigRational::from_integer(norm_sq(j).into());
        match &self.kind {
            ModelKind::ConvNls { .. } => Some(r2 + BigRational::from_float(self.potential(j))?),
            ModelKind::Fractional { eta, m } if eta.fract() == 0.0 && *eta <= 16.0 => {
                let base = r2 + BigRational::from_float(*m)?;
                Some((0..*eta as u32).fold(BigRational::one(), |acc, _| acc * base.clone()))
            }
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        match &self.kind {
            ModelKind::ConvNls { .. } => true,
            ModelKind::Fractional { eta, .. } => eta.fract() == 0.0 && *eta <= 16.0,
            ModelKind::Beam { .. } => false,
        }
    }

    /// Key identifying frequencies that coincide for structural reasons.
    pub fn frequency_key(&self, j: &[i32]) -> IVec {
        match &self.kind {
            ModelKind::ConvNls { .. } if self.vmap.values().all(|&v| v == 0.0) => {
                smallvec::smallvec![norm_sq(j) as i32]
            }
            ModelKind::ConvNls { .. } => IVec::from_slice(j),
            ModelKind::Fractional { .. } => smallvec::smallvec![norm_sq(j) as i32],
            ModelKind::Beam { .. } => {
                let neg: IVec = j.iter().map(|&x| -x).collect();
                let pos = IVec::from_slice(j);
                pos.min(neg)
            }
        }
    }

    /// Frequencies of every variable of a table.
    pub fn omega_table(&self, table: &ModeTable) -> Vec<f64> {
        (0..table.len() as u32).map(|id| self.omega(table.j(id))).collect()
    }

    /// `sum_l sigma_l omega_{j_l}` of a monomial.
    pub fn divisor(&self, table: &ModeTable, mono: &[u32]) -> f64 {
        mono.iter()
            .map(|&id| table.sign(id) as f64 * self.omega(table.j(id)))
            .sum()
    }

    pub fn divisor_exact(&self, table: &ModeTable, mono: &[u32]) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for &id in mono {
            let w = self.omega_exact(table.j(id))?;
            if table.sign(id) == 1 {
                acc += w;
            } else {
                acc -= w;
            }
        }
        Some(acc)
    }

    /// Whether the `(frequency key, sign)` multiset cancels, which forces a zero divisor.
    pub fn is_frequency_paired(&self, table: &ModeTable, mono: &[u32]) -> bool {
        if mono.len() % 2 == 1 {
            return false;
        }
        let mut bal: BTreeMap<IVec, i32> = BTreeMap::new();
        for &id in mono {
            *bal.entry(self.frequency_key(table.j(id))).or_insert(0) += table.sign(id);
        }
        bal.values().all(|&b| b == 0)
    }

    /// Zero test for a divisor: structural pairing, or an exact zero when
    /// exact frequencies are available.
    pub fn is_zero_divisor(&self, table: &ModeTable, mono: &[u32]) -> bool {
        if self.is_frequency_paired(table, mono) {
            return true;
        }
        match self.divisor_exact(table, mono) {
            Some(d) => d.is_zero(),
            None => false,
        }
    }
}

/// `|j|_g^2`.
pub fn metric_norm_sq(g: &[Vec<f64>], j: &[i32]) -> f64 {
    let mut s = 0.0;
    for (a, row) in g.iter().enumerate() {
        for (b, gab) in row.iter().enumerate() {
            s += gab * j[a] as f64 * j[b] as f64;
        }
    }
    s
}

/// Cholesky test.
pub fn is_positive_definite(g: &[Vec<f64>]) -> bool {
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..=i {
            let s: f64 = (0..k).map(|t| l[i][t] * l[k][t]).sum();
            if i == k {
                let d = g[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][k] = (g[i][k] - s) / l[k][k];
            }
        }
    }
    true
}

/// Result of the growth check `1/C0 <= omega_j / |j|^beta <= C0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A1Report {
    pub passed: bool,
    pub checked: usize,
    /// Largest of `ratio` and `1/ratio` over the scan.
    pub worst: f64,
    pub witness: Option<Vec<i32>>,
}

pub fn check_a1(model: &FrequencyModel, j_min: u32, k_max: u32) -> A1Report {
    let beta = model.params.beta;
    let c0 = model.params.c0;
    let mut worst: f64 = 0.0;
    let mut witness = None;
    let mut checked = 0;
    let mut passed = true;
    let jmin2 = (j_min as i64).pow(2);
    for j in lattice_points(model.dim, k_max) {
        let r2 = norm_sq(&j);
        if r2 < jmin2 || r2 == 0 {
            continue;
        }
        checked += 1;
        let ratio = model.omega(&j) / (r2 as f64).powf(beta / 2.0);
        let dev = if ratio > 0.0 { ratio.max(1.0 / ratio) } else { f64::INFINITY };
        if dev > worst {
            worst = dev;
            if dev > c0 || witness.is_none() {
                witness = Some(j.to_vec());
            }
        }
        if dev > c0 {
            passed = false;
        }
    }
    A1Report {
        passed,
        checked,
        worst,
        witness: if passed { None } else { witness },
    }
}

/// Result of the cross-block separation check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A3Report {
    pub passed: bool,
    pub pairs: usize,
    /// `min |omega_j - omega_k| / (|j|^delta + |k|^delta)` over cross-block pairs.
    pub admissible_c2: f64,
    pub witness: Option<(Vec<i32>, Vec<i32>)>,
}

pub fn check_a3(model: &FrequencyModel, part: &BlockPartition, k_max: u32) -> A3Report {
    let pts = lattice_points(model.dim, k_max);
    let info: Vec<(f64, u32, f64)> = pts
        .iter()
        .map(|j| {
            let r = (norm_sq(j) as f64).sqrt();
            (model.omega(j), part.block_of_radius(r), r.powf(model.params.delta))
        })
        .collect();
    let mut best = f64::INFINITY;
    let mut witness = None;
    let mut pairs = 0;
    for a in 0..pts.len() {
        for b in (a + 1)..pts.len() {
            if info[a].1 == info[b].1 {
                continue;
            }
            pairs += 1;
            let denom = info[a].2 + info[b].2;
            if denom == 0.0 {
                continue;
            }
            let v = (info[a].0 - info[b].0).abs() / denom;
            if v < best {
                best = v;
                witness = Some((pts[a].to_vec(), pts[b].to_vec()));
            }
        }
    }
    let passed = best >= model.params.c2;
    A3Report {
        passed,
        pairs,
        admissible_c2: best,
        witness: if passed { None } else { witness },
    }
}

/// Which multi-indices a divisor scan covers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_cut: u32,
    pub d_min: usize,
    pub d_max: usize,
    /// Only `|j_l| <= n_cut`; otherwise modes up to `k_max` with at most two
    /// high entries, excluding same-block opposite-sign high pairs.
    pub low_only: bool,
    pub k_max: u32,
    pub partition: BlockPartition,
    pub budget: usize,
}

impl ScanConfig {
    pub fn low(n_cut: u32, d_max: usize) -> Self {
        ScanConfig {
            n_cut,
            d_min: 3,
            d_max,
            low_only: true,
            k_max: n_cut,
            partition: BlockPartition::default(),
            budget: 20_000_000,
        }
    }
}

/// Smallest nonzero divisor found by a scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivisorScan {
    pub min_value: f64,
    pub witness: Option<String>,
    pub witness_degree: usize,
    pub scanned: usize,
    pub exhaustive: bool,
    /// Divisors that vanish exactly without structural pairing.
    pub unpaired_zeros: usize,
    pub unpaired_zero_witness: Option<String>,
}

fn same_block_opposite_pair(table: &ModeTable, mono: &[u32], cfg: &ScanConfig) -> bool {
    let high: Vec<u32> = mono.iter().copied().filter(|&id| table.is_high(id, cfg.n_cut)).collect();
    high.len() == 2
        && table.sign(high[0]) * table.sign(high[1]) == -1
        && cfg.partition.block_of(table.mode(high[0])) == cfg.partition.block_of(table.mode(high[1]))
}

/// Minimum of `|sum sigma_l omega_{j_l}|` over momentum-conserving multi-indices
/// of degree `d_min..=d_max` that are not structurally paired.
pub fn min_denominator(model: &FrequencyModel, cfg: &ScanConfig) -> Result<DivisorScan> {
    let radius = if cfg.low_only { cfg.n_cut } else { cfg.k_max.max(cfg.n_cut) };
    let table = Arc::new(ModeTable::new(model.dim, radius, 2.0)?);
    let mut out = DivisorScan {
        min_value: f64::INFINITY,
        witness: None,
        witness_degree: 0,
        scanned: 0,
        exhaustive: true,
        unpaired_zeros: 0,
        unpaired_zero_witness: None,
    };
    let exact = model.is_exact();
    for d in cfg.d_min.max(1)..=cfg.d_max {
        let monos = momentum_monomials(&table, d, |_| true, cfg.budget)?;
        for m in monos {
            if !cfg.low_only {
                let s = m.iter().filter(|&&id| table.is_high(id, cfg.n_cut)).count();
                if s > 2 || same_block_opposite_pair(&table, &m, cfg) {
                    continue;
                }
            }
            if model.is_frequency_paired(&table, &m) {
                continue;
            }
            out.scanned += 1;
            let v = if exact {
                let e = model.divisor_exact(&table, &m).expect("exact model");
                if e.is_zero() {
                    out.unpaired_zeros += 1;
                    if out.unpaired_zero_witness.is_none() {
                        out.unpaired_zero_witness = Some(table.multi_index(&m).to_string());
                    }
                    continue;
                }
                e.abs().to_f64().unwrap_or(f64::INFINITY)
            } else {
                model.divisor(&table, &m).abs()
            };
            if v < out.min_value {
                out.min_value = v;
                out.witness = Some(table.multi_index(&m).to_string());
                out.witness_degree = d;
            }
        }
    }
    Ok(out)
}

/// Monomials scanned by [`min_denominator`] at one degree, for callers that
/// need the raw list.
pub fn scan_monomials(model: &FrequencyModel, cfg: &ScanConfig, d: usize) -> Result<(Arc<ModeTable>, Vec<Monomial>)> {
    let radius = if cfg.low_only { cfg.n_cut } else { cfg.k_max.max(cfg.n_cut) };
    let table = Arc::new(ModeTable::new(model.dim, radius, 2.0)?);
    let monos = momentum_monomials(&table, d, |_| true, cfg.budget)?
        .into_iter()
        .filter(|m| !model.is_frequency_paired(&table, m))
        .collect();
    Ok((table, monos))
}

/// `ln(gamma / (C_deno d N)^{C_exp d^p})`.
pub fn ln_divisor_floor(gamma: f64, c_deno: f64, c_exp: f64, p: u32, d: usize, n_cut: u32) -> f64 {
    let d = d as f64;
    gamma.ln() - c_exp * d.powi(p as i32) * (c_deno * d * n_cut as f64).ln()
}

/// Per-degree comparison of the smallest divisor with the guaranteed floor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2Row {
    pub d: usize,
    pub min_value: f64,
    pub ln_floor: f64,
    /// `ln(min) - ln(floor)`; nonnegative when the bound holds.
    pub ln_margin: f64,
    pub witness: Option<String>,
    pub unpaired_zeros: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A2Report {
    pub passed: bool,
    pub rows: Vec<A2Row>,
}

/// Checks `min divisor >= gamma / (C_deno d N)^{C_exp d^p}` degree by degree.
pub fn verify_a2_bound(model: &FrequencyModel, n_cut: u32, d_max: usize, c_deno: f64, c_exp: f64) -> Result<A2Report> {
    let mut rows = Vec::new();
    for d in 3..=d_max {
        let mut cfg = ScanConfig::low(n_cut, d);
        cfg.d_min = d;
        let scan = min_denominator(model, &cfg)?;
        let ln_floor = ln_divisor_floor(model.params.gamma, c_deno, c_exp, model.params.p, d, n_cut);
        let ln_margin = if scan.min_value.is_finite() {
            scan.min_value.ln() - ln_floor
        } else {
            f64::INFINITY
        };
        rows.push(A2Row {
            d,
            min_value: scan.min_value,
            ln_floor,
            ln_margin,
            witness: scan.witness,
            unpaired_zeros: scan.unpaired_zeros,
        });
    }
    Ok(A2Report {
        passed: rows.iter().all(|r| r.ln_margin >= 0.0),
        rows,
    })
}

/// `sum_m ln(1 + |l_m|^{mu1} <m>^{mu2 + n})` for a finitely supported `l`.
pub fn bourgain_ln_product(ell: &[(Vec<i32>, i64)], mu1: f64, mu2: f64, n: f64, c: f64) -> f64 {
    ell.iter()
        .filter(|(_, l)| *l != 0)
        .map(|(m, l)| {
            let br = (norm_sq(m) as f64).sqrt().max(c);
            (1.0 + (l.unsigned_abs() as f64).powf(mu1) * br.powf(mu2 + n)).ln()
        })
        .sum()
}

/// `ln N^{(mu1 + mu2 + n) |l|_1}`.
pub fn bourgain_ln_bound(ell: &[(Vec<i32>, i64)], mu1: f64, mu2: f64, n: f64, n_cut: f64) -> f64 {
    let l1: u64 = ell.iter().map(|(_, l)| l.unsigned_abs()).sum();
    (mu1 + mu2 + n) * l1 as f64 * n_cut.ln()
}

/// Whether `a` and `b` are the same multi-index up to conjugation.
pub fn conjugate_equal(a: &MultiIndex, b: &MultiIndex) -> bool {
    a.conjugate() == *b
}
