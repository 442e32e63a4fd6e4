use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::classify::{Classifier, ResonanceClass};
use super::homological::{solve_homological, HomologicalStats};
use crate::error::{Error, Result};
use crate::lattice::BlockPartition;
use crate::polyalg::{high_count, norm_upper_bound, poisson_with, BracketOptions, Coeff, PolynomialJson, SparsePolynomial};
use crate::spectrum::FrequencyModel;
use crate::stability::ConstantsLedger;
use crate::weights::WeightSpec;

/// `H = H0 + P` with `H0 = sum omega_j |u_j|^2` given by the model.
#[derive(Clone, Debug)]
pub struct HamiltonianSpec<C: Coeff = Complex64> {
    pub model: FrequencyModel,
    pub perturbation: SparsePolynomial<C>,
}

/// Settings of one normal-form run.
#[derive(Clone, Debug)]
pub struct BirkhoffConfig {
    pub n_cut: u32,
    /// Final degree `d >= 3`.
    pub d: usize,
    pub r: f64,
    pub partition: BlockPartition,
    pub weight: WeightSpec,
    /// Proceed with a warning when the smallness condition fails.
    pub override_gate: bool,
    /// Reject divisors below the ledger floor.
    pub check_floor: bool,
    pub budget: usize,
}

/// Smallest `n` with `n (k - 2) + k > d`.
pub fn lie_order(k: usize, d: usize) -> usize {
    let mut n = 1;
    while n * (k - 2) + k <= d {
        n += 1;
    }
    n
}

/// Polynomial parts produced by one Lie transform, split by high-mode count.
#[derive(Clone, Debug)]
pub struct LieOutput<C: Coeff = Complex64> {
    /// Increments with fewer than three high modes and degree `<= d`.
    pub kept: SparsePolynomial<C>,
    /// Increments with at least three high modes and degree `<= d`.
    pub high: SparsePolynomial<C>,
}

fn scale_inv_factorial<C: Coeff>(p: &SparsePolynomial<C>, l: usize) -> SparsePolynomial<C> {
    let f: i64 = (1..=l as i64).product();
    p.scale(&C::from_ratio(1, f))
}

/// `sum_{l=1}^n ad_G^l X / l!` truncated at degree `d`, with `ad_G X = {X, G}`.
pub fn lie_series_increment<C: Coeff>(
    x: &SparsePolynomial<C>,
    g: &SparsePolynomial<C>,
    n: usize,
    d: usize,
    budget: usize,
) -> Result<SparsePolynomial<C>> {
    let opts = BracketOptions {
        max_degree: Some(d),
        budget,
    };
    let mut acc = SparsePolynomial::zero(x.table().clone());
    let mut term = x.clone();
    for l in 1..=n {
        term = poisson_with(&term, g, opts)?;
        if term.is_empty() {
            break;
        }
        acc.add_assign(&scale_inv_factorial(&term, l));
    }
    Ok(acc)
}

/// `H0 o Phi_G - H0 - {H0, G}` truncated at degree `d`, computed from
/// `W = {H0, G}` as `sum_{l=2}^n ad_G^{l-1} W / l!`.
pub fn lie_series_h0_increment<C: Coeff>(
    w: &SparsePolynomial<C>,
    g: &SparsePolynomial<C>,
    n: usize,
    d: usize,
    budget: usize,
) -> Result<SparsePolynomial<C>> {
    let opts = BracketOptions {
        max_degree: Some(d),
        budget,
    };
    let mut acc = SparsePolynomial::zero(w.table().clone());
    let mut term = w.clone();
    for l in 2..=n {
        term = poisson_with(&term, g, opts)?;
        if term.is_empty() {
            break;
        }
        acc.add_assign(&scale_inv_factorial(&term, l));
    }
    Ok(acc)
}

/// Transforms `parts` and the `H0` piece `w_h0 = {H0, G}` by the time-one flow
/// of `G`, returning only the increments, split at three high modes.
pub fn lie_transform_truncated<C: Coeff>(
    parts: &[&SparsePolynomial<C>],
    w_h0: Option<&SparsePolynomial<C>>,
    g: &SparsePolynomial<C>,
    k: usize,
    d: usize,
    n_cut: u32,
    budget: usize,
) -> Result<LieOutput<C>> {
    let table = g.table().clone();
    let mut inc = SparsePolynomial::zero(table.clone());
    if !g.is_empty() {
        let n = lie_order(k.max(3), d);
        for x in parts {
            inc.add_assign(&lie_series_increment(x, g, n, d, budget)?);
        }
        if let Some(w) = w_h0 {
            inc.add_assign(&lie_series_h0_increment(w, g, n, d, budget)?);
        }
    }
    let (high, kept) = inc.partition(|m| high_count(&table, m, n_cut) >= 3);
    Ok(LieOutput { kept, high })
}

/// Bookkeeping of one iteration step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub k: usize,
    /// Lie series order.
    pub n: usize,
    pub r_k: f64,
    pub p_terms: usize,
    pub p_sup: f64,
    /// Slicewise coefficient bound of `P_k` at radius `r_k`.
    pub p_norm_bound: Option<f64>,
    pub g_terms: usize,
    pub g_sup: f64,
    pub z_terms: usize,
    /// Chain bound `ln |P_k|`.
    pub ln_p_chain: f64,
    /// Chain bound `ln |G_{k+1}|`.
    pub ln_g_chain: f64,
    /// `ln E`.
    pub ln_e: f64,
    pub high_terms: usize,
    pub homological: HomologicalStats,
}

/// Result of [`birkhoff_iterate`].
#[derive(Clone, Debug)]
pub struct NormalFormOutput<C: Coeff = Complex64> {
    pub n_cut: u32,
    pub d: usize,
    pub r: f64,
    /// Low-mode resonant part.
    pub z0: SparsePolynomial<C>,
    /// Part with two high modes in one block.
    pub z_gt: SparsePolynomial<C>,
    /// `G_4, ..., G_{d+1}`; generator `G_{k+1}` is built at step `k`.
    pub generators: Vec<SparsePolynomial<C>>,
    /// Non-normal terms of degree `<= d` with fewer than three high modes left
    /// after the last step (empty up to roundoff).
    pub residual: SparsePolynomial<C>,
    /// Terms of degree `<= d` with three or more high modes.
    pub r_high: SparsePolynomial<C>,
    pub trace: Vec<StepTrace>,
    pub ln_rkd_bound: f64,
    pub ln_r_high_bound: f64,
    /// `|R_{d,d}| + |R_{d,>}|` from the two bounds.
    pub r_d_bound: f64,
    pub ln_gate: f64,
    pub ledger: ConstantsLedger,
    pub warnings: Vec<String>,
}

impl<C: Coeff> NormalFormOutput<C> {
    /// `Z = Z0 + Z_>`.
    pub fn z(&self) -> SparsePolynomial<C> {
        self.z0.add(&self.z_gt)
    }

    pub fn to_report(&self) -> NormalFormReport {
        NormalFormReport {
            n_cut: self.n_cut,
            d: self.d,
            r: self.r,
            z0: self.z0.to_json(),
            z_gt: self.z_gt.to_json(),
            generators: self.generators.iter().map(|g| g.to_json()).collect(),
            residual: self.residual.to_json(),
            r_high: self.r_high.to_json(),
            residual_sup: self.residual.sup_coeff(),
            trace: self.trace.clone(),
            ln_rkd_bound: self.ln_rkd_bound,
            ln_r_high_bound: self.ln_r_high_bound,
            r_d_bound: self.r_d_bound,
            ln_gate: self.ln_gate,
            ledger: self.ledger.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

/// Serializable form of [`NormalFormOutput`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub n_cut: u32,
    pub d: usize,
    pub r: f64,
    pub z0: PolynomialJson,
    pub z_gt: PolynomialJson,
    pub generators: Vec<PolynomialJson>,
    pub residual: PolynomialJson,
    pub r_high: PolynomialJson,
    pub residual_sup: f64,
    pub trace: Vec<StepTrace>,
    pub ln_rkd_bound: f64,
    pub ln_r_high_bound: f64,
    pub r_d_bound: f64,
    pub ln_gate: f64,
    pub ledger: ConstantsLedger,
    pub warnings: Vec<String>,
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Runs the normal-form iteration `k = 3, ..., d`.
///
/// Each step solves the homological equation for all of `P_k`, transforms
/// `Z_k`, `P_k`, `H0` and the three-high-mode part by the flow of the new
/// generator, and re-splits the increments: terms with three or more high
/// modes join `R_>`, the rest form `P_{k+1}`. Terms above degree `d` are
/// dropped and accounted for by the `R_{k,d}` bound.
pub fn birkhoff_iterate<C: Coeff>(
    h: &HamiltonianSpec<C>,
    cfg: &BirkhoffConfig,
    ledger: &ConstantsLedger,
) -> Result<NormalFormOutput<C>> {
    let d = cfg.d;
    if d < 3 {
        return Err(Error::Domain(format!("final degree must be >= 3, got {d}")));
    }
    if !(cfg.r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {}", cfg.r)));
    }
    let table = h.perturbation.table().clone();
    let cls = Classifier::new(&h.model, table.clone(), cfg.n_cut, cfg.partition.clone())?;
    let mut warnings = Vec::new();

    let ln_gate = ledger.ln_gate(cfg.r, d, cfg.n_cut);
    if ln_gate >= 0.0 {
        if cfg.override_gate {
            warnings.push(format!(
                "smallness gate violated (ln gate = {ln_gate:.3}); bounds below are formal"
            ));
        } else {
            return Err(Error::Gate { ln_gate });
        }
    }
    if let Some((lo, _)) = h.perturbation.degree_range() {
        if lo < 3 {
            return Err(Error::Precondition(format!(
                "perturbation must start at degree 3, found degree {lo}"
            )));
        }
    }

    let (within, _above) = h.perturbation.project_high_degree(d);
    let (mut p, mut r_high) = within.project_high_modes(cfg.n_cut, 3)?;
    let mut z: SparsePolynomial<C> = SparsePolynomial::zero(table.clone());
    let mut generators = Vec::new();
    let mut trace = Vec::new();
    let ledger_floor = if cfg.check_floor { Some(ledger) } else { None };

    for k in 3..=d {
        let sol = solve_homological(&p, &cls, ledger_floor)?;
        let n = lie_order(k, d);
        let r_k = ConstantsLedger::r_k(cfg.r, k, d);
        let ln_e = ConstantsLedger::e_const(d).ln();
        let ln_g_chain = ledger.ln_g_bound(cfg.r, k, d, cfg.n_cut);
        if ln_g_chain > ln_e && ln_gate < 0.0 {
            warnings.push(format!("step {k}: generator chain bound exceeds E"));
        }
        trace.push(StepTrace {
            k,
            n,
            r_k,
            p_terms: p.len(),
            p_sup: p.sup_coeff(),
            p_norm_bound: norm_upper_bound(&p, r_k, &cfg.weight).ok(),
            g_terms: sol.g.len(),
            g_sup: sol.g.sup_coeff(),
            z_terms: sol.z.len(),
            ln_p_chain: ledger.ln_p_bound(cfg.r, k, d, cfg.n_cut),
            ln_g_chain,
            ln_e,
            high_terms: r_high.len(),
            homological: sol.stats.clone(),
        });
        // {H0, G} = Z* - P_k
        let w = sol.z.sub(&p);
        let out = lie_transform_truncated(&[&z, &p, &r_high], Some(&w), &sol.g, k, d, cfg.n_cut, cfg.budget)?;
        z.add_assign(&sol.z);
        r_high.add_assign(&out.high);
        p = out.kept;
        generators.push(sol.g);
    }

    let (z_gt, z0) = z.partition(|m| cls.classify_ids(m) == ResonanceClass::R2);
    let f_n = cfg.weight.f(cfg.n_cut as f64);
    let ln_rkd_bound = ledger.ln_rkd_bound(cfg.r, d, cfg.n_cut);
    let ln_r_high_bound = ledger.ln_r_high_bound(cfg.r, f_n);
    Ok(NormalFormOutput {
        n_cut: cfg.n_cut,
        d,
        r: cfg.r,
        z0,
        z_gt,
        generators,
        residual: p,
        r_high,
        trace,
        ln_rkd_bound,
        ln_r_high_bound,
        r_d_bound: log_add(ln_rkd_bound, ln_r_high_bound).exp(),
        ln_gate,
        ledger: ledger.clone(),
        warnings,
    })
}
