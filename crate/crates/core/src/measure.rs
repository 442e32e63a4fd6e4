//! Frequency determinants, sublevel-set bounds, and Monte Carlo estimates of
//! the parameter sets on which small divisors fall below a threshold.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{lattice_points, norm_sq, ModeTable};
use crate::polyalg::momentum_monomials;
use crate::spectrum::{is_positive_definite, tau_star, FrequencyModel, ModelKind, PotentialEntry};

/// Parameter families whose resonant sets are measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiophantineFamily {
    /// `omega_j = (|j|^2 + m)^eta`, `m` uniform in `[m1, m2]`.
    FractionalMass {
        m1: f64,
        m2: f64,
        eta: f64,
        #[serde(default = "one")]
        dim: usize,
    },
    /// `Omega_j = sqrt(|j|_gbar^4 + xi)` with `gbar` uniform on the unit
    /// sphere of metrics and `xi = m / zeta^4` uniform in `[m/zeta2^4, m/zeta1^4]`.
    BeamMetric {
        zeta1: f64,
        zeta2: f64,
        big_gamma: f64,
        m: f64,
        dim: usize,
    },
    /// `omega_j = |j|^2 + V_j` with `V_j` uniform in `[-1/2, 1/2] <j>^{-n}`.
    ConvolutionSet { n: f64, mu1: f64, mu2: f64, dim: usize },
}

fn one() -> usize {
    1
}

impl DiophantineFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            DiophantineFamily::FractionalMass { m1, m2, eta, dim } => {
                if !(m1 < m2) || *m1 < 0.0 || !(*eta > 0.5) || *dim == 0 || *dim > 3 {
                    return Err(Error::Domain("fractional family needs 0 <= m1 < m2, eta > 1/2".into()));
                }
            }
            DiophantineFamily::BeamMetric {
                zeta1,
                zeta2,
                big_gamma,
                m,
                dim,
            } => {
                if !(*zeta1 > 0.0 && zeta1 < zeta2) || !(*big_gamma > 0.0) || !(*m > 0.0) || *dim == 0 || *dim > 3 {
                    return Err(Error::Domain(
                        "beam family needs 0 < zeta1 < zeta2, Gamma > 0, m > 0".into(),
                    ));
                }
            }
            DiophantineFamily::ConvolutionSet { mu1, mu2, dim, .. } => {
                if !(*mu1 > 1.0 && *mu2 > 1.0) || *dim == 0 || *dim > 3 {
                    return Err(Error::Domain("convolution family needs mu1, mu2 > 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DiophantineFamily::FractionalMass { .. } => "fractional_mass",
            DiophantineFamily::BeamMetric { .. } => "beam_metric",
            DiophantineFamily::ConvolutionSet { .. } => "convolution_set",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DiophantineFamily::FractionalMass { dim, .. }
            | DiophantineFamily::BeamMetric { dim, .. }
            | DiophantineFamily::ConvolutionSet { dim, .. } => *dim,
        }
    }

    /// Default threshold exponent `e` in `gamma / N^e` at degree `d`.
    pub fn default_exponent(&self, d: usize) -> f64 {
        let d3 = (d as f64).powi(3);
        match self {
            DiophantineFamily::FractionalMass { .. } => 4.0 * d3,
            DiophantineFamily::BeamMetric { dim, .. } => 4.0 * (tau_star(*dim) as f64 + 1.0) * d3,
            DiophantineFamily::ConvolutionSet { n, mu1, mu2, .. } => (mu1 + mu2 + n) * d as f64,
        }
    }

    /// A model whose structural pairing matches the family.
    fn pairing_model(&self) -> FrequencyModel {
        let dim = self.dim();
        match self {
            DiophantineFamily::FractionalMass { eta, m1, .. } => {
                FrequencyModel::new(dim, ModelKind::Fractional { eta: *eta, m: *m1 }).expect("validated")
            }
            DiophantineFamily::BeamMetric { m, .. } => {
                let g = (0..dim)
                    .map(|i| (0..dim).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
                    .collect();
                FrequencyModel::new(dim, ModelKind::Beam { g, m: *m }).expect("validated")
            }
            DiophantineFamily::ConvolutionSet { n, .. } => FrequencyModel::new(
                dim,
                ModelKind::ConvNls {
                    potential: vec![PotentialEntry {
                        j: vec![0; dim],
                        v: 0.25,
                    }],
                    n: *n,
                },
            )
            .expect("validated"),
        }
    }

    /// Draws one parameter and returns the frequencies of `table`.
    fn sample_omega(&self, table: &ModeTable, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            DiophantineFamily::FractionalMass { m1, m2, eta, .. } => {
                let m = rng.gen_range(*m1..*m2);
                (0..table.len() as u32)
                    .map(|id| (table.norm_sq(id) as f64 + m).powf(*eta))
                    .collect()
            }
            DiophantineFamily::BeamMetric {
                zeta1, zeta2, m, dim, ..
            } => {
                let g = sample_unit_metric(*dim, rng);
                let xi = rng.gen_range(m / zeta2.powi(4)..m / zeta1.powi(4));
                (0..table.len() as u32)
                    .map(|id| {
                        let q = crate::spectrum::metric_norm_sq(&g, table.j(id));
                        (q * q + xi).sqrt()
                    })
                    .collect()
            }
            DiophantineFamily::ConvolutionSet { n, dim, .. } => {
                let pts = lattice_points(*dim, table.k_max());
                let v: std::collections::HashMap<Vec<i32>, f64> = pts
                    .iter()
                    .map(|j| {
                        let br = (norm_sq(j) as f64).sqrt().max(1.0);
                        (j.to_vec(), rng.gen_range(-0.5..0.5) * br.powf(-n))
                    })
                    .collect();
                (0..table.len() as u32)
                    .map(|id| table.norm_sq(id) as f64 + v[table.j(id)])
                    .collect()
            }
        }
    }
}

/// Metric with unit Frobenius-type norm `sum_{i<=k} g_ik^2 = 1`, drawn
/// uniformly on that sphere and conditioned on positive definiteness.
pub fn sample_unit_metric<R: Rng>(dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let coeffs: Vec<f64> = (0..tau_star(dim)).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        let g = metric_from_coeffs(dim, &coeffs.iter().map(|c| c / norm).collect::<Vec<_>>());
        if is_positive_definite(&g) {
            return g;
        }
    }
}

/// Symmetric matrix from upper-triangular coefficients `(g_ik)_{i<=k}` in row order.
pub fn metric_from_coeffs(dim: usize, coeffs: &[f64]) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; dim]; dim];
    let mut t = 0;
    for i in 0..dim {
        for k in i..dim {
            g[i][k] = coeffs[t];
            g[k][i] = coeffs[t];
            t += 1;
        }
    }
    g
}

pub fn metric_coeffs(g: &[Vec<f64>]) -> Vec<f64> {
    let dim = g.len();
    let mut c = Vec::with_capacity(tau_star(dim));
    for i in 0..dim {
        for k in i..dim {
            c.push(g[i][k]);
        }
    }
    c
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    det
}

/// Both evaluations of the derivative determinant of a power family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantReport {
    pub direct: f64,
    pub factored: f64,
    pub rel_diff: f64,
}

/// `det [d^l/dt^l (a_i + t)^eta]_{l, i}` for `l = 0..k-1`.
///
/// The factored path is `prod_i omega_i * prod_{n=0}^{k-2} (eta - n)^{k-1-n}
/// * prod_{r<s} (x_s - x_r)` with `x_i = 1/(a_i + t)`.
pub fn power_family_determinant(a: &[f64], eta: f64, t: f64) -> Result<DeterminantReport> {
    let k = a.len();
    if k == 0 {
        return Err(Error::Domain("determinant needs at least one index".into()));
    }
    for i in 0..k {
        if !(a[i] + t > 0.0) {
            return Err(Error::Domain("base a_i + t must be positive".into()));
        }
        for s in (i + 1)..k {
            if a[i] == a[s] {
                return Err(Error::Domain(format!("coincident radii at positions {i} and {s}")));
            }
        }
    }
    let falling = |l: usize| (0..l).map(|n| eta - n as f64).product::<f64>();
    let matrix = (0..k)
        .map(|l| a.iter().map(|ai| (ai + t).powf(eta - l as f64) * falling(l)).collect())
        .collect();
    let direct = determinant(matrix);
    let omega: f64 = a.iter().map(|ai| (ai + t).powf(eta)).product();
    let coeff: f64 = (0..k.saturating_sub(1))
        .map(|n| (eta - n as f64).powi((k - 1 - n) as i32))
        .product();
    let x: Vec<f64> = a.iter().map(|ai| 1.0 / (ai + t)).collect();
    let mut vander = 1.0;
    for r in 0..k {
        for s in (r + 1)..k {
            vander *= x[s] - x[r];
        }
    }
    let factored = omega * coeff * vander;
    let scale = direct.abs().max(factored.abs());
    let rel_diff = if scale == 0.0 { 0.0 } else { (direct - factored).abs() / scale };
    Ok(DeterminantReport {
        direct,
        factored,
        rel_diff,
    })
}

/// Determinant for the fractional family at mass `m`, indexed by lattice sites.
pub fn frequency_determinant(eta: f64, js: &[Vec<i32>], m: f64) -> Result<DeterminantReport> {
    let a: Vec<f64> = js.iter().map(|j| norm_sq(j) as f64).collect();
    power_family_determinant(&a, eta, m)
}

/// Instance constant `C` with `|D| N^{2k^2} >= C` whenever `|j_i| < N` and
/// `m <= N^2`: `|prod_n (eta - n)^{k-1-n}| prod_i omega_i 2^{-k(k-1)}`.
pub fn instance_constant(eta: f64, js: &[Vec<i32>], m: f64) -> f64 {
    let k = js.len();
    let coeff: f64 = (0..k.saturating_sub(1))
        .map(|n| (eta - n as f64).powi((k - 1 - n) as i32))
        .product();
    let omega: f64 = js.iter().map(|j| (norm_sq(j) as f64 + m).powf(eta)).product();
    coeff.abs() * omega * 2f64.powi(-((k * (k.saturating_sub(1))) as i32))
}

/// Outcome of the directional derivative lemma.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalReport {
    pub index: usize,
    pub value: f64,
    /// `||w||_1 |det| / k^{3/2}`.
    pub bound: f64,
    pub det: f64,
    pub holds: bool,
    /// Vectors are dependent, so the bound is zero.
    pub degenerate: bool,
}

pub fn directional_derivative_bound(u: &[Vec<f64>], w: &[f64]) -> Result<DirectionalReport> {
    let k = u.len();
    if k == 0 || u.iter().any(|v| v.len() != k) || w.len() != k {
        return Err(Error::Domain("need k vectors of length k and w of length k".into()));
    }
    if u.iter().any(|v| v.iter().map(|x| x.abs()).sum::<f64>() > 1.0 + 1e-12) {
        return Err(Error::Domain("vectors must have l1 norm <= 1".into()));
    }
    let det = determinant(u.to_vec());
    let (index, value) = u
        .iter()
        .map(|v| v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>().abs())
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, x)| if x > acc.1 { (i, x) } else { acc });
    let w1: f64 = w.iter().map(|x| x.abs()).sum();
    let bound = w1 * det.abs() / (k as f64).powf(1.5);
    let degenerate = det.abs() < 1e-14;
    Ok(DirectionalReport {
        index,
        value,
        bound,
        det,
        holds: value >= bound * (1.0 - 1e-12),
        degenerate,
    })
}

/// `2 (2 + 3 + ... + m + 1/d) h^{1/m}`; the sum is empty for `m = 1`.
pub fn sublevel_measure_bound(m_order: u32, d_lower: f64, h: f64) -> Result<f64> {
    if m_order < 1 || !(d_lower > 0.0) || !(h > 0.0) {
        return Err(Error::Domain("need m >= 1, d > 0, h > 0".into()));
    }
    let s: f64 = (2..=m_order).map(|i| i as f64).sum();
    Ok(2.0 * (s + 1.0 / d_lower) * h.powf(1.0 / m_order as f64))
}

/// Wilson score interval at `z = 1.96`.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let nf = n as f64;
    let p = hits as f64 / nf;
    let den = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / den;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Options of [`resonant_fraction`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionOptions {
    /// Exponent `e` of the threshold `gamma / N^e`; family default when absent.
    pub exponent: Option<f64>,
    pub budget: usize,
}

impl Default for FractionOptions {
    fn default() -> Self {
        FractionOptions {
            exponent: None,
            budget: 20_000_000,
        }
    }
}

/// One row of a measure sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionRow {
    pub family: String,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n_cut: u32,
    pub d: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
    pub seed: u64,
    pub exponent: f64,
    pub hits: usize,
}

/// Fraction of sampled parameters for which some degree-`d` divisor with all
/// `|j_l| < N` is nonzero by structure but at most `gamma / N^e` in size.
///
/// Sample `i` draws from stream `i` of a generator seeded with `seed`, so the
/// result does not depend on the number of workers.
pub fn resonant_fraction(
    family: &DiophantineFamily,
    gamma: f64,
    n_cut: u32,
    d: usize,
    samples: usize,
    seed: u64,
    opts: &FractionOptions,
) -> Result<FractionRow> {
    family.validate()?;
    if n_cut < 1 || d < 1 || samples == 0 {
        return Err(Error::Domain("need N >= 1, d >= 1, samples >= 1".into()));
    }
    let exponent = opts.exponent.unwrap_or_else(|| family.default_exponent(d));
    let threshold = gamma.max(0.0) * (-(exponent * (n_cut as f64).ln())).exp();
    let table = Arc::new(ModeTable::new(family.dim(), n_cut - 1, 2.0)?);
    let pairing = family.pairing_model();
    let monos: Vec<_> = momentum_monomials(&table, d, |_| true, opts.budget)?
        .into_iter()
        .filter(|m| !pairing.is_frequency_paired(&table, m))
        .collect();
    let hits: usize = (0..samples)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let omega = family.sample_omega(&table, &mut rng);
            let hit = monos.iter().any(|m| {
                let v: f64 = m
                    .iter()
                    .map(|&id| table.sign(id) as f64 * omega[id as usize])
                    .sum();
                v.abs() <= threshold
            });
            hit as usize
        })
        .sum();
    let (ci_low, ci_high) = wilson_interval(hits, samples);
    Ok(FractionRow {
        family: family.name().to_string(),
        gamma,
        n_cut,
        d,
        fraction: hits as f64 / samples as f64,
        ci_low,
        ci_high,
        samples,
        seed,
        exponent,
        hits,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let var: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    cov / var
}

/// Whether `|sum_{i<=k} g_ik l_ik| >= Gamma / |l|_1^{tau*}` for every nonzero
/// integer `l` with `|l|_1 <= l1_max`.
pub fn in_metric_set(g: &[Vec<f64>], big_gamma: f64, l1_max: u32) -> bool {
    let c = metric_coeffs(g);
    let ts = c.len();
    let mut l = vec![0i64; ts];
    fn rec(pos: usize, left: i64, l: &mut Vec<i64>, c: &[f64], big_gamma: f64, ts: usize) -> bool {
        if pos == ts {
            let l1: i64 = l.iter().map(|x| x.abs()).sum();
            if l1 == 0 {
                return true;
            }
            let v: f64 = l.iter().zip(c).map(|(a, b)| *a as f64 * b).sum();
            return v.abs() >= big_gamma / (l1 as f64).powi(ts as i32);
        }
        for x in -left..=left {
            l[pos] = x;
            if !rec(pos + 1, left - x.abs(), l, c, big_gamma, ts) {
                return false;
            }
        }
        l[pos] = 0;
        true
    }
    rec(0, l1_max as i64, &mut l, &c, big_gamma, ts)
}

/// Smallest `| |R|_g^2 - |S|_g^2 |` over `|R|, |S| < N` with distinct
/// coefficient vectors, and the guaranteed `Gamma / (2N)^{2 tau*}`.
pub fn metric_separation(g: &[Vec<f64>], big_gamma: f64, n_cut: u32) -> (f64, f64) {
    let dim = g.len();
    let pts = lattice_points(dim, n_cut - 1);
    let coeff_vec = |j: &[i32]| -> Vec<i64> {
        let mut v = Vec::new();
        for i in 0..dim {
            for k in i..dim {
                let f = if i == k { 1 } else { 2 };
                v.push(f * j[i] as i64 * j[k] as i64);
            }
        }
        v
    };
    let vals: Vec<(Vec<i64>, f64)> = pts
        .iter()
        .map(|j| (coeff_vec(j), crate::spectrum::metric_norm_sq(g, j)))
        .collect();
    let mut best = f64::INFINITY;
    for a in 0..vals.len() {
        for b in (a + 1)..vals.len() {
            if vals[a].0 != vals[b].0 {
                best = best.min((vals[a].1 - vals[b].1).abs());
            }
        }
    }
    let floor = big_gamma / (2.0 * n_cut as f64).powi(2 * tau_star(dim) as i32);
    (best, floor)
}

/// Fraction of unit-sphere metrics failing membership in the metric set.
pub fn metric_failure_fraction(dim: usize, big_gamma: f64, l1_max: u32, samples: usize, seed: u64) -> f64 {
    let fails: usize = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let g = sample_unit_metric(dim, &mut rng);
            (!in_metric_set(&g, big_gamma, l1_max)) as usize
        })
        .sum();
    fails as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_is_frequency() {
        let r = frequency_determinant(0.75, &[vec![2]], 1.0).unwrap();
        assert!((r.direct - 5f64.powf(0.75)).abs() < 1e-12);
        assert!(r.rel_diff < 1e-14);
    }

    #[test]
    fn two_paths_agree() {
        let r = frequency_determinant(0.75, &[vec![1], vec![2]], 1.0).unwrap();
        assert!(r.rel_diff < 1e-10, "{r:?}");
        assert!(frequency_determinant(0.75, &[vec![1], vec![-1]], 1.0).is_err());
    }

    #[test]
    fn sublevel_examples() {
        assert!((sublevel_measure_bound(1, 1.0, 0.01).unwrap() - 0.02).abs() < 1e-15);
        let a = sublevel_measure_bound(3, 0.5, 1e-3).unwrap();
        let b = sublevel_measure_bound(3, 0.5, 1e-2).unwrap();
        assert!(a < b);
    }

    #[test]
    fn directional_examples() {
        let r = directional_derivative_bound(&[vec![1.0]], &[5.0]).unwrap();
        assert_eq!(r.value, 5.0);
        assert!(r.holds);
        let r = directional_derivative_bound(&[vec![0.5, 0.5], vec![0.5, 0.5]], &[1.0, 2.0]).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn zero_gamma_gives_zero_fraction() {
        let fam = DiophantineFamily::FractionalMass {
            m1: 1.0,
            m2: 2.0,
            eta: 0.75,
            dim: 1,
        };
        let r = resonant_fraction(&fam, 0.0, 4, 3, 200, 1, &FractionOptions::default()).unwrap();
        assert_eq!(r.hits, 0);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 1000);
        assert!(lo < 0.03 && 0.03 < hi);
    }
}
