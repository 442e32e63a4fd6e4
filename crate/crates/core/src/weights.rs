//! Weight functions `f`, the subadditivity check, and the weighted norm
//! `||u||_s = sqrt(sum |u_J|^2 e^{2 s f(<j>)})` on truncated states.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ModeIndex, ModeTable};

/// Shape of the weight function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `f(x) = x^theta`, `0 < theta < 1`.
    Gevrey { theta: f64 },
    /// `f(x) = (ln(x + kappa))^q`, `q > 1`.
    LogUltra { q: f64, kappa: f64 },
    /// Piecewise linear through the given points, extended linearly past the last one.
    Tabulated { x: Vec<f64>, f: Vec<f64> },
}

impl WeightKind {
    pub fn log_ultra(q: f64) -> Self {
        WeightKind::LogUltra { q, kappa: q.exp() }
    }

    fn validate(&self) -> Result<()> {
        match self {
            WeightKind::Gevrey { theta } if !(*theta > 0.0 && *theta < 1.0) => Err(Error::Domain(
                format!("Gevrey exponent must lie in (0,1), got {theta}"),
            )),
            WeightKind::LogUltra { q, kappa } if !(*q > 1.0) || *kappa < q.exp() * (1.0 - 1e-12) => {
                Err(Error::Domain(format!(
                    "log-ultra weight needs q > 1 and kappa >= e^q, got q = {q}, kappa = {kappa}"
                )))
            }
            WeightKind::Tabulated { x, f } => {
                if x.len() < 2 || x.len() != f.len() {
                    return Err(Error::Domain("tabulated weight needs >= 2 matching points".into()));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) || f.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Domain("tabulated weight must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `f(x)` without the domain check.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightKind::Gevrey { theta } => x.powf(*theta),
            WeightKind::LogUltra { q, kappa } => (x + kappa).ln().powf(*q),
            WeightKind::Tabulated { x: xs, f } => {
                let n = xs.len();
                let k = match xs.iter().position(|&t| t >= x) {
                    Some(0) => 0,
                    Some(k) => k - 1,
                    None => n - 2,
                };
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                f[k] + t * (f[k + 1] - f[k])
            }
        }
    }

    /// `f(e^L)`, stable for very large `L`.
    pub fn eval_from_ln(&self, ln_x: f64) -> f64 {
        match self {
            WeightKind::Gevrey { theta } => (theta * ln_x).exp(),
            WeightKind::LogUltra { q, kappa } => {
                let inner = if ln_x > 0.0 {
                    ln_x + (kappa * (-ln_x).exp()).ln_1p()
                } else {
                    (ln_x.exp() + kappa).ln()
                };
                inner.powf(*q)
            }
            WeightKind::Tabulated { .. } => self.eval(ln_x.exp()),
        }
    }

    /// Smallest constant with `f(2x) - f(x) <= C f(x)` on `[c, 1e12]`.
    ///
    /// For a concave increasing `f` this controls every sum: adding the terms in
    /// decreasing order, each increment is at most `f(2 x_l) - f(x_l)`.
    pub fn doubling_constant(&self, c: f64) -> f64 {
        let n = 4000;
        let (lo, hi) = (c.ln(), 1e12f64.ln());
        (0..=n)
            .map(|i| {
                let x = (lo + (hi - lo) * i as f64 / n as f64).exp();
                let fx = self.eval(x);
                (self.eval(2.0 * x) - fx) / fx
            })
            .fold(0.0, f64::max)
    }
}

/// Weight function together with its scale and constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub kind: WeightKind,
    /// Scale `s`.
    pub s: f64,
    /// Reference scale `s0`.
    pub s0: f64,
    /// Subadditivity constant `Cf < 1`.
    pub cf: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, s: f64, cf: f64) -> Result<Self> {
        kind.validate()?;
        if !(s > 0.0) {
            return Err(Error::Domain(format!("scale s must be positive, got {s}")));
        }
        if !(cf > 0.0 && cf < 1.0) {
            return Err(Error::Domain(format!("Cf must lie in (0,1), got {cf}")));
        }
        Ok(WeightSpec {
            kind,
            s,
            s0: 0.0,
            cf,
        })
    }

    /// Gevrey weight with `Cf = 2^(theta - 1)`.
    pub fn gevrey(theta: f64, s: f64) -> Result<Self> {
        Self::new(WeightKind::Gevrey { theta }, s, 2f64.powf(theta - 1.0))
    }

    /// Log-ultra weight with `kappa = e^q` and `Cf` from the doubling constant at `c`.
    pub fn log_ultra(q: f64, s: f64, c: f64) -> Result<Self> {
        let kind = WeightKind::log_ultra(q);
        kind.validate()?;
        let cf = kind.doubling_constant(c) * (1.0 + 1e-9);
        Self::new(kind, s, cf)
    }

    /// Same spec with `s0` computed for the given table.
    pub fn with_s0(mut self, table: &ModeTable) -> Result<Self> {
        self.s0 = compute_s0(&self.kind, self.cf, table)?;
        Ok(self)
    }

    pub fn with_scale(mut self, s: f64) -> Self {
        self.s = s;
        self
    }

    /// `f(x)` for `x >= 1`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !(x >= 1.0) {
            return Err(Error::Domain(format!("weight argument must be >= 1, got {x}")));
        }
        Ok(self.kind.eval(x))
    }

    pub fn f(&self, x: f64) -> f64 {
        self.kind.eval(x)
    }

    /// Per-variable factors `e^{s f(<j>)}`.
    pub fn factors(&self, table: &ModeTable, s: f64) -> Vec<f64> {
        (0..table.len() as u32)
            .map(|id| (s * self.f(table.bracket(id))).exp())
            .collect()
    }
}

/// Smallest `s0` (up to bisection tolerance) with
/// `sum_{|j| <= k_max, sigma} e^{(2Cf - 2) s0 f(<j>)} < 1/3`.
pub fn compute_s0(kind: &WeightKind, cf: f64, table: &ModeTable) -> Result<f64> {
    let fs: Vec<f64> = (0..table.len() as u32)
        .map(|id| kind.eval(table.bracket(id)))
        .collect();
    let g = |s0: f64| fs.iter().map(|f| ((2.0 * cf - 2.0) * s0 * f).exp()).sum::<f64>() - 1.0 / 3.0;
    let mut hi = 1.0;
    while g(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoRoot("s0 bracket did not close".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Outcome of the subadditivity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct A0Report {
    pub passed: bool,
    pub samples: usize,
    /// Minimum of `rhs - lhs` relative to `rhs`.
    pub worst_margin: f64,
    pub worst_vector: Vec<f64>,
    pub counterexample: Option<Vec<f64>>,
    /// Whether `f` increased strictly on the probed range.
    pub increasing: bool,
}

/// Samples vectors `x_1..x_d >= c` and checks
/// `f(sum x) <= f(max x) + Cf sum_{others} f(x_l)`.
pub fn check_a0(w: &WeightSpec, c: f64, d_max: usize, samples: usize, seed: u64) -> Result<A0Report> {
    if d_max < 2 {
        return Err(Error::Domain("d_max must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (1e6 / c).ln();
    let mut vectors: Vec<Vec<f64>> = (1..=d_max).map(|d| vec![c; d]).collect();
    vectors.push(vec![1e6, c]);
    for _ in 0..samples {
        let d = rng.gen_range(1..=d_max);
        vectors.push((0..d).map(|_| c * (rng.gen::<f64>() * span).exp()).collect());
    }
    let mut worst = f64::INFINITY;
    let mut worst_vector = Vec::new();
    let mut counterexample = None;
    for x in &vectors {
        let m = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let lhs = w.f(x.iter().sum());
        let rhs = w.f(x[m])
            + w.cf
                * x.iter()
                    .enumerate()
                    .filter(|&(i, _)| i != m)
                    .map(|(_, &v)| w.f(v))
                    .sum::<f64>();
        let margin = (rhs - lhs) / rhs;
        if margin < worst {
            worst = margin;
            worst_vector = x.clone();
        }
        if margin < -1e-12 && counterexample.is_none() {
            counterexample = Some(x.clone());
        }
    }
    let grid: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).exp()).collect();
    let increasing = grid.windows(2).all(|p| w.f(p[1]) > w.f(p[0]));
    Ok(A0Report {
        passed: counterexample.is_none() && increasing,
        samples: vectors.len(),
        worst_margin: worst,
        worst_vector,
        counterexample,
        increasing,
    })
}

/// A truncated state `u_J`, one amplitude per variable of a [`ModeTable`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedState {
    pub table: Arc<ModeTable>,
    pub amps: Vec<Complex64>,
}

impl WeightedState {
    pub fn zeros(table: Arc<ModeTable>) -> Self {
        let n = table.len();
        WeightedState {
            table,
            amps: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn get(&self, m: &ModeIndex) -> Option<Complex64> {
        self.table.id_of(m).map(|i| self.amps[i as usize])
    }

    pub fn set(&mut self, m: &ModeIndex, v: Complex64) -> Result<()> {
        let id = self
            .table
            .id_of(m)
            .ok_or_else(|| Error::Domain(format!("mode {m} outside table")))?;
        self.amps[id as usize] = v;
        Ok(())
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        WeightedState {
            table: self.table.clone(),
            amps: self.amps.iter().map(|&x| x * a).collect(),
        }
    }

    pub fn norm_s(&self, w: &WeightSpec, s: f64) -> f64 {
        (0..self.table.len())
            .map(|i| {
                let e = (2.0 * s * w.f(self.table.bracket(i as u32))).exp();
                self.amps[i].norm_sqr() * e
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_l2(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|u_{(j,-)} - conj(u_{(j,+)})|`.
    pub fn reality_defect(&self) -> f64 {
        (0..self.table.len() as u32)
            .map(|id| (self.amps[self.table.conj(id) as usize] - self.amps[id as usize].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    /// Keeps only the modes with `|j| > n_cut`.
    pub fn high_part(&self, n_cut: u32) -> Self {
        let mut out = self.clone();
        for (id, a) in out.amps.iter_mut().enumerate() {
            if !self.table.is_high(id as u32, n_cut) {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn low_part(&self, n_cut: u32) -> Self {
        let mut out = self.clone();
        for (id, a) in out.amps.iter_mut().enumerate() {
            if self.table.is_high(id as u32, n_cut) {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        out
    }
}

/// Random state with `||u||_s = r`, supported on `support`.
///
/// Amplitudes are complex Gaussians damped by `e^{-s f(<j>)}`. With `real`, the
/// `(j,-)` amplitude is set to the conjugate of the `(j,+)` one, so `support`
/// is closed under conjugation.
pub fn sample_sphere<R: Rng>(
    table: &Arc<ModeTable>,
    w: &WeightSpec,
    r: f64,
    support: &[u32],
    real: bool,
    rng: &mut R,
) -> Result<WeightedState> {
    if support.is_empty() {
        return Err(Error::Domain("sample_sphere needs a non-empty support".into()));
    }
    let mut u = WeightedState::zeros(table.clone());
    let draw = |rng: &mut R, id: u32| {
        let damp = (-w.s * w.f(table.bracket(id))).exp();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * damp
    };
    for &id in support {
        if real {
            if table.sign(id) == 1 {
                let z = draw(rng, id);
                u.amps[id as usize] = z;
                u.amps[table.conj(id) as usize] = z.conj();
            }
        } else {
            u.amps[id as usize] = draw(rng, id);
        }
    }
    let n = u.norm_s(w, w.s);
    if n == 0.0 {
        return Err(Error::Domain("support has no sampled mode".into()));
    }
    Ok(u.scaled(Complex64::new(r / n, 0.0)))
}

/// [`sample_sphere`] with its own seeded generator.
pub fn sample_sphere_seeded(
    table: &Arc<ModeTable>,
    w: &WeightSpec,
    r: f64,
    support: &[u32],
    real: bool,
    seed: u64,
) -> Result<WeightedState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_sphere(table, w, r, support, real, &mut rng)
}
