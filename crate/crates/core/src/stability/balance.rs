use serde::{Deserialize, Serialize};

use super::lambert::lambert_w_minus1;
use super::ledger::ConstantsLedger;
use crate::error::{Error, Result};
use crate::weights::{WeightKind, WeightSpec};

/// Solution of `d^p ln(dN) = f(N)/d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceSolution {
    pub d: usize,
    pub p: u32,
    pub ln_n: f64,
    /// `N`, infinite when it overflows.
    pub n: f64,
    /// `|ln r| = 2 d^p ln(dN)`.
    pub ln_r_abs: f64,
    /// `f(N)`.
    pub f_n: f64,
    /// Relative residual of `d^p ln(dN) + ln r = -f(N)/d`.
    pub residual: f64,
    /// Gevrey closed form of `ln N` through `W_{-1}`.
    pub closed_form_ln_n: Option<f64>,
}

fn balance_fn(kind: &WeightKind, p: u32, d: usize, l: f64) -> f64 {
    let df = d as f64;
    kind.eval_from_ln(l) / df - df.powi(p as i32) * (df.ln() + l)
}

/// Gevrey closed form `ln N = -W_{-1}(-theta d^{-(theta+p+1)})/theta - ln d`.
pub fn gevrey_closed_form_ln_n(theta: f64, p: u32, d: usize) -> Result<f64> {
    let df = d as f64;
    let y = -theta * df.powf(-(theta + p as f64 + 1.0));
    Ok(-lambert_w_minus1(y)? / theta - df.ln())
}

/// Solves the balancing equation for `N` by bisection in `ln N >= 0`.
pub fn solve_balance(w: &WeightSpec, p: u32, d: usize) -> Result<BalanceSolution> {
    solve_balance_kind(&w.kind, p, d)
}

pub fn solve_balance_kind(kind: &WeightKind, p: u32, d: usize) -> Result<BalanceSolution> {
    if d < 4 {
        return Err(Error::Domain(format!("balancing needs d >= 4, got {d}")));
    }
    let h = |l: f64| balance_fn(kind, p, d, l);
    let mut lo = 0.0;
    if h(lo) >= 0.0 {
        return Err(Error::NoRoot(format!("f(1)/d already exceeds d^p ln d at d = {d}")));
    }
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoRoot(format!("no balancing root below ln N = 1e300 at d = {d}")));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ln_n = 0.5 * (lo + hi);
    let df = d as f64;
    let lhs = df.powi(p as i32) * (df.ln() + ln_n);
    let ln_r_abs = 2.0 * lhs;
    let f_n = kind.eval_from_ln(ln_n);
    // d^p ln(dN) + ln r = -lhs must equal -f(N)/d
    let residual = ((lhs - ln_r_abs) + f_n / df).abs() / (f_n / df);
    let closed_form_ln_n = match kind {
        WeightKind::Gevrey { theta } => Some(gevrey_closed_form_ln_n(*theta, p, d)?),
        _ => None,
    };
    Ok(BalanceSolution {
        d,
        p,
        ln_n,
        n: ln_n.exp(),
        ln_r_abs,
        f_n,
        residual,
        closed_form_ln_n,
    })
}

/// `f(N) ln|ln r| / |ln r|^2`, bounded above and below in the Gevrey regime.
pub fn gevrey_order_ratio(sol: &BalanceSolution) -> f64 {
    sol.f_n * sol.ln_r_abs.ln() / (sol.ln_r_abs * sol.ln_r_abs)
}

/// `f(N) / |ln r|^{1+a}`.
pub fn power_ratio(sol: &BalanceSolution, a: f64) -> f64 {
    (sol.f_n.ln() - (1.0 + a) * sol.ln_r_abs.ln()).exp()
}

/// `(d^{(p+1)/(q-1)}, d^{(p+1)/(q-1)} (ln d)^{1/(q-1)})`, the bracket for `ln N`
/// in the log-ultra regime.
pub fn log_ultra_sandwich(q: f64, p: u32, d: usize) -> (f64, f64) {
    let df = d as f64;
    let lo = df.powf((p as f64 + 1.0) / (q - 1.0));
    (lo, lo * df.ln().powf(1.0 / (q - 1.0)))
}

/// Supremum of admissible exponents `a` for the log-ultra time `e^{|ln eps|^{1+a}}`.
pub fn log_ultra_a_max(q: f64, p: u32) -> f64 {
    (q - 1.0) / (q * p as f64 + 1.0)
}

/// Power of `d` in `f(N)/|ln r|^{1+a}` for the log-ultra regime; the ratio
/// stays bounded below iff this is positive.
pub fn log_ultra_exponent(q: f64, p: u32, a: f64) -> f64 {
    1.0 + a - q * a * (p as f64 + 1.0) / (q - 1.0)
}

/// Power of `d` in `f(N)/|ln r|^{1+a}` for the Gevrey regime, `1 - a p`.
pub fn gevrey_exponent(p: u32, a: f64) -> f64 {
    1.0 - a * p as f64
}

/// Which closed-form scaling a prediction follows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Gevrey,
    LogUltra,
    Tabulated,
}

/// Predicted stability time at one amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityPrediction {
    pub eps: f64,
    pub abs_ln_eps: f64,
    pub d: usize,
    pub n: f64,
    pub ln_n: f64,
    pub ln_r_abs: f64,
    /// `ln T` with `T = e^{C_fin f(N)} / C_sta`.
    pub ln_t: f64,
    /// `ln T` with the scale kept in the exponent, `e^{C_fin s f(N)} / C_sta`.
    pub ln_t_scaled: f64,
    pub regime: Regime,
    /// Log-ultra exponent `a` (just below its supremum).
    pub a: Option<f64>,
    /// `|ln eps|^2 / ln|ln eps|` (Gevrey) or `|ln eps|^{1+a}` (log-ultra).
    pub regime_scale: f64,
}

/// Search range for the degree in [`predict_time`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictOptions {
    pub d_min: usize,
    pub d_max: usize,
    /// Threshold `eps_0`; defaults to the amplitude admitted by `d_min`.
    pub eps0: Option<f64>,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions {
            d_min: 4,
            d_max: 400,
            eps0: None,
        }
    }
}

/// Picks the largest `d` whose balanced radius `r(d)` still admits `eps` and
/// reports the resulting time.
pub fn predict_time(
    w: &WeightSpec,
    p: u32,
    eps: f64,
    ledger: &ConstantsLedger,
    opts: &PredictOptions,
) -> Result<StabilityPrediction> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    predict_time_ln(w, p, -eps.ln(), ledger, opts)
}

/// [`predict_time`] for amplitudes given as `|ln eps|`, which reaches below
/// the smallest positive `f64`.
pub fn predict_time_ln(
    w: &WeightSpec,
    p: u32,
    abs_ln_eps: f64,
    ledger: &ConstantsLedger,
    opts: &PredictOptions,
) -> Result<StabilityPrediction> {
    if !(abs_ln_eps > 0.0) {
        return Err(Error::Domain(format!("|ln eps| must be positive, got {abs_ln_eps}")));
    }
    let first = solve_balance(w, p, opts.d_min)?;
    let abs_ln_eps0 = opts.eps0.map_or(first.ln_r_abs, |e| -e.ln());
    if abs_ln_eps <= abs_ln_eps0 {
        return Err(Error::Domain(format!(
            "|ln eps| = {abs_ln_eps} does not exceed |ln eps0| = {abs_ln_eps0}"
        )));
    }
    let target = abs_ln_eps;
    let mut best = first;
    for d in (opts.d_min + 1)..=opts.d_max {
        let sol = solve_balance(w, p, d)?;
        if sol.ln_r_abs > target {
            break;
        }
        best = sol;
    }
    let (regime, a, regime_scale) = match &w.kind {
        WeightKind::Gevrey { .. } => (Regime::Gevrey, None, target * target / target.ln()),
        WeightKind::LogUltra { q, .. } => {
            let a = log_ultra_a_max(*q, p) * (1.0 - 1e-6);
            (Regime::LogUltra, Some(a), target.powf(1.0 + a))
        }
        WeightKind::Tabulated { .. } => (Regime::Tabulated, None, f64::NAN),
    };
    Ok(StabilityPrediction {
        eps: (-target).exp(),
        abs_ln_eps: target,
        d: best.d,
        n: best.n,
        ln_n: best.ln_n,
        ln_r_abs: best.ln_r_abs,
        ln_t: ledger.ln_time(best.f_n),
        ln_t_scaled: ledger.ln_time_scaled(best.f_n),
        regime,
        a,
        regime_scale,
    })
}
