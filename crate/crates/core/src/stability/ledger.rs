use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::FrequencyModel;
use crate::weights::WeightSpec;

/// Inputs from which every constant of the ledger is computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerInputs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
    pub delta: f64,
    pub tau: f64,
    pub gamma: f64,
    pub p: u32,
    pub c_p: f64,
    pub s: f64,
    pub cf: f64,
    /// `f(C1)`.
    pub f_c1: f64,
    pub s0: f64,
}

impl LedgerInputs {
    /// Collects the inputs from a model, a weight, the shell thickness and `C_P`.
    pub fn from_model(model: &FrequencyModel, w: &WeightSpec, c1: f64, c_p: f64) -> Self {
        let q = model.params();
        LedgerInputs {
            c0: q.c0,
            c1,
            c2: q.c2,
            beta: q.beta,
            delta: q.delta,
            tau: q.tau,
            gamma: q.gamma,
            p: q.p,
            c_p,
            s: w.s,
            cf: w.cf,
            f_c1: w.f(c1.max(1.0)),
            s0: w.s0,
        }
    }
}

/// The named constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub inputs: LedgerInputs,
    pub c_sep: f64,
    pub c_deno: f64,
    pub c_exp: f64,
    pub c_est_p: f64,
    pub c_thre: f64,
    pub c_rema: f64,
    pub c_fin: f64,
    pub d_fin: f64,
    pub s_fin: f64,
    pub c_sta: f64,
    /// Constant of the three-high-mode remainder, `2^3 C_P`.
    pub c_r: f64,
}

pub fn build_ledger(inputs: LedgerInputs) -> Result<ConstantsLedger> {
    let i = &inputs;
    let positive = [
        ("C0", i.c0),
        ("C1", i.c1),
        ("C2", i.c2),
        ("beta", i.beta),
        ("delta", i.delta),
        ("tau", i.tau),
        ("gamma", i.gamma),
        ("C_P", i.c_p),
        ("s", i.s),
        ("Cf", i.cf),
        ("s0", i.s0),
    ];
    for (name, v) in positive {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("ledger input {name} must be positive, got {v}")));
        }
    }
    if i.cf >= 1.0 {
        return Err(Error::Domain(format!("Cf must be < 1, got {}", i.cf)));
    }
    if i.beta <= 1.0 {
        return Err(Error::Domain(format!("beta must be > 1, got {}", i.beta)));
    }
    if i.p == 0 {
        return Err(Error::Domain("p must be >= 1".into()));
    }
    let c_sep = i.c0.powf(2.0 / i.beta);
    let c_deno = (i.c0 / i.c2 + i.c0 * i.c0).powf(i.beta);
    let c_exp = i.tau * (1.0 + i.beta / i.delta) + 1.0;
    let c_est_p = 64.0 * E * E * i.c_p * i.c_p / i.gamma;
    let block = (2.0 * i.s * i.cf * i.f_c1).exp();
    let c_thre = [
        32.0 * i.c_p * E / i.gamma,
        2.0,
        24.0 * E * E / i.gamma,
        16.0 * E * c_est_p / i.gamma,
        block,
    ]
    .into_iter()
    .fold(f64::MIN, f64::max);
    let c_rema = [
        48.0 * E * ((1.0 / (16.0 * E)).exp() - 1.0),
        c_est_p,
        E * i.c_p,
        c_deno,
    ]
    .into_iter()
    .fold(f64::MIN, f64::max);
    let c_fin = 2f64.powi(i.p as i32 + 2) * c_exp;
    let d_fin = (4.0 * c_rema).max(32.0 * E * E / i.gamma);
    let s_fin = i.s0 + c_fin;
    let c_sta = 1.0 / block;
    let c_r = 8.0 * i.c_p;
    Ok(ConstantsLedger {
        c_sep,
        c_deno,
        c_exp,
        c_est_p,
        c_thre,
        c_rema,
        c_fin,
        d_fin,
        s_fin,
        c_sta,
        c_r,
        inputs,
    })
}

impl ConstantsLedger {
    fn dp(&self, d: usize) -> f64 {
        (d as f64).powi(self.inputs.p as i32)
    }

    /// `ln (C_deno d N)^{C_exp d^p}`.
    pub fn ln_divisor_growth(&self, d: usize, n_cut: u32) -> f64 {
        self.c_exp * self.dp(d) * (self.c_deno * d as f64 * n_cut as f64).ln()
    }

    /// `ln(gamma / (C_deno d N)^{C_exp d^p})`.
    pub fn ln_divisor_floor(&self, d: usize, n_cut: u32) -> f64 {
        self.inputs.gamma.ln() - self.ln_divisor_growth(d, n_cut)
    }

    /// `ln(r d^2 C_thre (C_deno d N)^{C_exp d^p})`; the smallness gate holds iff negative.
    pub fn ln_gate(&self, r: f64, d: usize, n_cut: u32) -> f64 {
        r.ln() + 2.0 * (d as f64).ln() + self.c_thre.ln() + self.ln_divisor_growth(d, n_cut)
    }

    /// `E = 1/(16 e d)`.
    pub fn e_const(d: usize) -> f64 {
        1.0 / (16.0 * E * d as f64)
    }

    /// `r_k = 2r - (k-3) r/(d-3)`.
    pub fn r_k(r: f64, k: usize, d: usize) -> f64 {
        if d <= 3 {
            return 2.0 * r;
        }
        2.0 * r - (k as f64 - 3.0) * r / (d as f64 - 3.0)
    }

    /// Log of the bound on `|P_k|` along the iteration.
    pub fn ln_p_bound(&self, r: f64, k: usize, d: usize, n_cut: u32) -> f64 {
        if k <= 3 {
            return (2.0 * self.inputs.c_p * r).ln();
        }
        let (kf, df) = (k as f64, d as f64);
        (2.0 * kf - 7.0) * df.ln()
            + (kf - 2.0) * (self.c_est_p * r).ln()
            + self.c_exp * (kf - 3.0) * self.dp(d) * (self.c_deno * df * n_cut as f64).ln()
    }

    /// Log of the bound on the generator built from `P_k`.
    pub fn ln_g_bound(&self, r: f64, k: usize, d: usize, n_cut: u32) -> f64 {
        self.ln_p_bound(r, k, d, n_cut) + self.ln_divisor_growth(d, n_cut) - self.inputs.gamma.ln()
    }

    /// `ln r^{d-2} (C_rema d N)^{C_exp d^{p+1}}`.
    pub fn ln_rkd_bound(&self, r: f64, d: usize, n_cut: u32) -> f64 {
        let df = d as f64;
        (df - 2.0) * r.ln() + self.c_exp * df.powi(self.inputs.p as i32 + 1) * (self.c_rema * df * n_cut as f64).ln()
    }

    /// `ln(C_R r / e^{(s - s0) f(N)})`.
    pub fn ln_r_high_bound(&self, r: f64, f_n: f64) -> f64 {
        (self.c_r * r).ln() - (self.inputs.s - self.inputs.s0) * f_n
    }

    /// `ln(e^{C_fin f(N)} / C_sta)`.
    pub fn ln_time(&self, f_n: f64) -> f64 {
        self.c_fin * f_n - self.c_sta.ln()
    }

    /// Variant carrying the scale: `ln(e^{C_fin s f(N)} / C_sta)`.
    pub fn ln_time_scaled(&self, f_n: f64) -> f64 {
        self.c_fin * self.inputs.s * f_n - self.c_sta.ln()
    }

    /// Factor by which the norm may grow across blocks, `1/C_sta >= 1`.
    pub fn escape_factor(&self) -> f64 {
        1.0 / self.c_sta
    }
}
