//! Balanced cutoffs and predicted stability times.

use std::sync::Arc;

use nekhoroshev::lattice::ModeTable;
use nekhoroshev::spectrum::FrequencyModel;
use nekhoroshev::stability::{
    build_ledger, gevrey_closed_form_ln_n, lambert_w_minus1, predict_time, solve_balance, LedgerInputs,
    PredictOptions,
};
use nekhoroshev::weights::WeightSpec;

fn main() -> nekhoroshev::Result<()> {
    let x = lambert_w_minus1(-1e-5)?;
    println!("W_-1(-1e-5) = {x:.12}, x e^x = {:.3e}", x * x.exp());

    let table = Arc::new(ModeTable::new(1, 8, 2.0)?);
    let model = FrequencyModel::conv_nls_free(1);
    let gev = WeightSpec::gevrey(0.5, 2.0)?.with_s0(&table)?;
    let ledger = build_ledger(LedgerInputs::from_model(&model, &gev, 1.0, 1.0))?;
    println!("C_exp = {}, C_deno = {}, C_fin = {}, C_sta = {:.3e}", ledger.c_exp, ledger.c_deno, ledger.c_fin, ledger.c_sta);

    for d in [5, 10, 40, 80] {
        let s = solve_balance(&gev, 1, d)?;
        let cf = gevrey_closed_form_ln_n(0.5, 1, d)?;
        println!("d = {d:>2}: ln N = {:.6} (closed form {cf:.6}), |ln r| = {:.1}", s.ln_n, s.ln_r_abs);
    }

    let opts = PredictOptions::default();
    for eps in [1e-50, 1e-100, 1e-200, 1e-300] {
        let p = predict_time(&gev, 1, eps, &ledger, &opts)?;
        println!("eps = {eps:e}: d = {}, N = {:.3e}, ln T = {:.1}", p.d, p.n, p.ln_t);
    }

    let ult = WeightSpec::log_ultra(2.0, 2.0, 2.0)?.with_s0(&table)?;
    let lu = build_ledger(LedgerInputs::from_model(&model, &ult, 1.0, 1.0))?;
    let p = predict_time(&ult, 1, 1e-300, &lu, &opts)?;
    println!("log-ultra q = 2: d = {}, ln T = {:.1}, a = {:?}", p.d, p.ln_t, p.a);
    Ok(())
}
